"""Surfaces, metrics and quadrature.

Two families of surfaces are supported:

* genus 0: the Riemann sphere with ``L = O(1)`` and divisor ``D = [0:1]``
  (the south pole ``t = cos(theta) = -1``);
* genus 1: the torus ``C / (Z + tau Z)`` with ``L = O(D)``, ``D = 0``.

Reference data are the round metric (sphere) and the flat metric (torus),
with area form ``omega0`` of total mass 1.  A scenario perturbs both the
Kahler form, ``omega = kappa e^u omega0``, and the Hermitian metric on ``L``,
``h = h0 e^(-psi)``; ``kappa`` normalises ``int omega = deg L = 1``.  The
volume form used in L^2 products is ``dv = omega / 2 pi``.

Points are given in chart-free coordinates: ``(t, phi)`` on the sphere with
``t = cos(theta)``, and ``(a, b)`` on the torus with ``z = a + tau b``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import special as sps

from .special import Modulus, _eta1_float, log_abs_sigma_weighted_np

__all__ = [
    "SurfaceScenario",
    "QuadratureGrid",
    "quadrature",
    "singular_rule",
    "integrate",
    "log_sD",
    "integrate_log_sD",
    "cutoff",
    "real_sph_harm",
    "perturbation",
    "poincare_lelong_residual",
    "MetricFields",
    "curvature_fields",
    "build_scenario",
]


def real_sph_harm(l: int, m: int, t, phi):
    """Real orthonormal spherical harmonic on the unit sphere at ``cos(theta) = t``."""
    theta = np.arccos(np.clip(t, -1.0, 1.0))
    am = abs(m)
    if hasattr(sps, "sph_harm_y"):
        Y = sps.sph_harm_y(l, am, theta, phi)
    else:  # pragma: no cover - older scipy
        Y = sps.sph_harm(am, l, phi, theta)
    if m > 0:
        return math.sqrt(2.0) * Y.real
    if m < 0:
        return math.sqrt(2.0) * Y.imag
    return Y.real


@dataclass(frozen=True)
class SurfaceScenario:
    """A surface with metric data and the three normalisation scalars.

    ``u`` and ``psi`` are tuples of perturbation modes.  On the sphere a mode
    is ``(l, m, coeff)`` (real spherical harmonic); on the torus it is
    ``(k, l, c, s)`` meaning ``c cos 2pi(ka + lb) + s sin 2pi(ka + lb)``.

    ``s0``, ``sDL`` and ``sDE`` multiply the canonical initial datum, the
    canonical element of ``L_D`` and the generator of ``det E_D``.
    """

    genus: int = 0
    tau: complex = 1j
    u: tuple = ()
    psi: tuple = ()
    s0: complex = 1.0
    sDL: complex = 1.0
    sDE: complex = 1.0
    name: str = ""

    def __post_init__(self):
        if self.genus not in (0, 1):
            raise ValueError("genus must be 0 or 1")
        if self.genus == 1:
            Modulus(self.tau)
        object.__setattr__(self, "u", tuple(tuple(m) for m in self.u))
        object.__setattr__(self, "psi", tuple(tuple(m) for m in self.psi))
        width = 3 if self.genus == 0 else 4
        for m in self.u + self.psi:
            if len(m) != width:
                raise ValueError(f"perturbation modes on genus {self.genus} have {width} entries")
        for name in ("s0", "sDL", "sDE"):
            if complex(getattr(self, name)) == 0:
                raise ValueError(f"{name} must be nonzero")

    @property
    def euler_characteristic(self) -> int:
        return 2 - 2 * self.genus

    @property
    def degree(self) -> int:
        return 1

    @property
    def prequantized(self) -> bool:
        return not self.u and not self.psi

    @property
    def y(self) -> float:
        return complex(self.tau).imag

    def N(self, p: int) -> int:
        """``dim H^0(L^p)`` by Riemann-Roch."""
        return p + 1 - self.genus

    def with_scalars(self, s0=None, sDL=None, sDE=None) -> "SurfaceScenario":
        return SurfaceScenario(
            self.genus,
            self.tau,
            self.u,
            self.psi,
            self.s0 if s0 is None else s0,
            self.sDL if sDL is None else sDL,
            self.sDE if sDE is None else sDE,
            self.name,
        )

    @cached_property
    def kappa(self) -> float:
        """``1 / int e^u omega0`` so that ``omega`` has mass one."""
        if not self.u:
            return 1.0
        g = quadrature(self, level=2, degree=0, _raw=True)
        return 1.0 / float(np.sum(g.w0 * np.exp(perturbation(self, self.u, g.x1, g.x2))))

    # densities relative to omega0 -------------------------------------------------

    def omega_density(self, x1, x2):
        return self.kappa * np.exp(perturbation(self, self.u, x1, x2))

    def c1L_density(self, x1, x2):
        """``c1(L, h) / omega0``."""
        lap = perturbation(self, self.psi, x1, x2, laplacian=True)
        return 1.0 + (lap if self.genus == 0 else lap / (4 * math.pi))

    def c1TX_density(self, x1, x2):
        """``c1(TX, omega) / omega0``."""
        lap = perturbation(self, self.u, x1, x2, laplacian=True)
        if self.genus == 0:
            return 2.0 - lap
        return -lap / (4 * math.pi)

    def rL(self, x1, x2):
        """``r^L = log(c1(L, h) / omega)``."""
        return np.log(self.c1L_density(x1, x2) / self.omega_density(x1, x2))

    def psi_at(self, x1, x2):
        return perturbation(self, self.psi, x1, x2)

    @property
    def D(self) -> tuple[float, float]:
        return (-1.0, 0.0) if self.genus == 0 else (0.0, 0.0)

    def log_norm_sDL(self) -> float:
        """``log |s_D^L|^2``: the scalar times the frame norm at ``D``."""
        return math.log(abs(complex(self.sDL)) ** 2) - float(self.psi_at(*map(np.atleast_1d, self.D))[0])

    def log_norm_dsD(self) -> float:
        """``log |ds_D(D)|^2`` with ``h^L`` on ``L`` and ``h^TX`` from ``omega``.

        If ``omega = i rho dz ^ dzbar`` then ``|dz|^2 = 1 / rho``.  At ``D`` the
        round metric has ``rho = 1 / 2pi`` (sphere, chart ``x / y``) and the flat
        metric has ``rho = 1 / 2y`` (torus).
        """
        x1, x2 = map(np.atleast_1d, self.D)
        dens = float(self.omega_density(x1, x2)[0])
        psiD = float(self.psi_at(x1, x2)[0])
        rho0 = 1 / (2 * math.pi) if self.genus == 0 else 1 / (2 * self.y)
        return -math.log(rho0 * dens) - psiD


def perturbation(s: SurfaceScenario, modes, x1, x2, laplacian: bool = False):
    """Evaluate a mode list (or its ``Delta_{g0}``) at points ``(x1, x2)``.

    ``Delta_{g0}`` is the analyst's Laplacian of the reference metric: the unit
    round sphere, or the flat torus of area one.
    """
    x1 = np.asarray(x1, dtype=float)
    out = np.zeros(np.broadcast(x1, np.asarray(x2)).shape)
    if s.genus == 0:
        for l, m, c in modes:
            v = c * real_sph_harm(int(l), int(m), x1, x2)
            out = out + (-l * (l + 1) * v if laplacian else v)
    else:
        tau = complex(s.tau)
        for k, l, c, sn in modes:
            arg = 2 * math.pi * (k * x1 + l * np.asarray(x2))
            v = c * np.cos(arg) + sn * np.sin(arg)
            if laplacian:
                v = v * (-4 * math.pi**2 / tau.imag * abs(l - k * tau) ** 2)
            out = out + v
    return out


# --------------------------------------------------------------------------
# quadrature


@dataclass
class QuadratureGrid:
    """Tensor rule on a surface.

    ``w0`` are weights for ``omega0`` (total 1).  ``dv`` converts to the
    volume form of the scenario.
    """

    genus: int
    level: int
    x1: np.ndarray
    x2: np.ndarray
    w0: np.ndarray
    shape: tuple = ()
    kind: str = "regular"
    scenario: SurfaceScenario | None = field(default=None, repr=False)
    log_dist: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.x1.size

    @cached_property
    def dv(self) -> np.ndarray:
        return self.w0 * self.scenario.omega_density(self.x1, self.x2) / (2 * math.pi)


def _mode_bandwidth(s: SurfaceScenario, p: int) -> int:
    """Rough angular bandwidth of ``exp(-p psi + u)`` for node counts."""
    band = 0
    for modes, scale in ((s.psi, p), (s.u, 1)):
        if not modes:
            continue
        lmax = max(abs(m[0]) + (abs(m[1]) if s.genus == 1 else 0) for m in modes)
        amp = sum(abs(x) for m in modes for x in m[2:])
        band += int(lmax * (6 + 3 * scale * amp))
    return band


def quadrature(s: SurfaceScenario, level: int = 0, degree: int = 0, _raw: bool = False) -> QuadratureGrid:
    """Regular rule resolving integrands of polynomial degree ``degree`` in ``L^p``.

    Sphere: Gauss-Legendre in ``t`` times the trapezoid rule in ``phi``;
    exact for polynomials of the ambient coordinates up to the node count.
    Torus: the periodic trapezoid rule in ``(a, b)`` at cell centres.
    Each level adds nodes so that two levels give an error estimate.
    """
    extra = 0 if _raw else _mode_bandwidth(s, degree)
    if s.genus == 0:
        nt = (degree + extra) // 2 + 8 + 8 * level
        nphi = degree + extra + 16 + 16 * level
        xt, wt = np.polynomial.legendre.leggauss(nt)
        phi = 2 * math.pi * np.arange(nphi) / nphi
        T, P = np.meshgrid(xt, phi, indexing="ij")
        W = np.outer(wt, np.full(nphi, 2 * math.pi / nphi)) / (4 * math.pi)
        shape = (nt, nphi)
    else:
        y = s.y
        # Gaussian localisation of sections of L^p has width ~ 1/sqrt(p y)
        n = max(32, int(3 * degree + 8 * math.sqrt(max(degree, 1) / y) + 2 * extra)) + 16 * level
        ga = (np.arange(n) + 0.5) / n
        T, P = np.meshgrid(ga, ga, indexing="ij")
        W = np.full((n, n), 1.0 / n**2)
        shape = (n, n)
    return QuadratureGrid(s.genus, level, T.ravel(), P.ravel(), W.ravel(), shape, "regular", s)


def integrate(grid: QuadratureGrid, values, measure: str = "omega0"):
    """``sum w f`` with weights for ``omega0`` or ``dv``."""
    w = grid.w0 if measure == "omega0" else grid.dv
    return np.sum(w * values, axis=-1)


def singular_rule(s: SurfaceScenario, level: int = 0, k: int = 6) -> QuadratureGrid:
    """Sphere rule graded towards ``D`` for integrands with ``log|s_D|^2``.

    ``t = -1 + 2 x^k`` with Gauss-Legendre ``x``; the Jacobian ``x^(k-1)``
    absorbs the logarithm into a ``C^(k-2)`` integrand.
    """
    if s.genus != 0:
        raise ValueError("graded rule is for the sphere; the torus uses subtraction")
    nx = 48 + 24 * level + _mode_bandwidth(s, 1)
    nphi = 48 + 24 * level + 2 * _mode_bandwidth(s, 1)
    x, wx = np.polynomial.legendre.leggauss(nx)
    x = 0.5 * (x + 1)
    wx = 0.5 * wx
    t = -1 + 2 * x**k
    wt = wx * 2 * k * x ** (k - 1)
    phi = 2 * math.pi * np.arange(nphi) / nphi
    T, P = np.meshgrid(t, phi, indexing="ij")
    W = np.outer(wt, np.full(nphi, 2 * math.pi / nphi)) / (4 * math.pi)
    # log((1 + t)/2) = k log x, kept exact where t rounds to -1
    LD = np.repeat(k * np.log(x), nphi)
    return QuadratureGrid(0, level, T.ravel(), P.ravel(), W.ravel(), (nx, nphi), "graded", s, LD)


def log_sD(s: SurfaceScenario, x1, x2):
    """``log |s_D|^2`` for the canonical section of ``O(D)`` with metric ``h``.

    Sphere: ``s_D = x`` so ``|s_D|^2 = (1 + t)/2 e^(-psi)``.  Torus:
    ``|sigma|^2 e^(-phi - psi)`` in the sigma trivialisation.
    """
    if s.genus == 0:
        return np.log((1.0 + np.asarray(x1)) / 2.0) - s.psi_at(x1, x2)
    return log_abs_sigma_weighted_np(s.tau, x1, x2) - s.psi_at(x1, x2)


# --------------------------------------------------------------------------
# torus subtraction


def _torus_radius(tau: complex) -> float:
    """Radius inside which the centred cell coordinates are the nearest representative."""
    tau = complex(tau)
    y = tau.imag
    short = min(abs(m + n * tau) for m in range(-3, 4) for n in range(-3, 4) if (m, n) != (0, 0))
    r = 0.45 * short
    # |b| <= r / y < 1/2 and |a| <= r + |Re tau| |b| < 1/2
    while r / y >= 0.45 or r + abs(tau.real) * r / y >= 0.45:
        r *= 0.9
    return r


def cutoff(r, scale: float, order: int = 10):
    """``exp(-(r/scale)^order)``: equal to one to order ``r^order`` at the origin."""
    return np.exp(-((np.asarray(r) / scale) ** order))


def _centred(x):
    return x - np.floor(x + 0.5)


def integrate_log_sD(s: SurfaceScenario, density, level: int = 1):
    """``int F log|s_D|^2 omega0`` for a smooth density ``F(x1, x2)``.

    Returns ``(value, error_estimate)`` from two consecutive levels.
    """
    vals = [_integrate_log_sD_level(s, density, lv) for lv in (level, level + 1)]
    return vals[1], abs(vals[1] - vals[0])


def _integrate_log_sD_level(s: SurfaceScenario, density, level: int) -> float:
    if s.genus == 0:
        g = singular_rule(s, level)
        logs = g.log_dist - s.psi_at(g.x1, g.x2)
        return float(np.sum(g.w0 * density(g.x1, g.x2) * logs))
    tau = complex(s.tau)
    y = tau.imag
    R = _torus_radius(tau)
    scale = R / 1.6
    n = 160 + 64 * level + 2 * _mode_bandwidth(s, 1)
    ga = (np.arange(n) + 0.5) / n - 0.5
    A, B = np.meshgrid(ga, ga, indexing="ij")
    A, B = A.ravel(), B.ravel()
    z = A + tau * B
    r = np.abs(z)
    smooth = log_sD(s, A, B) - cutoff(r, scale) * np.log(r**2)
    trap = np.mean(density(A, B) * smooth)
    # polar patch: int F chi log r^2 dA_z / y, r = R x^k
    k = 4
    nx = 40 + 20 * level
    nth = 64 + 32 * level + 4 * _mode_bandwidth(s, 1)
    x, wx = np.polynomial.legendre.leggauss(nx)
    x = 0.5 * (x + 1)
    wx = 0.5 * wx
    rr = R * x**k
    wr = wx * R * k * x ** (k - 1) * rr
    th = 2 * math.pi * np.arange(nth) / nth
    RR, TH = np.meshgrid(rr, th, indexing="ij")
    WR = np.outer(wr, np.full(nth, 2 * math.pi / nth))
    zz = RR * np.exp(1j * TH)
    bb = zz.imag / y
    aa = zz.real - tau.real * bb
    patch = np.sum(WR * density(aa, bb) * cutoff(RR, scale) * np.log(RR**2)) / y
    return float(trap + patch)


def poincare_lelong_residual(s: SurfaceScenario, test_modes, level: int = 1) -> float:
    """Check ``f(D) - int f c1(L,h) = int log|s_D|^2 (i/2pi) d dbar f``.

    ``test_modes`` is a perturbation list describing ``f``; the right-hand
    side uses ``(i/2pi) d dbar f = Delta f omega0`` on the sphere and
    ``Delta f / 4pi omega0`` on the torus.
    """
    x1D, x2D = map(np.atleast_1d, s.D)
    fD = float(perturbation(s, test_modes, x1D, x2D)[0])
    g = quadrature(s, level=level + 2, degree=8)
    lhs = fD - float(np.sum(g.w0 * perturbation(s, test_modes, g.x1, g.x2) * s.c1L_density(g.x1, g.x2)))
    fac = 1.0 if s.genus == 0 else 1 / (4 * math.pi)
    rhs, _ = integrate_log_sD(s, lambda a, b: fac * perturbation(s, test_modes, a, b, laplacian=True), level)
    return abs(lhs - rhs)


# --------------------------------------------------------------------------
# scenario construction


@dataclass(frozen=True)
class MetricFields:
    """Evaluable fields of a scenario, all as functions of ``(x1, x2)``.

    Densities are relative to the reference form ``omega0`` of mass one.
    """

    omega: object
    log_hL: object
    log_sD: object
    rL: object
    c1L: object
    c1TX: object


def curvature_fields(s: SurfaceScenario) -> MetricFields:
    return MetricFields(
        s.omega_density,
        lambda a, b: -s.psi_at(a, b),
        lambda a, b: log_sD(s, a, b),
        s.rL,
        s.c1L_density,
        s.c1TX_density,
    )


def _modes(raw, width: int, label: str) -> tuple:
    out = []
    for m in raw or ():
        m = tuple(m)
        if len(m) != width:
            raise ValueError(f"{label} modes need {width} entries, got {m!r}")
        out.append(m)
    return tuple(out)


def _complex(v, label: str) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValueError(f"{label} must be a number or a [re, im] pair")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        return complex(v.replace(" ", "").replace("i", "j"))
    return complex(v)


def build_scenario(config: dict) -> SurfaceScenario:
    """Scenario from a mapping with keys ``genus``, ``tau``, ``u``, ``psi``, ``s0``, ``sDL``, ``sDE``.

    ``tau`` and the scalars accept a number, a ``[re, im]`` pair or a string
    such as ``"0.3+1.2i"``.  The curvature of ``h^L`` and the conformal factor
    are checked to stay positive on a fine grid.
    """
    genus = int(config.get("genus", 0))
    if genus not in (0, 1):
        raise ValueError("genus must be 0 or 1")
    width = 3 if genus == 0 else 4
    tau = _complex(config.get("tau", 1j), "tau") if genus == 1 else 1j
    if genus == 1 and tau.imag <= 0:
        raise ValueError("the modulus needs Im tau > 0")
    s = SurfaceScenario(
        genus,
        tau,
        _modes(config.get("u"), width, "u"),
        _modes(config.get("psi"), width, "psi"),
        _complex(config.get("s0", 1.0), "s0"),
        _complex(config.get("sDL", 1.0), "sDL"),
        _complex(config.get("sDE", 1.0), "sDE"),
        str(config.get("name", "")),
    )
    g = quadrature(s, level=3, degree=1)
    if np.min(s.c1L_density(g.x1, g.x2)) <= 0:
        raise ValueError("the bundle-weight perturbation makes the curvature non-positive")
    return s
