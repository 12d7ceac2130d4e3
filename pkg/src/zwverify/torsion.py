"""Zeta-regularised determinants and holomorphic torsion.

The torsion of a Hermitian bundle is ``tau = zeta'(0) / 2`` where ``zeta``
is the spectral zeta function of the positive spectrum of the Kodaira
Laplacian.  For functions on a Kahler curve with Kahler form of total
mass one this Laplacian is half the Riemannian Laplacian of the area-one
metric, so

* round sphere: eigenvalues ``2 pi k(k+1)`` with multiplicity ``2k+1``;
* flat torus ``C/(Z + tau Z)``: eigenvalues ``2 pi^2 |m + n tau|^2 / Im tau``;
* ``L^p`` on the flat prequantised torus: Landau levels ``2 pi p k``, each
  with multiplicity ``p``.

``zeta'(0)`` is computed generically by a Mellin split of the heat trace and
independently by a closed form for each model (Hurwitz zeta, Kronecker limit
formula, Riemann zeta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import mpmath as mp
import numpy as np
from scipy import special

from .geometry import SurfaceScenario
from .special import PrecisionCtx, riemann_zeta

__all__ = [
    "SpectralModel",
    "TorsionValue",
    "zeta_prime_at_zero",
    "sphere_model",
    "flat_torus_model",
    "landau_model",
    "squares_model",
    "dedekind_eta",
    "torsion_trivial_E",
    "torsion_Lp_flat_torus",
    "landau_lattice_levels",
    "landau_coeff_check",
    "heat_area_constant",
]


@dataclass(frozen=True)
class SpectralModel:
    """Positive spectrum with a known small-time heat expansion.

    ``levels(cutoff)`` yields ``(lambda, multiplicity)`` for every eigenvalue
    up to ``cutoff`` in nondecreasing order.  ``heat_terms`` is a tuple of
    ``(alpha, c)`` with ``Tr' e^{-t A} ~ sum c t^alpha`` as ``t -> 0``
    (kernel excluded); ``remainder`` is the power of the first omitted term,
    or ``None`` if the omitted part is exponentially small.
    """

    label: str
    levels: Callable[[float], Iterable]
    heat_terms: tuple
    remainder: float | None = None
    scale: float = 1.0
    zeta0_exact: float | None = None

    def scaled(self, lam: float) -> "SpectralModel":
        """Model with every eigenvalue multiplied by ``lam``."""
        base = self.levels

        def levels(cutoff, _b=base, _l=lam):
            for ev, m in _b(cutoff / _l):
                yield ev * _l, m

        terms = tuple((a, c * lam**a) for a, c in self.heat_terms)
        return SpectralModel(f"{self.label}*{lam:g}", levels, terms, self.remainder, self.scale * lam, self.zeta0_exact)

    @property
    def zeta0(self) -> float:
        return float(sum(c for a, c in self.heat_terms if a == 0))

    def heat_trace(self, t: float) -> float:
        """``Tr' exp(-t A)`` summed over eigenvalues with ``lambda t <= 40``."""
        ev, mult = _spectrum(self, 40.0 / t)
        return math.fsum(mult * np.exp(-ev * t))

    def heat_expansion(self, t: float) -> float:
        return sum(c * t**a for a, c in self.heat_terms)


@dataclass
class TorsionValue:
    """``tau = zeta'(0)/2`` with the method used and an error estimate."""

    surface: str
    value: float
    method: str
    error: float
    tau: complex | None = None
    p: int = 0
    routes: dict = field(default_factory=dict)

    @property
    def two_tau(self) -> float:
        return 2 * self.value

    def to_json(self) -> dict:
        return {
            "surface": self.surface,
            "tau": None if self.tau is None else [complex(self.tau).real, complex(self.tau).imag],
            "p": self.p,
            "value": self.value,
            "method": self.method,
            "error": self.error,
        }


# --------------------------------------------------------------------------
# generic Mellin route


def zeta_prime_at_zero(model: SpectralModel, prec: int = 30, T: float | None = None, t_min: float | None = None):
    """``(zeta'(0), error)`` by splitting the Mellin integral of the heat trace at ``T``.

    ``Gamma(s) zeta(s) = int_0^T t^{s-1}(theta - sum c t^alpha) dt + sum c T^(s+alpha)/(s+alpha)
    + sum m lambda^-s Gamma(s, lambda T)``; at ``s = 0`` the finite part equals
    ``zeta'(0) - gamma zeta(0)``.  The small-time integral is evaluated in double
    precision by Gauss-Legendre in ``log t``; ``prec`` only bounds the reported
    floor of the error.  The error estimate compares two split points.
    """
    if T is None:
        T = 2.0 / model.scale
    vals = [_mellin(model, TT, t_min) for TT in (T, 0.7 * T)]
    floor = max(10.0 ** (-prec), 1e-14) * (1 + abs(vals[0]))
    return vals[0], abs(vals[0] - vals[1]) + floor


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def _spectrum(model: SpectralModel, cutoff: float):
    pairs = list(model.levels(cutoff))
    if not pairs:
        return np.zeros(0), np.zeros(0)
    ev, mult = zip(*pairs)
    return np.asarray(ev, dtype=float), np.asarray(mult, dtype=float)


def _mellin(model: SpectralModel, T: float, t_min):
    if t_min is None:
        if model.remainder is None:
            # the omitted part decays like exp(-const / (scale t))
            t_min = T / 100
        else:
            # first omitted term is O(t^r); keep its integral below 1e-16
            t_min = min(T / 40, T * 10.0 ** (-16.0 / model.remainder))
    terms = model.heat_terms
    edges = [t_min]
    while edges[-1] * 3 < T:
        edges.append(edges[-1] * 3)
    edges.append(T)
    le = np.log(edges)
    u = np.concatenate([(lo + hi) / 2 + (hi - lo) / 2 * _GL_NODES for lo, hi in zip(le[:-1], le[1:])])
    w = np.concatenate([(hi - lo) / 2 * _GL_WEIGHTS for lo, hi in zip(le[:-1], le[1:])])
    t = np.exp(u)
    ev, mult = _spectrum(model, 40.0 / t_min)
    theta = np.empty_like(t)
    for k, tk in enumerate(t):
        sel = ev * tk <= 40.0
        theta[k] = math.fsum(mult[sel] * np.exp(-ev[sel] * tk))
    expansion = sum(c * t**a for a, c in terms)
    small = float(np.dot(w, theta - expansion))
    analytic = 0.0
    for a, c in terms:
        analytic += c * math.log(T) if a == 0 else c * T**a / a
    sel = ev * T <= 40.0
    tail = math.fsum(mult[sel] * special.exp1(ev[sel] * T))
    zeta0 = sum(c for a, c in terms if a == 0)
    return small + analytic + tail + float(np.euler_gamma) * zeta0


# --------------------------------------------------------------------------
# models


def _sphere_heat_terms(c: float, n_terms: int = 14):
    """Small-t expansion of ``sum_{k>=1} (2k+1) exp(-c k(k+1) t)``.

    With ``u = c t``: ``e^{u/4} (1/u - 2 sum_n B_{2n+2}(1/2) (-u)^n / ((2n+2) n!)) - 1``.
    """
    with mp.workdps(40):
        series = {-1: mp.mpf(1)}
        for n in range(n_terms + 2):
            b = mp.bernpoly(2 * n + 2, mp.mpf(1) / 2)
            series[n] = series.get(n, 0) - 2 * b * (-1) ** n / ((2 * n + 2) * mp.factorial(n))
        out = {}
        for k, v in series.items():
            for m in range(n_terms + 3):
                e = k + m
                if e > n_terms:
                    break
                out[e] = out.get(e, 0) + v * (mp.mpf(1) / 4) ** m / mp.factorial(m)
        out[0] -= 1
        return tuple((e, float(out[e]) * c**e) for e in sorted(out) if e <= n_terms), n_terms + 1


def sphere_model(scale: float = 2 * math.pi) -> SpectralModel:
    """Round sphere functions: eigenvalues ``scale k(k+1)``, multiplicity ``2k+1``."""

    def levels(cutoff, c=scale):
        k = 1
        while c * k * (k + 1) <= cutoff:
            yield c * k * (k + 1), 2 * k + 1
            k += 1

    terms, rem = _sphere_heat_terms(scale)
    return SpectralModel("sphere", levels, terms, rem, scale, -2.0 / 3.0)


def flat_torus_model(tau, scale: float | None = None) -> SpectralModel:
    """Flat torus functions: eigenvalues ``scale |m + n tau|^2``, default ``scale = 2pi^2/y``."""
    tau = complex(tau)
    y = tau.imag
    c = 2 * math.pi**2 / y if scale is None else scale

    def levels(cutoff, c=c, tau=tau):
        r2 = cutoff / c
        nmax = int(math.sqrt(r2) / tau.imag) + 2
        out = []
        for n in range(-nmax, nmax + 1):
            # |m + n tau|^2 = (m + n x)^2 + (n y)^2
            rest = r2 - (n * tau.imag) ** 2
            if rest < 0:
                continue
            w = math.sqrt(rest)
            for m in range(math.floor(-n * tau.real - w) - 1, math.ceil(-n * tau.real + w) + 2):
                if m == 0 and n == 0:
                    continue
                v = abs(m + n * tau) ** 2
                if v <= r2:
                    out.append(c * v)
        out.sort()
        for v in out:
            yield v, 1

    # sum over the full lattice = (pi / (c y)) / t + exponentially small; minus the zero mode
    lead = math.pi / (c * y)
    return SpectralModel("torus", levels, ((-1, lead), (0, -1.0)), None, c, -1.0)


def landau_model(p: int, scale: float | None = None) -> SpectralModel:
    """Landau levels on ``L^p``: ``B k`` for ``k >= 1`` with multiplicity ``p``, ``B = 2 pi p``."""
    B = 2 * math.pi * p if scale is None else scale

    def levels(cutoff, B=B, p=p):
        k = 1
        while B * k <= cutoff:
            yield B * k, p
            k += 1

    # p / (e^{Bt} - 1) = (p / Bt) sum_n B_n (Bt)^n / n!
    terms = []
    for n in range(0, 16):
        bn = float(mp.bernoulli(n))
        if bn == 0:
            continue
        terms.append((n - 1, p * bn * B ** (n - 1) / math.factorial(n)))
    return SpectralModel(f"landau[p={p}]", levels, tuple(terms), 15, B, -p / 2)


def squares_model() -> SpectralModel:
    """``{n^2}_{n >= 1}``: ``zeta(s) = zeta_R(2s)``, ``zeta'(0) = -log 2pi``."""

    def levels(cutoff):
        n = 1
        while n * n <= cutoff:
            yield float(n * n), 1
            n += 1

    return SpectralModel("squares", levels, ((-0.5, math.sqrt(math.pi) / 2), (0, -0.5)), None, 1.0, -0.5)


# --------------------------------------------------------------------------
# closed forms


def dedekind_eta(tau, dps: int = 30):
    """``eta(tau) = q^{1/24} prod (1 - q^n)`` with ``q = e^{2 pi i tau}``."""
    with mp.workdps(dps + 10):
        tau = mp.mpc(complex(tau))
        q = mp.exp(2j * mp.pi * tau)
        return +(mp.exp(2j * mp.pi * tau / 24) * mp.qp(q))


def _sphere_zeta_prime_hurwitz(scale: float, dps: int = 30):
    """``zeta'(0)`` for ``scale k(k+1)`` via ``k(k+1) = (k+1/2)^2 - 1/4`` and Hurwitz zeta."""
    with mp.workdps(dps + 10):
        a = mp.mpf(3) / 2
        base = 4 * mp.zeta(-1, a, 1) - mp.digamma(a) / 2
        base += 2 * mp.nsum(lambda j: mp.mpf(4) ** (-j) * mp.zeta(2 * j - 1, a) / j, [2, mp.inf])
        z0 = 2 * mp.zeta(-1, a) + mp.mpf(1) / 4
        return +(base - mp.log(scale) * z0), +z0


def _torus_zeta_prime_kronecker(tau, scale: float | None = None, dps: int = 30):
    """``zeta'(0) = -log(4 pi^2 y |eta|^4) + log(c)`` for eigenvalues ``c y |m+n tau|^2 / y``.

    With ``Z(s) = sum' (y / |m + n tau|^2)^s`` the Kronecker limit formula gives
    ``Z(0) = -1`` and ``Z'(0) = -log(4 pi^2 y |eta(tau)|^4)``; eigenvalues
    ``c |m+n tau|^2 = (c y) (|m+n tau|^2 / y)`` shift by ``-Z(0) log(c y)``.
    """
    with mp.workdps(dps + 10):
        tau = mp.mpc(complex(tau))
        y = tau.imag
        c = 2 * mp.pi**2 / y if scale is None else mp.mpf(scale)
        eta = dedekind_eta(tau, dps)
        zp = -mp.log(4 * mp.pi**2 * y * abs(eta) ** 4)
        return +(zp + mp.log(c * y))


def torsion_trivial_E(scenario: SurfaceScenario, prec: int = 30) -> TorsionValue:
    """Torsion of the trivial bundle for the round sphere or the flat torus."""
    if not scenario.prequantized:
        raise ValueError("torsion is available for unperturbed metrics only")
    if scenario.genus == 0:
        model = sphere_model()
        closed, _ = _sphere_zeta_prime_hurwitz(model.scale, prec)
        label, tau = "sphere", None
        method = "hurwitz"
    else:
        model = flat_torus_model(scenario.tau)
        closed = _torus_zeta_prime_kronecker(scenario.tau, None, prec)
        label, tau = "torus", scenario.tau
        method = "kronecker"
    mellin, merr = zeta_prime_at_zero(model, prec)
    gap = abs(float(closed - mellin))
    err = max(gap, float(merr)) / 2
    return TorsionValue(
        label,
        float(closed) / 2,
        method,
        err,
        tau,
        0,
        {method: float(closed) / 2, "mellin": float(mellin) / 2},
    )


def torsion_Lp_flat_torus(tau, p: int, prec: int = 30, check: bool = False) -> TorsionValue:
    """Torsion of ``L^p`` on the flat prequantised torus from the Landau spectrum.

    ``zeta_p(s) = p (2 pi p)^{-s} zeta_R(s)`` so ``2 tau_p = p (zeta_R'(0) - log(2 pi p) zeta_R(0))
    = (p/2) log p``; ``check=True`` adds the Mellin route.
    """
    if p < 1:
        raise ValueError("p must be positive")
    ctx = PrecisionCtx(dps=max(prec, 20))
    with ctx.workdps():
        z0 = riemann_zeta(0, 0, ctx)
        z1 = riemann_zeta(0, 1, ctx)
        two_tau = p * (z1 - mp.log(2 * mp.pi * p) * z0)
    routes = {"riemann": float(two_tau) / 2}
    err = float(mp.mpf(10) ** (-prec + 5)) * p
    if check:
        m, merr = zeta_prime_at_zero(landau_model(p), prec)
        routes["mellin"] = float(m) / 2
        err = max(err, abs(float(m - two_tau)) / 2, float(merr) / 2)
    return TorsionValue("torus", float(two_tau) / 2, "landau", err, tau, p, routes)


def landau_lattice_levels(p: int, n_grid: int = 30, n_levels: int = 3):
    """Lowest eigenvalues of a magnetic lattice Laplacian with ``p`` flux quanta.

    Square torus of area one, ``n_grid^2`` sites, Peierls phases for the
    Landau gauge ``A = (0, 2 pi p x)``.  The continuum Bochner Laplacian has
    levels ``(2k+1) 2 pi p``, related to the Kodaira Laplacian by
    ``2 box = nabla^* nabla - 2 pi p``, so ``box`` has levels ``2 pi p k``.
    Returns the ``n_levels * p`` smallest eigenvalues of ``(nabla^* nabla - E_0)/2``
    and the raw lowest eigenvalue.
    """
    N = n_grid
    h = 1.0 / N
    B = 2 * math.pi * p
    H = np.zeros((N * N, N * N), dtype=complex)

    def idx(i, j):
        return (i % N) * N + (j % N)

    for i in range(N):
        for j in range(N):
            a = idx(i, j)
            H[a, a] += 4.0 / h**2
            # x-hop (i -> i+1): the gauge jump at the seam keeps flux quantised
            ph = np.exp(-1j * B * (j * h)) if i == N - 1 else 1.0
            b = idx(i + 1, j)
            H[a, b] -= ph / h**2
            H[b, a] -= np.conj(ph) / h**2
            # y-hop (j -> j+1) carries the Peierls phase of A_y = B x
            ph = np.exp(1j * B * (i * h) * h)
            b = idx(i, j + 1)
            H[a, b] -= ph / h**2
            H[b, a] -= np.conj(ph) / h**2
    ev = np.linalg.eigvalsh(H)[: n_levels * p]
    return (ev - ev[0] + 0.0) / 2, float(ev[0])


def landau_coeff_check(tau=1j, ps=None):
    """Fit ``2 tau_p = c1 p log p + d1 p + c0 log p + d0`` to exact torus values."""
    ps = list(ps or range(4, 65, 4))
    y = np.array([torsion_Lp_flat_torus(tau, p).two_tau for p in ps])
    P = np.array(ps, dtype=float)
    A = np.stack([P * np.log(P), P, np.log(P), np.ones_like(P)], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return dict(zip(("c1", "d1", "c0", "d0"), map(float, coef)))


def heat_area_constant(model: SpectralModel, t: float, kernel_dim: int = 1) -> float:
    """``t Tr exp(-t box)`` including the kernel; tends to ``area / 2 pi`` as ``t -> 0``.

    For the Kodaira Laplacian of a mass-one Kahler form this limit is
    ``rank / (2 pi)``, which fixes the absolute normalisation of the spectrum.
    """
    return t * (model.heat_trace(t) + kernel_dim)
