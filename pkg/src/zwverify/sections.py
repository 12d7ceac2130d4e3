"""Explicit bases of holomorphic sections and Slater determinants.

Three bases are provided.

``monomial`` (genus 0)
    ``w^j``, ``j = 0..p`` in the affine chart ``w = y/x`` with frame ``x^p``.
    Their wedge is the canonical element up to the scalars of the scenario.
``weierstrass`` (genus 1)
    ``{1, p, -p'/2, ..., (-1)^p p^(p-2)/(p-1)!} sigma^p`` in the sigma
    trivialisation; again the canonical wedge.
``theta`` (genus 1)
    ``exp(p eta1 z^2) theta[1/2 + j/p, p/2](p z | p tau)``, ``j = 0..p-1``.
    Orthogonal for the flat metric, hence a well-conditioned frame; it is
    related to the canonical wedge by :func:`transition_matrix`.

Weighted evaluations (``*_weighted_np``) return values multiplied by the
pointwise norm of the frame, ``|F_j(z)|_h`` up to a phase common to all ``j``
at a given point, which is all that Gram matrices and ``|det|^2`` need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .geometry import SurfaceScenario
from .special import (
    NumericalResolutionError,
    PrecisionCtx,
    _eta1_float,
    theta,
    theta1_derivs_at_zero,
    theta_derivs,
    theta_np,
    weierstrass_p_derivs,
    weierstrass_p_derivs_np,
    weierstrass_sigma,
)

__all__ = [
    "SectionBasis",
    "SlaterValue",
    "basis_g0",
    "log_normalization",
    "basis_g1_weierstrass",
    "basis_g1_theta",
    "slater",
    "fay_residual",
    "theta_shift_residual",
    "ecxa_residual",
    "transition_matrix",
    "TransitionResult",
    "torus_c0_abs2",
    "random_torus_points",
]


def torus_c0_abs2(tau) -> float:
    """``|c_0|^2`` for ``s_1 = c_0 sigma`` on the torus with trivial ``E``.

    The connecting map sends the unit of ``L_D`` to the class of
    ``-(pi/y) dzbar`` in ``H^1(O)``, of L^2 norm squared ``pi/y``; the
    lattice generator of ``H^1(O)`` has L^2 volume ``1/2pi``.  The ratio is
    ``2 pi^2 / y``.
    """
    y = complex(tau).imag
    return 2 * math.pi**2 / y


@dataclass(frozen=True)
class SectionBasis:
    """Ordered sections ``f_1..f_N`` of ``L^p`` in a fixed trivialisation.

    ``normalization`` is the scalar ``c`` with ``s_p = c * (f_1 ^ ... ^ f_N)``;
    it is ``None`` for bases that are only computational frames.
    """

    p: int
    genus: int
    kind: str
    tau: complex = 1j
    trivialization: str = ""
    normalization: complex | None = 1.0

    @property
    def size(self) -> int:
        return self.p + 1 if self.genus == 0 else self.p

    # ---------------------------------------------------------------- mpmath
    def evaluate(self, points, ctx: PrecisionCtx | None = None):
        """Matrix ``A[i][j] = f_j(z_i)`` as an ``mpmath`` matrix."""
        ctx = ctx or PrecisionCtx.for_degree(self.p)
        n = len(points)
        with ctx.workdps():
            A = mp.matrix(n, self.size)
            if self.kind == "monomial":
                for i, w in enumerate(points):
                    w = mp.mpc(w)
                    acc = mp.mpc(1)
                    for j in range(self.size):
                        A[i, j] = acc
                        acc *= w
                return A
            tau = mp.mpc(complex(self.tau))
            t1, t3 = theta1_derivs_at_zero(tau, ctx)
            eta1 = -t3 / (6 * t1)
            p = self.p
            for i, z in enumerate(points):
                z = mp.mpc(z)
                if self.kind == "weierstrass":
                    sig = theta(0.5, 0.5, tau, z, ctx) / t1 * mp.exp(eta1 * z * z)
                    sp = sig**p
                    A[i, 0] = sp
                    if p >= 2:
                        der = weierstrass_p_derivs(tau, z, p - 2, ctx, _eta1=eta1)
                        for j in range(2, p + 1):
                            A[i, j - 1] = (-1) ** j * der[j - 2] / mp.factorial(j - 1) * sp
                elif self.kind == "theta":
                    g = mp.exp(p * eta1 * z * z)
                    for j in range(p):
                        A[i, j] = g * theta(mp.mpf(1) / 2 + mp.mpf(j) / p, mp.mpf(p) / 2, p * tau, p * z, ctx)
                else:  # pragma: no cover
                    raise ValueError(self.kind)
            return A

    # ----------------------------------------------------------------- numpy
    def evaluate_weighted_np(self, x1, x2, psi=None):
        """``(N, n)`` complex array of ``f_j`` times the frame norm at each point.

        ``psi`` (values of the metric perturbation) multiplies by ``e^(-p psi/2)``.
        Monomials are returned as ``x^(p-j) y^j`` in unit homogeneous
        coordinates, i.e. without binomial scaling.
        """
        p = self.p
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        if self.genus == 0:
            cx = np.sqrt(np.clip((1 + x1) / 2, 0, None))
            cy = np.sqrt(np.clip((1 - x1) / 2, 0, None)) * np.exp(1j * x2)
            out = np.empty((p + 1,) + x1.shape, dtype=complex)
            for j in range(p + 1):
                out[j] = cx ** (p - j) * cy**j
        else:
            tau = complex(self.tau)
            y = tau.imag
            z = x1 + tau * x2
            if self.kind == "weierstrass":
                _, t1p = _eta1_float(tau)
                th = theta_np(0.5, 0.5, tau, z, 0)[0]
                frame = (np.abs(th) * np.exp(-math.pi * y * x2**2) / abs(t1p)) ** p
                out = np.empty((p,) + x1.shape, dtype=complex)
                out[0] = frame
                if p >= 2:
                    der = weierstrass_p_derivs_np(tau, z, p - 2)
                    for j in range(2, p + 1):
                        out[j - 1] = (-1) ** j * der[j - 2] / math.factorial(j - 1) * frame
            else:
                out = np.empty((p,) + x1.shape, dtype=complex)
                damp = np.exp(-math.pi * p * y * x2**2)
                for j in range(p):
                    out[j] = theta_np(0.5 + j / p, p / 2, p * tau, p * z, 0)[0] * damp
        if psi is not None:
            out = out * np.exp(-p * np.asarray(psi) / 2)
        return out


def log_normalization(p: int, scenario: SurfaceScenario):
    """``log |c|^2`` for the normalisation scalar of the canonical basis, at the working precision.

    Equal to ``log |basis.normalization|^2`` but free of the double-precision
    rounding of the power ``sDL^(p(p+1)/2)``, which grows like ``p^2``.
    """
    s = scenario

    def la(c):
        return mp.log(abs(mp.mpc(complex(c))) ** 2)

    out = la(s.s0) + (p * (p + 1) // 2) * la(s.sDL) + p * la(s.sDE)
    if s.genus == 1:
        out += mp.log(2 * mp.pi**2 / mp.mpf(complex(s.tau).imag))
    return out


def basis_g0(p: int, scenario: SurfaceScenario | None = None) -> SectionBasis:
    if p < 0:
        raise ValueError("p must be nonnegative")
    s = scenario or SurfaceScenario(0)
    c = complex(s.s0) * complex(s.sDL) ** (p * (p + 1) // 2) * complex(s.sDE) ** p
    return SectionBasis(p, 0, "monomial", 1j, "frame x^p on the chart w = y/x", c)


def basis_g1_weierstrass(p: int, tau=None, scenario: SurfaceScenario | None = None) -> SectionBasis:
    if p < 1:
        raise ValueError("the Weierstrass basis needs p >= 1")
    s = scenario or SurfaceScenario(1, tau if tau is not None else 1j)
    tau = s.tau if tau is None else tau
    c0 = math.sqrt(torus_c0_abs2(tau))
    c = c0 * complex(s.s0) * complex(s.sDL) ** (p * (p + 1) // 2) * complex(s.sDE) ** p
    return SectionBasis(p, 1, "weierstrass", complex(tau), "sigma trivialisation", c)


def basis_g1_theta(p: int, tau) -> SectionBasis:
    if p < 1:
        raise ValueError("p must be positive")
    return SectionBasis(p, 1, "theta", complex(tau), "sigma trivialisation", None)


@dataclass(frozen=True)
class SlaterValue:
    """``det(f_j(z_i))`` with the log of the product of frame norms at the points."""

    value: object
    log_weight: float = 0.0

    def log_abs2(self) -> float:
        return float(2 * mp.log(abs(self.value))) + self.log_weight


def slater(basis: SectionBasis, points, ctx: PrecisionCtx | None = None) -> SlaterValue:
    """Slater determinant at ``N`` points (LU via ``mpmath.det``)."""
    if len(points) != basis.size:
        raise ValueError(f"need {basis.size} points, got {len(points)}")
    ctx = ctx or PrecisionCtx.for_degree(basis.p)
    with ctx.workdps():
        A = basis.evaluate(points, ctx)
        if basis.size <= 6:
            val = _perm_det(A)
        else:
            val = mp.det(A)
        if basis.genus == 0:
            logw = float(sum(-basis.p * mp.log(1 + abs(mp.mpc(w)) ** 2) for w in points))
        else:
            logw = 0.0
        return SlaterValue(+val, logw)


def _perm_det(A):
    from itertools import permutations

    n = A.rows
    total = mp.mpc(0)
    for perm in permutations(range(n)):
        sign = 1
        seen = list(perm)
        for i in range(n):
            for j in range(i + 1, n):
                if seen[i] > seen[j]:
                    sign = -sign
        term = mp.mpc(sign)
        for i in range(n):
            term *= A[i, perm[i]]
        total += term
    return total


def fay_residual(p: int, tau, points, ctx: PrecisionCtx | None = None):
    """Relative residual of ``det[F_j(z_i)] = sigma(sum z) prod_{i<j} sigma(z_i - z_j)``."""
    ctx = ctx or PrecisionCtx(dps=50)
    with ctx.workdps():
        lhs = slater(basis_g1_weierstrass(p, tau), points, ctx).value
        zs = [mp.mpc(z) for z in points]
        rhs = weierstrass_sigma(tau, mp.fsum(zs), ctx)
        for i in range(p):
            for j in range(i + 1, p):
                rhs *= weierstrass_sigma(tau, zs[i] - zs[j], ctx)
        scale = max(abs(lhs), abs(rhs))
        if scale == 0:
            return mp.mpf(0)
        return abs(lhs - rhs) / scale


def theta_shift_residual(p: int, tau, z, ctx: PrecisionCtx | None = None):
    """Residuals of the two half-period shift rules used for the translated model.

    ``theta1(z + p(1+tau)/2) e^(i pi p z) = (-1)^(p(p+1)/2) e^(-i pi tau p^2/4) theta[(p+1)/2,(p+1)/2](z)``
    and ``theta[(p+1)/2,(p+1)/2] = (-1)^(p-1) theta[(p-1)/2,(p-1)/2]``.
    """
    ctx = ctx or PrecisionCtx(dps=50)
    with ctx.workdps():
        tau = mp.mpc(complex(tau))
        z = mp.mpc(z)
        h = mp.mpf(p + 1) / 2
        l = mp.mpf(p - 1) / 2
        lhs = theta(0.5, 0.5, tau, z + p * (1 + tau) / 2, ctx) * mp.exp(mp.j * mp.pi * p * z)
        mid = theta(h, h, tau, z, ctx)
        rhs = (-1) ** (p * (p + 1) // 2) * mp.exp(-mp.j * mp.pi * tau * p * p / 4) * mid
        r1 = abs(lhs - rhs) / abs(lhs)
        r2 = abs(mid - (-1) ** (p - 1) * theta(l, l, tau, z, ctx)) / abs(mid)
        return max(r1, r2)


def ecxa_residual(p: int, tau, points, ctx: PrecisionCtx | None = None):
    """Residual of the translated sigma product against its theta expression.

    The sigma product ``sigma(sum w) prod sigma(w_i - w_j)`` is taken at
    ``w_j = z_j + (1+tau)/2`` and multiplied by
    ``prod_j exp(-p eta1 w_j^2 + i pi p w_j)``; the claim is equality with
    ``-i^p e^(i pi tau p^2/4) theta1'(0)^(-1-p(p-1)/2) theta[(p-1)/2,(p-1)/2](sum z) prod theta1(z_i - z_j)``.
    """
    ctx = ctx or PrecisionCtx(dps=50)
    with ctx.workdps():
        tau = mp.mpc(complex(tau))
        zs = [mp.mpc(z) for z in points]
        c = (1 + tau) / 2
        ws = [z + c for z in zs]
        t1, t3 = theta1_derivs_at_zero(tau, ctx)
        eta1 = -t3 / (6 * t1)
        lhs = weierstrass_sigma(tau, mp.fsum(ws), ctx)
        for i in range(p):
            for j in range(i + 1, p):
                lhs *= weierstrass_sigma(tau, ws[i] - ws[j], ctx)
        for w in ws:
            lhs *= mp.exp(-p * eta1 * w * w + mp.j * mp.pi * p * w)
        l = mp.mpf(p - 1) / 2
        rhs = -(mp.j**p) * mp.exp(mp.j * mp.pi * tau * p * p / 4) * t1 ** (-1 - mp.mpf((p - 1) * p) / 2)
        rhs *= theta(l, l, tau, mp.fsum(zs), ctx)
        for i in range(p):
            for j in range(i + 1, p):
                rhs *= theta(0.5, 0.5, tau, zs[i] - zs[j], ctx)
        return abs(lhs - rhs) / max(abs(lhs), abs(rhs))


def random_torus_points(n: int, tau, rng: np.random.Generator, min_sep: float = 0.05, lattice_gap: float = 1e-3):
    """``n`` points of the fundamental cell, pairwise and lattice separated."""
    tau = complex(tau)
    for _ in range(1000):
        ab = rng.random((n, 2))
        z = ab[:, 0] + tau * ab[:, 1]
        ok = True
        for i in range(n):
            if _lattice_dist(z[i], tau) < lattice_gap:
                ok = False
            for j in range(i):
                if _lattice_dist(z[i] - z[j], tau) < min_sep:
                    ok = False
        if ok:
            return [complex(v) for v in z]
        min_sep *= 0.9
    raise RuntimeError("could not place separated points")


def _lattice_dist(z: complex, tau: complex) -> float:
    b = round(z.imag / tau.imag)
    w = z - b * tau
    best = float("inf")
    for db in (-1, 0, 1):
        w2 = w - db * tau
        a = round(w2.real)
        for da in (-1, 0, 1):
            best = min(best, abs(w2 - a - da))
    return best


@dataclass(frozen=True)
class TransitionResult:
    """``b1 = M b2`` with ``log|det M|^2`` and a fresh-point residual."""

    M: object
    log_abs2_det: object
    residual: float
    nodes: tuple


def transition_matrix(
    b1: SectionBasis,
    b2: SectionBasis,
    ctx: PrecisionCtx | None = None,
    seed: int = 0,
    points=None,
    tries: int = 5,
) -> TransitionResult:
    """Collocation: ``A1 = M A2`` at ``N`` points, checked at ``N`` fresh points.

    The matrices hold ``A[i, j] = f_j(z_i)``; with ``F1 = M F2`` as column
    vectors of sections this reads ``A1^T = M A2^T``.
    """
    if b1.size != b2.size or b1.genus != b2.genus or b1.p != b2.p:
        raise ValueError("bases must have equal p and genus")
    ctx = ctx or PrecisionCtx.for_degree(b1.p)
    n = b1.size
    rng = np.random.default_rng(seed)
    with ctx.workdps():
        for attempt in range(tries):
            if points is not None and attempt == 0:
                pts = list(points)
            elif b1.genus == 1:
                pts = random_torus_points(n, b1.tau, rng, min_sep=0.5 / math.sqrt(n))
            else:
                pts = [complex(v) for v in np.exp(2j * math.pi * (np.arange(n) + rng.random()) / n)]
            A1 = b1.evaluate(pts, ctx)
            A2 = b2.evaluate(pts, ctx)
            try:
                d2 = mp.det(A2)
                if abs(d2) == 0:
                    raise ZeroDivisionError
                # M = A1^T (A2^T)^-1
                M = A1.T * mp.inverse(A2.T)
            except ZeroDivisionError:
                continue
            d1 = mp.det(A1)
            logdet = 2 * (mp.log(abs(d1)) - mp.log(abs(d2)))
            if b1.genus == 1:
                fresh = random_torus_points(n, b1.tau, rng, min_sep=0.5 / math.sqrt(n))
            else:
                fresh = [complex(v) for v in 0.7 * np.exp(2j * math.pi * (np.arange(n) + rng.random()) / n)]
            F1 = b1.evaluate(fresh, ctx)
            F2 = b2.evaluate(fresh, ctx)
            R = F1.T - M * F2.T
            res = mp.mnorm(R, 1) / mp.mnorm(F1, 1)
            cond = mp.mnorm(A2, 1) * mp.mnorm(mp.inverse(A2), 1)
            if cond > mp.mpf(10) ** (ctx.dps - 10):
                continue
            return TransitionResult(M, +logdet, float(res), tuple(pts))
    raise NumericalResolutionError("collocation matrix is numerically singular at every attempt")
