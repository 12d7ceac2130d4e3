"""Gram matrices and the partition function ``Z_p = |s_p|^2_{L^2}``.

``log Z_p`` is computed as ``log|c|^2 + log det Gram(f)`` where ``f`` is an
explicit basis and ``c`` links its wedge to the canonical element.  Routes:

``closed_form`` (sphere, round metric)
    the monomials are orthogonal with Beta-function norms.
``quadrature``
    sphere Gram by Gauss-Legendre times trapezoid nodes; high precision with
    ``mpmath`` for the round metric, complex128 for perturbed metrics.
``direct`` (torus)
    Gram of the Weierstrass basis on a trapezoid grid in double precision.
``transition`` (torus)
    ``log det Gram(W) = log|det M|^2 + log det Gram(theta)`` with ``M`` from
    collocation at high precision and the theta Gram in closed form for the
    flat metric (quadrature otherwise).

Monte Carlo over ``N``-tuples of points gives an independent estimate of
``Z_p`` through the Slater-determinant formula ``det Gram = (1/N!) int |det|^2``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath as mp
import numpy as np

from .geometry import SurfaceScenario, quadrature
from .sections import (
    SectionBasis,
    basis_g0,
    basis_g1_theta,
    basis_g1_weierstrass,
    log_normalization,
    transition_matrix,
)
from .special import NumericalResolutionError, PrecisionCtx

__all__ = [
    "NumericalResolutionError",
    "GramMatrix",
    "PartitionValue",
    "gram",
    "logdet",
    "log_partition",
    "sphere_closed_form",
    "theta_gram_logdet_flat",
    "mc_partition_oracle",
    "write_csv",
    "CSV_COLUMNS",
]

CSV_COLUMNS = ["p", "N_p", "log_Z", "method", "precision_bits", "quad_nodes", "est_error"]

# Largest acceptable loss of significant digits in a Cholesky factorisation.
MAX_DIGIT_LOSS_DOUBLE = 11.0


@dataclass
class GramMatrix:
    """Hermitian Gram matrix with the log of the basis scalings already applied.

    ``matrix`` is the Gram of the scaled basis ``d_j f_j``;
    ``log det Gram(f) = log det matrix - sum log |d_j|^2``.  ``err`` bounds
    the entrywise error relative to ``sqrt(G_ii G_jj)``.
    """

    matrix: object
    log_scale: float
    err: float
    backend: str
    nodes: int
    precision_bits: int


@dataclass
class PartitionValue:
    p: int
    N_p: int
    log_Z: object
    method: str
    precision_bits: int
    quad_nodes: int
    est_error: float
    info: dict = field(default_factory=dict)

    def row(self) -> dict:
        return {
            "p": self.p,
            "N_p": self.N_p,
            "log_Z": mp.nstr(mp.mpf(self.log_Z), 30) if not isinstance(self.log_Z, float) else repr(self.log_Z),
            "method": self.method,
            "precision_bits": self.precision_bits,
            "quad_nodes": self.quad_nodes,
            "est_error": f"{self.est_error:.3e}",
        }


# --------------------------------------------------------------------------
# quadrature nodes at high precision


@lru_cache(maxsize=64)
def _gauss_legendre_mp(n: int, dps: int):
    """Gauss-Legendre nodes and weights on ``[-1, 1]`` by Newton iteration."""
    with mp.workdps(dps):
        xs, ws = [], []
        for i in range(1, n + 1):
            x = mp.cos(mp.pi * (i - mp.mpf(1) / 4) / (n + mp.mpf(1) / 2))
            for _ in range(100):
                p0, p1 = mp.mpf(1), x
                for k in range(2, n + 1):
                    p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
                dp = n * (x * p1 - p0) / (x * x - 1)
                dx = p1 / dp
                x -= dx
                if abs(dx) < mp.mpf(10) ** (-dps + 2):
                    break
            p0, p1 = mp.mpf(1), x
            for k in range(2, n + 1):
                p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
            dp = n * (x * p1 - p0) / (x * x - 1)
            xs.append(x)
            ws.append(2 / ((1 - x * x) * dp * dp))
        return tuple(xs), tuple(ws)


def _sphere_gram_mp(p: int, ctx: PrecisionCtx, extra: int = 0):
    """Round-sphere Gram of the binomially scaled monomials in ``mpmath``."""
    nt = (p + 2) // 2 + 4 + extra
    nphi = p + 4 + 2 * extra
    with ctx.workdps():
        xs, ws = _gauss_legendre_mp(nt, ctx.dps + 10)
        N = p + 1
        G = mp.matrix(N, N)
        binom = [mp.sqrt(mp.binomial(p, j)) for j in range(N)]
        phases = [mp.expj(2 * mp.pi * k / nphi) for k in range(nphi)]
        wphi = 2 * mp.pi / nphi / (8 * mp.pi**2)
        for t, wt in zip(xs, ws):
            cx = mp.sqrt((1 + t) / 2)
            sy = mp.sqrt((1 - t) / 2)
            mags = [binom[j] * cx ** (p - j) * sy**j for j in range(N)]
            for k in range(nphi):
                ph = phases[k]
                vals = [mags[j] * ph**j for j in range(N)]
                w = wt * wphi
                for a in range(N):
                    va = vals[a] * w
                    for b in range(a, N):
                        G[a, b] += va * mp.conj(vals[b])
        for a in range(N):
            for b in range(a):
                G[a, b] = mp.conj(G[b, a])
        log_scale = mp.fsum(mp.log(mp.binomial(p, j)) for j in range(N))
        return G, log_scale, nt * nphi


def gram(basis: SectionBasis, scenario: SurfaceScenario, ctx: PrecisionCtx | None = None, level: int = 0) -> GramMatrix:
    """Gram matrix ``<f_i, f_j>_{L^2}`` with a two-level error estimate."""
    p = basis.p
    use_mp = ctx is not None and ctx.dps > 16
    if use_mp:
        if basis.genus != 0 or not scenario.prequantized:
            raise ValueError("high-precision quadrature is implemented for the round sphere only")
        G1, ls, n1 = _sphere_gram_mp(p, ctx, extra=4 * level)
        G2, _, n2 = _sphere_gram_mp(p, ctx, extra=4 * level + 4)
        with ctx.workdps():
            diff = max(
                abs(G1[i, j] - G2[i, j]) / mp.sqrt(abs(G2[i, i] * G2[j, j])) for i in range(p + 1) for j in range(p + 1)
            )
            floor = mp.mpf(10) ** (-(ctx.dps - 5))
            err = float(max(diff, floor))
        return GramMatrix(G2, ls, err, "mpmath", n2, mp.mp.prec)
    mats = []
    for lv in (level, level + 1):
        g = quadrature(scenario, level=lv, degree=p)
        psi = scenario.psi_at(g.x1, g.x2) if scenario.psi else None
        V = basis.evaluate_weighted_np(g.x1, g.x2, psi)
        if basis.genus == 0:
            sc = np.sqrt([math.comb(p, j) for j in range(p + 1)])
            V = V * sc[:, None]
        G = (V * g.dv) @ V.conj().T
        mats.append((G, g.n))
    G1, G2 = mats[0][0], mats[1][0]
    if basis.genus == 0:
        ls = float(sum(math.log(math.comb(p, j)) for j in range(p + 1)))
    else:
        ls = 0.0
    dg = np.sqrt(np.abs(np.diag(G2)))
    err = float(np.max(np.abs(G1 - G2) / np.outer(dg, dg)))
    return GramMatrix(G2, ls, err, "numpy", mats[1][1], 53)


def logdet(G: GramMatrix, ctx: PrecisionCtx | None = None):
    """``(log det Gram(f), error estimate, condition number)`` via Cholesky.

    The matrix is first scaled to unit diagonal; the condition number of the
    scaled matrix bounds the loss of significant digits.
    """
    if G.backend == "mpmath":
        ctx = ctx or PrecisionCtx(dps=mp.prec_to_dps(G.precision_bits))
        with ctx.workdps():
            A = G.matrix
            n = A.rows
            d = [mp.sqrt(mp.re(A[i, i])) for i in range(n)]
            S = mp.matrix(n, n)
            for i in range(n):
                for j in range(n):
                    S[i, j] = A[i, j] / (d[i] * d[j])
            L = mp.cholesky(S)
            ld = 2 * mp.fsum(mp.log(mp.re(L[i, i])) for i in range(n)) + 2 * mp.fsum(mp.log(x) for x in d)
            Sinv = mp.inverse(S)
            cond = mp.mnorm(S, 1) * mp.mnorm(Sinv, 1)
            err = float(n * cond * G.err)
            if cond > mp.mpf(10) ** (ctx.dps - 10):
                raise NumericalResolutionError(f"Gram condition {mp.nstr(cond, 3)} exceeds the working precision")
            return ld - G.log_scale, err, float(cond)
    A = np.asarray(G.matrix)
    d = np.sqrt(np.real(np.diag(A)))
    S = A / np.outer(d, d)
    try:
        L = np.linalg.cholesky(S)
    except np.linalg.LinAlgError as exc:
        raise NumericalResolutionError("Gram matrix is not numerically positive definite") from exc
    cond = float(np.linalg.cond(S))
    if math.log10(cond) > MAX_DIGIT_LOSS_DOUBLE:
        raise NumericalResolutionError(f"Gram condition {cond:.2e} loses more than {MAX_DIGIT_LOSS_DOUBLE} digits")
    ld = 2 * float(np.sum(np.log(np.real(np.diag(L))))) + 2 * float(np.sum(np.log(d)))
    n = A.shape[0]
    err = n * cond * (G.err + 1e-16)
    return ld - G.log_scale, err, cond


# --------------------------------------------------------------------------


def sphere_closed_form(p: int, ctx: PrecisionCtx | None = None):
    """``sum_j log(B(j+1, p+1-j) / 2pi)`` for the round sphere."""
    ctx = ctx or PrecisionCtx.for_degree(p)
    with ctx.workdps():
        lg = mp.loggamma
        tot = mp.fsum(lg(j + 1) + lg(p + 1 - j) - lg(p + 2) for j in range(p + 1))
        return +(tot - (p + 1) * mp.log(2 * mp.pi))


def theta_gram_logdet_flat(p: int, tau) -> float:
    """``log det Gram(theta)`` for the flat metric: ``-p log 2pi - (p/2) log(2 p y)``."""
    y = complex(tau).imag
    return -p * math.log(2 * math.pi) - 0.5 * p * math.log(2 * p * y)


def _bits(ctx: PrecisionCtx) -> int:
    return int((ctx.dps + 10) * 3.3219280948873626)


def log_partition(
    scenario: SurfaceScenario,
    p: int,
    ctx: PrecisionCtx | None = None,
    route: str = "auto",
    seed: int = 0,
) -> PartitionValue:
    """``log Z_p(s_0, s_D^L, s_D^E)`` for the scenario."""
    if p < 0 or (scenario.genus == 1 and p < 1):
        raise ValueError("p out of range")
    N = scenario.N(p)
    if scenario.genus == 0:
        basis = basis_g0(p, scenario)
        if route == "auto":
            route = "closed_form" if scenario.prequantized else "quadrature"
        if route == "closed_form":
            if not scenario.prequantized:
                raise ValueError("closed form holds for the round metric only")
            ctx = ctx or PrecisionCtx.for_degree(p)
            with ctx.workdps():
                val = sphere_closed_form(p, ctx) + log_normalization(p, scenario)
            return PartitionValue(p, N, val, "closed_form", _bits(ctx), 0, float(mp.mpf(10) ** (-ctx.dps + 5)))
        if route == "quadrature":
            if scenario.prequantized and ctx is not None and ctx.dps > 16:
                G = gram(basis, scenario, ctx)
                with ctx.workdps():
                    ld, err, cond = logdet(G, ctx)
                    val = ld + log_normalization(p, scenario)
                return PartitionValue(p, N, val, "quadrature", G.precision_bits, G.nodes, err, {"cond": cond})
            G = gram(basis, scenario, None)
            ld, err, cond = logdet(G)
            return PartitionValue(p, N, ld + float(log_normalization(p, scenario)), "quadrature", 53, G.nodes, err, {"cond": cond})
        raise ValueError(f"unknown route {route!r} for genus 0")
    wb = basis_g1_weierstrass(p, scenario.tau, scenario)
    if route == "auto":
        route = "transition"
    if route == "direct":
        G = gram(wb, scenario, None)
        ld, err, cond = logdet(G)
        return PartitionValue(p, N, ld + float(log_normalization(p, scenario)), "direct", 53, G.nodes, err, {"cond": cond})
    if route == "transition":
        ctx = ctx or PrecisionCtx.for_degree(p)
        tb = basis_g1_theta(p, scenario.tau)
        tr = transition_matrix(wb, tb, ctx, seed=seed)
        if scenario.prequantized:
            lg = theta_gram_logdet_flat(p, scenario.tau)
            gerr = 0.0
            nodes = 0
        else:
            G = gram(tb, scenario, None)
            lg, gerr, _ = logdet(G)
            nodes = G.nodes
        with ctx.workdps():
            val = tr.log_abs2_det + lg + log_normalization(p, scenario)
            err = max(float(tr.residual) * N, gerr, float(mp.mpf(10) ** (-ctx.dps + 10)))
        return PartitionValue(p, N, val, "transition", _bits(ctx) if ctx.dps > 16 else 53, nodes, err, {"collocation_residual": tr.residual})
    raise ValueError(f"unknown route {route!r} for genus 1")


# --------------------------------------------------------------------------


def mc_partition_oracle(scenario: SurfaceScenario, p: int, n_samples: int = 10**6, seed: int = 0, chunk: int = 100_000):
    """Monte Carlo estimate ``(Z_p, standard error)`` of the partition function.

    Points are drawn from ``omega0``; the estimator averages
    ``|det f_j(z_i)|^2_h prod (dv/omega0)(z_i) / N!`` and adds the
    normalisation scalar of the canonical wedge.
    """
    N = scenario.N(p)
    rng = np.random.default_rng(seed)
    if scenario.genus == 0:
        basis = basis_g0(p, scenario)
    else:
        basis = basis_g1_weierstrass(p, scenario.tau, scenario)
    norm = math.exp(float(log_normalization(p, scenario)))
    s1 = 0.0
    s2 = 0.0
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        if scenario.genus == 0:
            x1 = rng.uniform(-1, 1, size=(m, N))
            x2 = rng.uniform(0, 2 * math.pi, size=(m, N))
        else:
            x1 = rng.random((m, N))
            x2 = rng.random((m, N))
        psi = scenario.psi_at(x1, x2) if scenario.psi else None
        V = basis.evaluate_weighted_np(x1, x2, psi)  # (N_f, m, N_pts)
        mats = np.moveaxis(V, 0, -1)  # (m, pts, functions)
        dets = np.abs(np.linalg.det(mats)) ** 2
        dens = np.prod(scenario.omega_density(x1, x2) / (2 * math.pi), axis=1)
        vals = dets * dens / math.factorial(N)
        s1 += float(np.sum(vals))
        s2 += float(np.sum(vals**2))
        done += m
    mean = s1 / n_samples
    var = max(s2 / n_samples - mean**2, 0.0)
    return mean * norm, math.sqrt(var / n_samples) * norm


def write_csv(values, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        w.writeheader()
        for v in values:
            w.writerow(v.row())
