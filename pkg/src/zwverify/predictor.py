"""Closed-form expansion coefficients of ``log Z_p``.

For a line bundle ``L`` of degree one with canonical section ``s_D`` and a
trivial rank-one ``E`` the expansion reads

    log Z_p = a2 p^2 + (b1 log p + a1) p + (b0 log p + a0) + O(log p / p)

with

    a2 = (log|s_D^L|^2 + int c1(L) log|s_D|^2) / 2
    b1 = -1/2
    a1 = log|s_D^E|^2 + (log|s_D^L|^2 - log|ds_D|^2 - int r^L c1(L)) / 2
         + int c1(TX) log|s_D|^2 / 2
    b0 = -chi / 3
    a0 = log|s_0|^2 + 2 tau - K chi,     K = zeta'(-1) + log(2pi)/12 + 7/24

where ``a0`` is only available when ``c1(L, h) = omega``.  The Quillen-norm
polynomial collects the ``s``-independent quadratic part and
:func:`decompose_check` tests the exact finite-``p`` identity it belongs to
on the flat torus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath as mp
import numpy as np

from .geometry import SurfaceScenario, integrate, integrate_log_sD, quadrature
from .special import PrecisionCtx, zeta_deriv_minus1

__all__ = [
    "ExpansionCoefficients",
    "IntegralTerms",
    "integral_terms",
    "predict",
    "predict_a0_corollary",
    "h1_volume",
    "quillen_poly",
    "single_step",
    "decompose_check",
    "a0_constant",
]


@dataclass
class ExpansionCoefficients:
    """``a2, b1, a1, b0`` and optionally ``a0`` with per-coefficient errors."""

    a2: float
    b1: float
    a1: float
    b0: float
    a0: float | None = None
    provenance: str = "predicted"
    errors: dict = field(default_factory=dict)
    terms: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {"a2": self.a2, "b1": self.b1, "a1": self.a1, "b0": self.b0}
        if self.a0 is not None:
            out["a0"] = self.a0
        return out

    def to_json(self) -> dict:
        out = self.as_dict()
        out["provenance"] = self.provenance
        out["errors"] = dict(self.errors)
        out["terms"] = dict(self.terms)
        return out


def a0_constant() -> float:
    """``zeta'(-1) + log(2 pi)/12 + 7/24``."""
    ctx = PrecisionCtx(30)
    with ctx.workdps():
        return float(zeta_deriv_minus1(ctx) + mp.log(2 * mp.pi) / 12 + mp.mpf(7) / 24)


@dataclass(frozen=True)
class IntegralTerms:
    """The metric integrals entering the coefficients, each with an error."""

    int_c1L_log: float
    int_c1TX_log: float
    int_rL_c1L: float
    log_dsD: float
    errors: dict


@lru_cache(maxsize=64)
def integral_terms(s: SurfaceScenario, level: int = 2) -> IntegralTerms:
    IL, eL = integrate_log_sD(s, s.c1L_density, level)
    IT, eT = integrate_log_sD(s, s.c1TX_density, level)
    vals = []
    for lv in (level + 1, level + 2):
        g = quadrature(s, level=lv, degree=1)
        vals.append(float(integrate(g, s.rL(g.x1, g.x2) * s.c1L_density(g.x1, g.x2))))
    return IntegralTerms(IL, IT, vals[1], s.log_norm_dsD(), {"int_c1L_log": eL, "int_c1TX_log": eT, "int_rL_c1L": abs(vals[1] - vals[0])})


def _check_positive(s: SurfaceScenario) -> None:
    g = quadrature(s, level=2, degree=1)
    if np.min(s.c1L_density(g.x1, g.x2)) <= 0 or np.min(s.omega_density(g.x1, g.x2)) <= 0:
        raise ValueError("curvature of h^L must be positive")


def h1_volume(s: SurfaceScenario, route: str = "quadrature") -> float:
    """L^2 covolume of ``H^1(X, Z)`` in ``H^1(X, R)`` with ``dv = omega / 2pi``.

    ``route="quadrature"`` integrates the pointwise Gram matrix of the
    harmonic forms ``da, db`` (``z = a + tau b``) against ``dv``;
    ``route="dolbeault"`` uses their ``(0,1)`` parts ``tau w, -w`` with
    ``w = dzbar / 2iy`` and ``|alpha|^2 = 2 |alpha^{0,1}|^2``.
    The genus-zero value is the empty determinant ``1``.
    """
    if s.genus == 0:
        return 1.0
    if s.u:
        raise ValueError("harmonic forms are tabulated for the flat metric only")
    tau = complex(s.tau)
    y = tau.imag
    if route == "quadrature":
        g = quadrature(s, level=0, degree=1)
        mass = float(np.sum(g.dv))
        # inverse of g = |da + tau db|^2 / y on (da, db)
        point = np.array([[abs(tau) ** 2, -tau.real], [-tau.real, 1.0]]) / y
        gram = point * mass
    elif route == "dolbeault":
        mass = 1 / (2 * math.pi)
        w2 = 2 * y / (4 * y * y) * mass
        v = [tau, -1.0]
        gram = np.array([[2 * (v[i] * np.conj(v[j])).real * w2 for j in range(2)] for i in range(2)])
    else:
        raise ValueError(f"unknown route {route!r}")
    return float(math.sqrt(np.linalg.det(gram)))


def _log_s0_abs2(s: SurfaceScenario, route: str) -> float:
    """``log |s_0|^2``: the scalar times ``(deg L / 2pi) / vol``."""
    return math.log(abs(complex(s.s0)) ** 2) + math.log(1 / (2 * math.pi)) - math.log(h1_volume(s, route))


def predict(s: SurfaceScenario, with_a0: bool | None = None, level: int = 2) -> ExpansionCoefficients:
    """Evaluate every coefficient formula for the scenario."""
    _check_positive(s)
    chi = s.euler_characteristic
    it = integral_terms(s, level)
    lDL = s.log_norm_sDL()
    lDE = math.log(abs(complex(s.sDE)) ** 2)
    b1 = Fraction(-1, 2) * s.degree
    b0 = Fraction(-chi, 3)
    a2 = 0.5 * (lDL + it.int_c1L_log)
    a1 = lDE + 0.5 * (lDL - it.log_dsD - it.int_rL_c1L) + 0.5 * it.int_c1TX_log
    terms = {
        "log_sDL": lDL,
        "log_sDE": lDE,
        "int_c1L_log_sD": it.int_c1L_log,
        "int_td_log_sD": 0.5 * it.int_c1TX_log,
        "log_dsD": it.log_dsD,
        "int_rL_c1L": it.int_rL_c1L,
    }
    errors = {
        "a2": 0.5 * it.errors["int_c1L_log"],
        "a1": 0.5 * (it.errors["int_c1TX_log"] + it.errors["int_rL_c1L"]),
        "b1": 0.0,
        "b0": 0.0,
    }
    a0 = None
    if with_a0 is None:
        with_a0 = s.prequantized
    if with_a0:
        if not s.prequantized:
            raise ValueError("a0 needs c1(L, h) = omega")
        from .torsion import torsion_trivial_E

        tv = torsion_trivial_E(s)
        ls0 = _log_s0_abs2(s, "dolbeault")
        K = a0_constant()
        a0 = ls0 + 2 * tv.value - K * chi
        terms.update({"log_s0": ls0, "two_tau": 2 * tv.value, "chi_term": -K * chi})
        errors["a0"] = 2 * tv.error
    return ExpansionCoefficients(a2, float(b1), a1, float(b0), a0, "predicted", errors, terms)


def predict_a0_corollary(s: SurfaceScenario) -> float:
    """``log(1 / (2pi vol)) + 2 tau - K chi`` with the volume from quadrature."""
    if not s.prequantized:
        raise ValueError("the corollary needs c1(L, h) = omega")
    from .torsion import torsion_trivial_E

    vol = h1_volume(s, "quadrature")
    tv = torsion_trivial_E(s)
    return math.log(abs(complex(s.s0)) ** 2 / (2 * math.pi * vol)) + 2 * tv.value - a0_constant() * s.euler_characteristic


def quillen_poly(s: SurfaceScenario, p: int) -> float:
    """``(p^2/2) int c1(L) log|s_D|^2 + p (int Td log|s_D|^2 - log|ds_D|^2 / 2)``."""
    it = integral_terms(s)
    return 0.5 * p * p * it.int_c1L_log + p * (0.5 * it.int_c1TX_log - 0.5 * it.log_dsD)


def single_step(s: SurfaceScenario, i: int) -> float:
    """Increment from ``L^(i-1)`` to ``L^i``: ``(i - 1/2) int c1(L) log + int Td log - log|ds_D|^2 / 2``."""
    it = integral_terms(s)
    return (i - 0.5) * it.int_c1L_log + 0.5 * it.int_c1TX_log - 0.5 * it.log_dsD


def decompose_check(s: SurfaceScenario, p: int, ctx: PrecisionCtx | None = None) -> dict:
    """Residual of the exact identity relating ``log Z_p`` to its five ingredients.

    Only the flat prequantised torus has every term independently computable:
    ``log Z_p`` by the theta-frame transition, ``2 tau_p`` from Landau levels,
    ``2 tau`` from the Kronecker limit formula and the Quillen polynomial from
    the singular integrals.
    """
    if s.genus != 1 or not s.prequantized:
        raise ValueError("the decomposition check needs the flat prequantised torus")
    from .partition import log_partition
    from .torsion import torsion_Lp_flat_torus, torsion_trivial_E

    lz = log_partition(s, p, ctx)
    tp = torsion_Lp_flat_torus(s.tau, p)
    t0 = torsion_trivial_E(s)
    q = quillen_poly(s, p)
    ls0 = _log_s0_abs2(s, "dolbeault")
    lDL = s.log_norm_sDL()
    lDE = math.log(abs(complex(s.sDE)) ** 2)
    rhs = q - tp.two_tau + ls0 + t0.two_tau + 0.5 * (p * p + p) * lDL + p * lDE
    it = integral_terms(s)
    err = float(lz.est_error) + tp.error + t0.error + 0.5 * p * p * it.errors["int_c1L_log"] + 0.5 * p * it.errors["int_c1TX_log"]
    return {
        "p": p,
        "log_Z": float(lz.log_Z),
        "quillen": q,
        "two_tau_p": tp.two_tau,
        "log_s0": ls0,
        "two_tau": t0.two_tau,
        "residual": float(lz.log_Z) - rhs,
        "error": err,
    }
