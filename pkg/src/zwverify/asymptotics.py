"""Extraction of expansion coefficients from a sequence of ``log Z_p``.

The model is

    a2 p^2 + b1 p log p + a1 p + b0 log p + a0  [+ n1 log p / p + n2 / p]

Two extractors are provided.  :func:`fit` solves a weighted linear least
squares problem in extended precision, optionally with ``b1, b0`` pinned.
:func:`difference_extract` removes ``a1 p + a0`` exactly with second
differences, fits the remaining curvature terms and then recovers ``a1, a0``
from the detrended sequence.  Both are linear in the data, so their noise
amplification is computed exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath as mp
import numpy as np

from .predictor import ExpansionCoefficients

__all__ = [
    "FitModel",
    "FitResult",
    "FitError",
    "BASIS",
    "NUISANCE",
    "fit",
    "difference_extract",
    "pinned_values",
    "series_from",
]


class FitError(ValueError):
    """Rank deficiency or too few points for the requested model."""


BASIS = {
    "a2": lambda p: p * p,
    "b1": lambda p: p * mp.log(p),
    "a1": lambda p: p,
    "b0": lambda p: mp.log(p),
    "a0": lambda p: mp.mpf(1),
}
NUISANCE = {
    "n_logp_p": lambda p: mp.log(p) / p,
    "n_inv_p": lambda p: mp.mpf(1) / p,
}


@dataclass(frozen=True)
class FitModel:
    """Basis choice, pinned coefficients and weight policy.

    ``pinned`` maps coefficient names to exact values, for example
    ``{"b1": Fraction(-1, 2), "b0": Fraction(-2, 3)}``.  ``weights`` is
    ``"auto"`` (inverse squared errors unless they are uniform or all
    below ``1e-10``),
    ``"uniform"`` or ``"inverse"``.
    """

    nuisance: tuple = ("n_logp_p", "n_inv_p")
    pinned: tuple = ()
    weights: str = "auto"
    dps: int = 60

    def __post_init__(self):
        if isinstance(self.pinned, dict):
            object.__setattr__(self, "pinned", tuple(sorted(self.pinned.items())))
        for n in self.nuisance:
            if n not in NUISANCE:
                raise ValueError(f"unknown nuisance term {n!r}")
        for n, _ in self.pinned:
            if n not in BASIS:
                raise ValueError(f"cannot pin {n!r}")

    @property
    def names(self) -> list[str]:
        return list(BASIS) + list(self.nuisance)

    @property
    def free(self) -> list[str]:
        pinned = dict(self.pinned)
        return [n for n in self.names if n not in pinned]

    def column(self, name: str):
        return BASIS.get(name) or NUISANCE[name]

    def with_pins(self, **pins) -> "FitModel":
        return FitModel(self.nuisance, tuple(sorted({**dict(self.pinned), **pins}.items())), self.weights, self.dps)


def pinned_values(chi: int, degree: int = 1) -> dict:
    """Exact ``b1 = -deg/2`` and ``b0 = -chi/3`` for a trivial rank-one ``E``."""
    return {"b1": Fraction(-degree, 2), "b0": Fraction(-chi, 3)}


@dataclass
class FitResult:
    coefficients: ExpansionCoefficients
    values: dict
    sensitivity: dict
    residual: float
    condition: float
    protocol: str
    stability: dict = field(default_factory=dict)
    amplification: float | None = None
    budget_exceeded: bool = False
    p_range: tuple = ()

    def to_json(self) -> dict:
        return {
            "coefficients": {k: float(v) for k, v in self.values.items()},
            "sensitivity": {k: float(v) for k, v in self.sensitivity.items()},
            "residual": self.residual,
            "condition": self.condition,
            "protocol": self.protocol,
            "stability": {k: float(v) for k, v in self.stability.items()},
            "amplification": self.amplification,
            "budget_exceeded": self.budget_exceeded,
            "p_range": list(self.p_range),
        }


def series_from(points: Iterable, dps: int = 100) -> list[tuple]:
    """Normalise ``PartitionValue`` objects, CSV dicts or tuples to ``(p, value, err)``.

    Values are converted at ``dps`` digits so that high-precision input is
    not rounded to the ambient working precision.
    """
    with mp.workdps(dps):
        out = [_series_row(pt) for pt in points]
    out.sort(key=lambda r: r[0])
    return out


def _series_row(pt) -> tuple:
    if hasattr(pt, "log_Z"):
        return int(pt.p), mp.mpf(pt.log_Z), float(pt.est_error)
    if isinstance(pt, dict):
        return int(pt["p"]), mp.mpf(pt["log_Z"]), float(pt.get("est_error", 0.0) or 0.0)
    p, v, *rest = pt
    return int(p), mp.mpf(v), float(rest[0]) if rest else 0.0


AUTO_WEIGHT_FLOOR = 1e-10


def _weights(errs: Sequence[float], policy: str) -> list:
    errs = [max(e, 0.0) for e in errs]
    if policy == "uniform":
        return [mp.mpf(1)] * len(errs)
    positive = [e for e in errs if e > 0]
    if policy == "auto":
        # errors far below double precision say nothing about the truncation
        # of the model, which then dominates the residual
        if len(positive) < len(errs) or max(positive) <= 100 * min(positive) or max(positive) < AUTO_WEIGHT_FLOOR:
            return [mp.mpf(1)] * len(errs)
    if len(positive) < len(errs):
        raise FitError("inverse weights need positive error estimates")
    return [1 / mp.mpf(e) ** 2 for e in errs]


def _lstsq(A, y, w):
    """Weighted least squares ``(solution, pseudo-inverse, residual norm, condition)`` in mp."""
    m, n = A.rows, A.cols
    sw = [mp.sqrt(x) for x in w]
    # column scaling keeps the extended-precision QR well balanced
    scale = [mp.sqrt(mp.fsum((A[i, j] * sw[i]) ** 2 for i in range(m))) for j in range(n)]
    if any(s == 0 for s in scale):
        raise FitError("a basis column vanishes on the p-range")
    B = mp.matrix(m, n)
    for i in range(m):
        for j in range(n):
            B[i, j] = A[i, j] * sw[i] / scale[j]
    Q, R = mp.qr(B, mode="skinny")
    diag = [abs(R[j, j]) for j in range(n)]
    if min(diag) < mp.mpf(10) ** (-mp.mp.dps // 2) * max(diag):
        raise FitError("design matrix is rank deficient on the p-range")
    Rinv = mp.inverse(R)
    Pinv = Rinv * Q.T  # maps weighted data to scaled coefficients
    yw = mp.matrix([y[i] * sw[i] for i in range(m)])
    xs = Pinv * yw
    x = [xs[j] / scale[j] for j in range(n)]
    res = mp.sqrt(mp.fsum((mp.fsum(A[i, j] * x[j] for j in range(n)) - y[i]) ** 2 * w[i] for i in range(m)))
    sv = np.linalg.svd(np.array(B.tolist(), dtype=float), compute_uv=False)
    cond = float(sv[0] / sv[-1])
    # rows of the data-to-coefficient map in original units
    M = [[Pinv[j, i] * sw[i] / scale[j] for i in range(m)] for j in range(n)]
    return x, M, res, cond


def _design(model: FitModel, ps: Sequence[int], names: Sequence[str]):
    A = mp.matrix(len(ps), len(names))
    for i, p in enumerate(ps):
        pm = mp.mpf(p)
        for j, n in enumerate(names):
            A[i, j] = model.column(n)(pm)
    return A


def _coefficients(values: dict, sens: dict, protocol: str) -> ExpansionCoefficients:
    return ExpansionCoefficients(
        float(values["a2"]),
        float(values["b1"]),
        float(values["a1"]),
        float(values["b0"]),
        float(values["a0"]),
        "fitted",
        {k: float(v) for k, v in sens.items() if k in BASIS},
        {k: float(v) for k, v in values.items() if k not in BASIS},
    )


def fit(points, model: FitModel | None = None, stability: bool = True) -> FitResult:
    """Weighted least-squares fit of the expansion model.

    ``residual`` is the weighted residual norm; ``sensitivity`` holds
    ``sqrt(diag(cov))`` for the input error estimates; ``stability`` is the
    shift of every coefficient when the smallest quarter of the ``p`` values
    is dropped.
    """
    model = model or FitModel()
    series = series_from(points)
    free = model.free
    if len(series) < len(free) + 3:
        raise FitError(f"need at least {len(free) + 3} points for {len(free)} parameters")
    ps = [r[0] for r in series]
    if len(set(ps)) != len(ps):
        raise FitError("duplicate p values")
    pinned = dict(model.pinned)
    with mp.workdps(model.dps):
        y = []
        for p, v, _ in series:
            pm = mp.mpf(p)
            y.append(v - mp.fsum(mp.mpf(val.numerator) / val.denominator * model.column(n)(pm) if isinstance(val, Fraction) else mp.mpf(val) * model.column(n)(pm) for n, val in pinned.items()))
        errs = [r[2] for r in series]
        w = _weights(errs, model.weights)
        A = _design(model, ps, free)
        x, M, res, cond = _lstsq(A, y, w)
        values = {n: x[j] for j, n in enumerate(free)}
        for n, val in pinned.items():
            values[n] = mp.mpf(val.numerator) / val.denominator if isinstance(val, Fraction) else mp.mpf(val)
        sens = {n: mp.sqrt(mp.fsum((M[j][i] * errs[i]) ** 2 for i in range(len(ps)))) for j, n in enumerate(free)}
        for n in pinned:
            sens[n] = mp.mpf(0)
        budget = mp.sqrt(mp.fsum(mp.mpf(e) ** 2 for e in errs)) if model.weights != "inverse" else mp.sqrt(len(ps))
        exceeded = bool(res > 10 * budget) if budget > 0 else bool(res > 0)
        stab = {}
        if stability:
            cut = max(1, len(ps) // 4)
            if len(ps) - cut >= len(free) + 3:
                sub = fit([(p, v, e) for p, v, e in series[cut:]], model, stability=False)
                stab = {n: abs(mp.mpf(sub.values[n]) - values[n]) for n in free}
        amp = max(mp.fsum(abs(c) for c in row) for row in M)
    protocol = "pinned" if pinned else "free"
    return FitResult(
        _coefficients(values, sens, protocol),
        {n: float(v) for n, v in values.items()},
        {n: float(v) for n, v in sens.items()},
        float(res),
        cond,
        protocol,
        {n: float(v) for n, v in stab.items()},
        float(amp),
        exceeded,
        (ps[0], ps[-1]),
    )


def difference_extract(points, model: FitModel | None = None) -> FitResult:
    """Second-difference extractor for the same model.

    ``D2 f(p) = f(p+1) - 2 f(p) + f(p-1)`` annihilates ``a1 p + a0``; the
    differenced series is fitted for ``a2, b1, b0`` and the nuisance terms,
    after which ``a1, a0`` follow from a straight-line fit to the detrended
    values.  ``amplification`` bounds the coefficient change per unit
    sup-norm perturbation of the input.
    """
    model = model or FitModel()
    series = series_from(points)
    ps = [r[0] for r in series]
    if any(b - a != 1 for a, b in zip(ps, ps[1:])):
        raise FitError("second differences need consecutive p values")
    pinned = dict(model.pinned)
    curv = [n for n in model.names if n not in ("a1", "a0") and n not in pinned]
    if len(series) - 2 < len(curv) + 2:
        raise FitError("series too short for the differenced model")
    m = len(ps)
    with mp.workdps(model.dps):
        y = [r[1] for r in series]

        def pinned_part(p):
            pm = mp.mpf(p)
            return mp.fsum((mp.mpf(v.numerator) / v.denominator if isinstance(v, Fraction) else mp.mpf(v)) * model.column(n)(pm) for n, v in pinned.items())

        y = [v - pinned_part(p) for p, v in zip(ps, y)]
        inner = ps[1:-1]
        D = mp.matrix(m - 2, len(curv))
        for i, p in enumerate(inner):
            for j, n in enumerate(curv):
                f = model.column(n)
                D[i, j] = f(mp.mpf(p + 1)) - 2 * f(mp.mpf(p)) + f(mp.mpf(p - 1))
        d2 = [y[i + 2] - 2 * y[i + 1] + y[i] for i in range(m - 2)]
        ones = [mp.mpf(1)] * (m - 2)
        xc, Mc, _, cond1 = _lstsq(D, d2, ones)
        det = [y[i] - mp.fsum(xc[j] * model.column(n)(mp.mpf(ps[i])) for j, n in enumerate(curv)) for i in range(m)]
        L = mp.matrix(m, 2)
        for i, p in enumerate(ps):
            L[i, 0] = mp.mpf(p)
            L[i, 1] = mp.mpf(1)
        xl, Ml, _, cond2 = _lstsq(L, det, [mp.mpf(1)] * m)
        values = {n: xc[j] for j, n in enumerate(curv)}
        values["a1"], values["a0"] = xl
        for n, v in pinned.items():
            values[n] = mp.mpf(v.numerator) / v.denominator if isinstance(v, Fraction) else mp.mpf(v)
        # exact linear map y -> coefficients, for the amplification factor
        Dmap = [[mp.mpf(0)] * m for _ in range(m - 2)]
        for i in range(m - 2):
            Dmap[i][i], Dmap[i][i + 1], Dmap[i][i + 2] = 1, -2, 1
        Cc = [[mp.fsum(Mc[j][k] * Dmap[k][i] for k in range(m - 2)) for i in range(m)] for j in range(len(curv))]
        detmap = [[(1 if i == r else 0) - mp.fsum(Cc[j][i] * model.column(n)(mp.mpf(ps[r])) for j, n in enumerate(curv)) for i in range(m)] for r in range(m)]
        Cl = [[mp.fsum(Ml[j][r] * detmap[r][i] for r in range(m)) for i in range(m)] for j in range(2)]
        rows = Cc + Cl
        amp = max(mp.fsum(abs(c) for c in row) for row in rows)
        errs = [r[2] for r in series]
        names = curv + ["a1", "a0"]
        sens = {n: mp.sqrt(mp.fsum((rows[j][i] * errs[i]) ** 2 for i in range(m))) for j, n in enumerate(names)}
        for n in pinned:
            sens[n] = mp.mpf(0)
        fitted = [mp.fsum(values[n] * model.column(n)(mp.mpf(p)) for n in model.names) for p in ps]
        res = mp.sqrt(mp.fsum((f - r[1]) ** 2 for f, r in zip(fitted, series)))
    return FitResult(
        _coefficients(values, sens, "difference"),
        {n: float(v) for n, v in values.items()},
        {n: float(v) for n, v in sens.items()},
        float(res),
        max(cond1, cond2),
        "difference",
        {},
        float(amp),
        False,
        (ps[0], ps[-1]),
    )
