"""Theta functions, Weierstrass functions and zeta values.

Everything here comes in two flavours.  The scalar routines run in
``mpmath`` at a precision set by :class:`PrecisionCtx`.  The ``*_np``
routines are vectorised over numpy arrays in complex128 and are used for
quadrature grids and Monte Carlo sampling, where millions of evaluations
are needed and double precision is enough.

Conventions
-----------
The theta function with characteristics is

    theta[a, b](z | tau) = sum_n exp(i pi tau (n+a)^2 + 2 pi i (n+a)(z+b)),

and ``theta1 = theta[1/2, 1/2]`` is odd in ``z``.  The lattice is
``Z + tau Z`` and the Weierstrass functions are built from theta quotients:

    sigma(z) = theta1(z) / theta1'(0) * exp(eta1 z^2),   eta1 = zeta(1/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import mpmath as mp
import numpy as np

__all__ = [
    "NumericalResolutionError",
    "PrecisionCtx",
    "PrecisionError",
    "Modulus",
    "theta",
    "theta_derivs",
    "theta1_derivs_at_zero",
    "weierstrass_eta",
    "weierstrass_zeta",
    "weierstrass_sigma",
    "weierstrass_p",
    "weierstrass_p_derivs",
    "weierstrass_p_lattice",
    "weierstrass_p_ode_derivs",
    "eisenstein_g2_g3",
    "legendre_residual",
    "sigma_quasiperiod_residual",
    "riemann_zeta",
    "zeta_deriv_minus1",
    "zeta_deriv_minus1_glaisher",
    "theta_np",
    "theta1_np_derivs",
    "log_abs_sigma_weighted_np",
    "weierstrass_p_derivs_np",
    "self_test",
]

LN10 = math.log(10.0)


class NumericalResolutionError(ArithmeticError):
    """The requested accuracy cannot be reached at the working precision."""


class PrecisionError(ValueError):
    """Raised when the working precision cannot support the requested tolerance."""


@dataclass(frozen=True)
class PrecisionCtx:
    """Working precision and target tolerance.

    The invariant is that the working precision carries at least twice the
    number of digits implied by the tolerance, so that cancellation in
    Gram determinants and theta sums leaves a safe margin.
    """

    dps: int = 50
    tol: float | None = None

    def __post_init__(self):
        if self.dps < 10:
            raise PrecisionError(f"precision insufficient: {self.dps} digits is below the floor of 10")
        if self.tol is not None:
            if not self.tol > 0:
                raise PrecisionError("tolerance must be positive")
            need = 2 * self.tol_digits
            if self.dps < need:
                raise PrecisionError(
                    f"precision insufficient: tolerance {self.tol:g} needs {need} digits, have {self.dps}"
                )

    @property
    def tol_digits(self) -> int:
        if self.tol is None:
            return self.dps // 2
        return max(1, math.ceil(-math.log10(self.tol)))

    @property
    def eps(self) -> float:
        return 10.0 ** (-self.tol_digits) if self.tol is None else float(self.tol)

    @classmethod
    def for_degree(cls, p: int, digits: int | None = None) -> "PrecisionCtx":
        """Default policy: 30 + 2p digits unless overridden."""
        return cls(dps=int(digits) if digits else 30 + 2 * int(p))

    def workdps(self):
        return mp.workdps(self.dps + 10)


@dataclass(frozen=True)
class Modulus:
    """A point ``tau`` of the upper half plane."""

    tau: complex = field(default=1j)

    def __post_init__(self):
        if not complex(self.tau).imag > 0:
            raise ValueError(f"tau must lie in the upper half plane, got {self.tau!r}")

    @property
    def y(self) -> float:
        return complex(self.tau).imag

    def mp(self):
        return mp.mpc(complex(self.tau))


def _ctx(ctx):
    return ctx if ctx is not None else PrecisionCtx()


def _tau_mp(tau):
    if isinstance(tau, Modulus):
        tau = tau.tau
    t = tau if isinstance(tau, mp.mpc) else mp.mpc(tau)
    if not t.imag > 0:
        raise ValueError("tau must lie in the upper half plane")
    return t


# --------------------------------------------------------------------------
# theta functions (mpmath)


def _theta_range(a: float, y: float, imz: float, digits: int, nderiv: int):
    """Summation window around the dominant term, doubled for safety."""
    ustar = -imz / y
    budget = digits * LN10 + 10.0 + nderiv * math.log(2 * math.pi * (abs(ustar) + 10.0))
    half = math.ceil(math.sqrt(budget / (math.pi * y))) + 1
    half *= 2
    n0 = math.floor(ustar - a)
    return range(n0 - half, n0 + half + 2)


def theta_derivs(a, b, tau, z, nderiv: int = 0, ctx: PrecisionCtx | None = None):
    """Return ``[theta^(0)(z), ..., theta^(nderiv)(z)]`` for characteristics ``(a, b)``."""
    ctx = _ctx(ctx)
    with ctx.workdps():
        tau = _tau_mp(tau)
        z = mp.mpc(z)
        a = mp.mpf(a)
        b = mp.mpf(b)
        rng = _theta_range(float(a), float(tau.imag), float(z.imag), ctx.dps, nderiv)
        out = [mp.mpc(0)] * (nderiv + 1)
        ipt = mp.j * mp.pi * tau
        tpi = 2 * mp.j * mp.pi
        zb = z + b
        for n in rng:
            u = n + a
            term = mp.exp(ipt * u * u + tpi * u * zb)
            fac = tpi * u
            acc = term
            for k in range(nderiv + 1):
                out[k] += acc
                acc *= fac
        return [+v for v in out]


def theta(a, b, tau, z, ctx: PrecisionCtx | None = None, deriv: int = 0):
    """Theta function with characteristics, or its ``deriv``-th z-derivative."""
    return theta_derivs(a, b, tau, z, deriv, ctx)[deriv]


def theta1_derivs_at_zero(tau, ctx: PrecisionCtx | None = None):
    """``theta1'(0)`` and ``theta1'''(0)``."""
    d = theta_derivs(0.5, 0.5, tau, 0, 3, ctx)
    return d[1], d[3]


def weierstrass_eta(tau, ctx: PrecisionCtx | None = None):
    """Quasi-periods ``(eta1, eta2) = (zeta(1/2), zeta(tau/2))``.

    ``eta1`` comes from the cubic Taylor coefficient of ``theta1`` at the
    origin.  ``eta2`` is evaluated from the theta logarithmic derivative at
    ``tau/2`` rather than from the Legendre relation, so that the relation
    can serve as an independent check.
    """
    ctx = _ctx(ctx)
    with ctx.workdps():
        tau = _tau_mp(tau)
        t1, t3 = theta1_derivs_at_zero(tau, ctx)
        eta1 = -t3 / (6 * t1)
        eta2 = weierstrass_zeta(tau, tau / 2, ctx, _eta1=eta1)
        return +eta1, +eta2


def weierstrass_zeta(tau, z, ctx: PrecisionCtx | None = None, _eta1=None):
    ctx = _ctx(ctx)
    with ctx.workdps():
        tau = _tau_mp(tau)
        if _eta1 is None:
            t1, t3 = theta1_derivs_at_zero(tau, ctx)
            _eta1 = -t3 / (6 * t1)
        d = theta_derivs(0.5, 0.5, tau, z, 1, ctx)
        return d[1] / d[0] + 2 * _eta1 * mp.mpc(z)


def weierstrass_sigma(tau, z, ctx: PrecisionCtx | None = None):
    ctx = _ctx(ctx)
    with ctx.workdps():
        tau = _tau_mp(tau)
        z = mp.mpc(z)
        t1, t3 = theta1_derivs_at_zero(tau, ctx)
        eta1 = -t3 / (6 * t1)
        th = theta(0.5, 0.5, tau, z, ctx)
        return th / t1 * mp.exp(eta1 * z * z)


def _log_series(a: Sequence):
    """Taylor coefficients of ``log f`` (without the constant) from those of ``f``."""
    m_max = len(a) - 1
    b = [None] * (m_max + 1)
    b[0] = None
    a0 = a[0]
    for m in range(1, m_max + 1):
        acc = a[m]
        for k in range(1, m):
            acc = acc - (k * b[k] * a[m - k]) / m
        b[m] = acc / a0
    return b


def weierstrass_p_derivs(tau, z, kmax: int, ctx: PrecisionCtx | None = None, _eta1=None):
    """``[p(z), p'(z), ..., p^(kmax)(z)]`` via the Taylor series of ``log theta1``.

    With ``theta1(z+h) = sum a_m h^m`` the series of ``log theta1`` gives
    ``p(z+h) = -d^2/dh^2 log theta1(z+h) - 2 eta1``, hence every derivative at once.
    """
    ctx = _ctx(ctx)
    with ctx.workdps():
        tau = _tau_mp(tau)
        if _eta1 is None:
            t1, t3 = theta1_derivs_at_zero(tau, ctx)
            _eta1 = -t3 / (6 * t1)
        d = theta_derivs(0.5, 0.5, tau, z, kmax + 2, ctx)
        a = [d[m] / mp.factorial(m) for m in range(kmax + 3)]
        if a[0] == 0:
            raise ZeroDivisionError("z is a lattice point")
        b = _log_series(a)
        out = []
        for k in range(kmax + 1):
            val = -mp.factorial(k + 2) * b[k + 2]
            if k == 0:
                val -= 2 * _eta1
            out.append(+val)
        return out


def weierstrass_p(tau, z, ctx: PrecisionCtx | None = None, deriv: int = 0):
    return weierstrass_p_derivs(tau, z, deriv, ctx)[deriv]


def eisenstein_g2_g3(tau, ctx: PrecisionCtx | None = None):
    """Invariants ``g2 = 60 G4``, ``g3 = 140 G6`` of ``Z + tau Z`` from q-series."""
    ctx = _ctx(ctx)
    with ctx.workdps():
        tau = _tau_mp(tau)
        q = mp.exp(2j * mp.pi * tau)
        nmax = int(ctx.dps * LN10 / (2 * math.pi * float(tau.imag))) + 5
        e4 = mp.mpc(1)
        e6 = mp.mpc(1)
        qn = mp.mpc(1)
        for n in range(1, nmax + 1):
            qn *= q
            s3 = sum(d**3 for d in range(1, n + 1) if n % d == 0)
            s5 = sum(d**5 for d in range(1, n + 1) if n % d == 0)
            e4 += 240 * s3 * qn
            e6 -= 504 * s5 * qn
        g4 = mp.pi**4 / 45 * e4
        g6 = 2 * mp.pi**6 / 945 * e6
        return +(60 * g4), +(140 * g6)


def weierstrass_p_ode_derivs(tau, z, kmax: int, ctx: PrecisionCtx | None = None):
    """Derivatives of ``p`` from ``p'' = 6 p^2 - g2/2`` and its Leibniz iterates.

    Uses only ``p`` and ``p'`` from theta quotients; independent of the
    log-series route beyond those two values.
    """
    ctx = _ctx(ctx)
    with ctx.workdps():
        g2, _ = eisenstein_g2_g3(tau, ctx)
        base = weierstrass_p_derivs(tau, z, 1, ctx)
        d = list(base)
        while len(d) <= kmax:
            n = len(d) - 2
            acc = 6 * mp.fsum(mp.binomial(n, i) * d[i] * d[n - i] for i in range(n + 1))
            if n == 0:
                acc -= g2 / 2
            d.append(acc)
        return d[: kmax + 1]


def weierstrass_p_lattice(tau, z, deriv: int = 0, radius: int = 60):
    """Direct lattice sum for ``p^(k)``, ``k >= 1`` only (absolutely convergent).

    A low-precision oracle for the theta-quotient evaluation.
    """
    if deriv < 1:
        raise ValueError("the lattice sum converges absolutely only for derivatives")
    tau = complex(tau)
    z = complex(z)
    m, n = np.meshgrid(np.arange(-radius, radius + 1), np.arange(-radius, radius + 1))
    w = z - (m + n * tau).astype(complex)
    k = deriv
    coef = (-1) ** k * math.factorial(k + 1)
    return complex(coef * np.sum(w ** (-(k + 2))))


def legendre_residual(tau, ctx: PrecisionCtx | None = None):
    """``|eta1 tau - eta2 - i pi|``."""
    ctx = _ctx(ctx)
    with ctx.workdps():
        tau = _tau_mp(tau)
        e1, e2 = weierstrass_eta(tau, ctx)
        return abs(e1 * tau - e2 - mp.j * mp.pi)


def sigma_quasiperiod_residual(tau, z, ctx: PrecisionCtx | None = None):
    """Relative residual of ``sigma(z + w) = -exp(2 eta_w (z + w/2)) sigma(z)``.

    Checked for both periods ``w = 1`` and ``w = tau`` with ``eta_w = zeta(w/2)``.
    """
    ctx = _ctx(ctx)
    with ctx.workdps():
        tau = _tau_mp(tau)
        z = mp.mpc(z)
        e1, e2 = weierstrass_eta(tau, ctx)
        s = weierstrass_sigma(tau, z, ctx)
        res = mp.mpf(0)
        for w, eta in ((mp.mpc(1), e1), (tau, e2)):
            lhs = weierstrass_sigma(tau, z + w, ctx)
            rhs = -mp.exp(2 * eta * (z + w / 2)) * s
            res = max(res, abs(lhs - rhs) / max(abs(lhs), abs(rhs)))
        return res


# --------------------------------------------------------------------------
# Riemann zeta


def riemann_zeta(s, derivative: int = 0, ctx: PrecisionCtx | None = None):
    """Riemann zeta (``derivative`` 0 or 1) by Euler-Maclaurin summation.

    The head ``sum_{n<N}`` is exact; the tail uses the integral, the
    half-endpoint term and Bernoulli corrections, with ``N`` and the
    number of corrections chosen from the requested precision.
    """
    if derivative not in (0, 1):
        raise ValueError("derivative must be 0 or 1")
    ctx = _ctx(ctx)
    with ctx.workdps():
        s = mp.mpf(s) if not isinstance(s, mp.mpc) else s
        if s == 1:
            raise ValueError("pole at s = 1")
        digits = ctx.dps + 10
        N = max(20, int(digits * 1.2) + int(abs(s)))
        M = N  # number of Bernoulli corrections, |B_2k/(2k)!| ~ (2 pi)^(-2k)
        lnN = mp.log(N)
        Ns = mp.power(N, -s)
        if derivative == 0:
            head = mp.fsum(mp.power(n, -s) for n in range(1, N))
            tail = N * Ns / (s - 1) + Ns / 2
            # d^(2k-1)/dx^(2k-1) x^{-s} = -(s)_{2k-1} x^{-s-2k+1}
            poch = s
            xpow = Ns / N
            corr = mp.mpf(0)
            for k in range(1, M + 1):
                term = mp.bernoulli(2 * k) / mp.factorial(2 * k) * poch * xpow
                corr += term
                if abs(term) < mp.mpf(10) ** (-digits) * (abs(head) + 1):
                    break
                poch *= (s + 2 * k - 1) * (s + 2 * k)
                xpow /= N * N
            return +(head + tail + corr)
        # derivative: d/ds of each piece
        head = -mp.fsum(mp.log(n) * mp.power(n, -s) for n in range(2, N))
        tail = N * Ns * (-lnN / (s - 1) - 1 / (s - 1) ** 2) - lnN * Ns / 2
        # term_k(s) = B/(2k)! * (s)_{2k-1} * N^{-s-2k+1}
        corr = mp.mpf(0)
        for k in range(1, M + 1):
            factors = [s + i for i in range(2 * k - 1)]
            poch = mp.fprod(factors)
            dpoch = poch * mp.fsum(1 / f for f in factors) if all(f != 0 for f in factors) else mp.diff(
                lambda x: mp.fprod(x + i for i in range(2 * k - 1)), s
            )
            xpow = mp.power(N, -s - 2 * k + 1)
            c = mp.bernoulli(2 * k) / mp.factorial(2 * k)
            term = c * (dpoch * xpow - poch * xpow * lnN)
            corr += term
            if abs(term) < mp.mpf(10) ** (-digits) * (abs(head) + 1) and k > 2:
                break
        return +(head + tail + corr)


def zeta_deriv_minus1(ctx: PrecisionCtx | None = None):
    """``zeta'(-1)`` from the functional equation.

    ``zeta'(-1) = zeta'(2) / (2 pi^2) - (log 2 pi - 1 + gamma) / 12`` with
    ``zeta'(2)`` from Euler-Maclaurin summation.
    """
    ctx = _ctx(ctx)
    with ctx.workdps():
        dz2 = riemann_zeta(2, 1, ctx)
        return +(dz2 / (2 * mp.pi**2) - (mp.log(2 * mp.pi) - 1 + mp.euler) / 12)


def zeta_deriv_minus1_glaisher(ctx: PrecisionCtx | None = None):
    """``zeta'(-1) = 1/12 - log A`` with ``log A`` from Euler-Maclaurin on ``x log x``."""
    ctx = _ctx(ctx)
    with ctx.workdps():
        digits = ctx.dps + 10
        N = max(20, int(digits * 1.2))
        lnN = mp.log(N)
        head = mp.fsum(k * mp.log(k) for k in range(2, N + 1))
        smooth = (mp.mpf(N) ** 2 / 2) * lnN - mp.mpf(N) ** 2 / 4 + N * lnN / 2 + (lnN + 1) / 12
        corr = mp.mpf(0)
        for j in range(2, N):
            term = -mp.bernoulli(2 * j) / ((2 * j) * (2 * j - 1) * (2 * j - 2)) * mp.power(N, 2 - 2 * j)
            corr += term
            if abs(term) < mp.mpf(10) ** (-digits):
                break
        C = head - smooth - corr
        return +(-C)


# --------------------------------------------------------------------------
# numpy versions


def theta_np(a, b, tau, z, nderiv: int = 0, digits: int = 17):
    """Vectorised theta with characteristics; returns shape ``(nderiv+1,) + z.shape``.

    The summation window covers the dominant terms for every ``Im z`` in the
    array, so arrays spanning several fundamental domains are fine but cost more.
    """
    z = np.asarray(z, dtype=complex)
    tau = complex(tau)
    y = tau.imag
    imz = z.imag if z.size else np.zeros(1)
    lo = _theta_range(a, y, float(np.max(imz)), digits, nderiv)
    hi = _theta_range(a, y, float(np.min(imz)), digits, nderiv)
    ns = np.arange(min(lo.start, hi.start), max(lo.stop, hi.stop))
    out = np.zeros((nderiv + 1,) + z.shape, dtype=complex)
    zb = z + b
    for n in ns:
        u = n + a
        term = np.exp(1j * np.pi * tau * u * u + 2j * np.pi * u * zb)
        fac = 2j * np.pi * u
        acc = term
        for k in range(nderiv + 1):
            out[k] += acc
            acc = acc * fac
    return out


def theta1_np_derivs(tau, z, nderiv: int = 0):
    return theta_np(0.5, 0.5, tau, z, nderiv)


def _eta1_float(tau) -> tuple[complex, complex]:
    d = theta_np(0.5, 0.5, tau, np.zeros(1), 3)[:, 0]
    return complex(-d[3] / (6 * d[1])), complex(d[1])


def log_abs_sigma_weighted_np(tau, a, b):
    """``log(|sigma(z)|^2 e^{-phi(z)})`` at ``z = a + tau b`` for the flat metric.

    Equals ``log|theta1(z)|^2 - 2 pi y b^2 - log|theta1'(0)|^2``, doubly periodic in
    ``(a, b)``.  This is ``log|s_D|^2`` on the flat prequantized torus.
    """
    tau = complex(tau)
    z = np.asarray(a) + tau * np.asarray(b)
    _, t1p = _eta1_float(tau)
    th = theta_np(0.5, 0.5, tau, z, 0)[0]
    return np.log(np.abs(th) ** 2) - 2 * np.pi * tau.imag * np.asarray(b) ** 2 - np.log(abs(t1p) ** 2)


def weierstrass_p_derivs_np(tau, z, kmax: int):
    """Vectorised ``p^(k)(z)``, ``k = 0..kmax``, by the log-theta series."""
    z = np.asarray(z, dtype=complex)
    eta1, _ = _eta1_float(tau)
    d = theta_np(0.5, 0.5, tau, z, kmax + 2)
    a = [d[m] / math.factorial(m) for m in range(kmax + 3)]
    b = _log_series(a)
    out = np.empty((kmax + 1,) + z.shape, dtype=complex)
    for k in range(kmax + 1):
        out[k] = -math.factorial(k + 2) * b[k + 2]
    out[0] -= 2 * eta1
    return out


# --------------------------------------------------------------------------


def self_test(ctx: PrecisionCtx | None = None, taus=(1j, 0.3 + 1.2j)) -> dict:
    """Run the identity checks and return ``{name: residual}``.

    Covers the Legendre relation, sigma quasi-periodicity, theta shift
    rules, the differential equation of p and the two independent routes to zeta'(-1).
    """
    ctx = ctx or PrecisionCtx(dps=64)
    out = {}
    with ctx.workdps():
        for tau in taus:
            tag = f"{complex(tau)}"
            out[f"legendre[{tag}]"] = float(legendre_residual(tau, ctx))
            out[f"sigma_quasiperiod[{tag}]"] = float(sigma_quasiperiod_residual(tau, mp.mpc(0.17, 0.23), ctx))
            t = _tau_mp(tau)
            z = mp.mpc(0.21, 0.13)
            a, b = mp.mpf(0.3), mp.mpf(0.1)
            base = theta(a, b, t, z, ctx)
            s1 = theta(a, b, t, z + 1, ctx)
            s2 = theta(a, b, t, z + t, ctx)
            r1 = abs(s1 - mp.expj(2 * mp.pi * a) * base) / abs(base)
            r2 = abs(s2 - mp.exp(-mp.j * mp.pi * t - 2 * mp.j * mp.pi * (z + b)) * base) / abs(base)
            out[f"theta_shift[{tag}]"] = float(max(r1, r2))
            P = weierstrass_p_derivs(t, mp.mpc(0.23, 0.31), 1, ctx)
            g2, g3 = eisenstein_g2_g3(t, ctx)
            out[f"p_ode[{tag}]"] = float(abs(P[1] ** 2 - (4 * P[0] ** 3 - g2 * P[0] - g3)) / abs(P[1]) ** 2)
        z1 = zeta_deriv_minus1(ctx)
        z2 = zeta_deriv_minus1_glaisher(ctx)
        out["zeta_deriv_minus1_routes"] = float(abs(z1 - z2))
        out["zeta_at_zero"] = float(abs(riemann_zeta(0, 0, ctx) + mp.mpf(1) / 2))
    return out
