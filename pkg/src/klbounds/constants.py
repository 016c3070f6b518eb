"""Wallis-integral constants and the special functions shared by the bounds.

The prefactors of the recursive tail bound are built from the integrals

    c_m = int_0^1 (1 - x)^(m/2) / sqrt(x - x^2) dx = int_0^{pi/2} 2 cos^m(t) dt,

which satisfy c_0 = pi, c_1 = 2 and the two-step recursion
c_m = c_{m-2} * (m - 1) / m.  Their running products

    K_m = prod_{j=0}^{m} c_j          (K_{-1} = 1)
    H_m = prod_{j=0}^{m} h_j          (h_j = c_j except h_2 = c_1)

obey K_m <= sqrt(d0 / m) * (2 pi e / m)^(m/2) with d0 = e^3 / 2, and
H_m <= (c_1 / c_2) * K_m.  Two universal constants fall out:

    C0 = e^3 / (2 pi)                      ~ 3.1967
    C1 = (3 c_1 / c_2) * sqrt(d0/(2 pi e)) = 6 e / pi^(3/2) ~ 2.9290

K_m decays like (2 pi e / m)^(m/2), so every probability-scale quantity in
the rest of the package works with log K_m; the linear accessor underflows
to 0 for large m and is only meant for small indices.

The module also provides the log-gamma / log-binomial helpers and the
chi-square and normal CDFs used by the goodness-of-fit checks.  The
incomplete gamma uses the standard split: series expansion for
x < df/2 + 1, continued fraction otherwise.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

__all__ = [
    "C0",
    "C1",
    "D0",
    "ConstantsError",
    "UniversalConstants",
    "WallisTable",
    "UNIVERSAL",
    "chi2_cdf",
    "log_binomial",
    "log_factorial",
    "log_gamma",
    "log_wallis_H",
    "log_wallis_K",
    "log_wallis_K_array",
    "normal_cdf",
    "normal_ppf",
    "wallis_c",
    "wallis_c_array",
    "wallis_h",
    "wallis_table",
    "wallis_K",
    "wallis_H",
]


class ConstantsError(ValueError):
    """Raised for out-of-domain arguments to the constants layer."""


D0 = math.e**3 / 2.0
C0 = math.e**3 / (2.0 * math.pi)
C1 = 6.0 * math.e / math.pi**1.5


@dataclass(frozen=True, slots=True)
class UniversalConstants:
    """The universal prefactor constants, kept together for reporting."""

    C0: float
    C1: float
    d0: float


UNIVERSAL = UniversalConstants(C0=C0, C1=C1, d0=D0)


# ---------------------------------------------------------------------------
# Wallis table: lazily grown, thread safe, append only.
#
# Growth always runs through the same vectorised code path (cumulative
# products seeded with the previous cached value), so the cached doubles
# for a given index never depend on the growth history.
# ---------------------------------------------------------------------------


class _WallisCache:
    def __init__(self) -> None:
        self._lock = threading.Lock()
        c01 = np.array([math.pi, 2.0])
        self.c = c01
        self.logc = np.log(c01)
        # logK[m + 1] = log K_m for m >= -1; K_{-1} = 1.
        self.logK = np.concatenate([[0.0], np.cumsum(self.logc)])
        h01 = c01.copy()
        self.h = h01
        self.logH = np.concatenate([[0.0], np.cumsum(np.log(h01))])

    def ensure(self, m_max: int) -> None:
        if m_max < len(self.c):
            return
        with self._lock:
            hi = len(self.c) - 1
            if m_max <= hi:
                return
            # Even and odd chains extend independently:
            # c_m = c_{m-2} * (m - 1) / m.
            new_lo, new_hi = hi + 1, m_max
            c_new = np.empty(new_hi - new_lo + 1)
            for parity in (0, 1):
                start = new_lo if new_lo % 2 == parity else new_lo + 1
                if start > new_hi:
                    continue
                ms = np.arange(start, new_hi + 1, 2, dtype=np.float64)
                ratios = (ms - 1.0) / ms
                seed = self.c[start - 2]
                chain = np.cumprod(np.concatenate([[seed], ratios]))[1:]
                c_new[start - new_lo :: 2] = chain
            c = np.concatenate([self.c, c_new])
            logc = np.concatenate([self.logc, np.log(c_new)])
            logK = np.concatenate(
                [self.logK, self.logK[-1] + np.cumsum(np.log(c_new))]
            )
            h_new = c_new.copy()
            if new_lo <= 2 <= new_hi:
                h_new[2 - new_lo] = c[1]
            h = np.concatenate([self.h, h_new])
            logH = np.concatenate(
                [self.logH, self.logH[-1] + np.cumsum(np.log(h_new))]
            )
            self.c, self.logc, self.logK = c, logc, logK
            self.h, self.logH = h, logH


_WALLIS = _WallisCache()


def _check_index(m: int, lowest: int) -> int:
    if not isinstance(m, (int, np.integer)):
        raise ConstantsError(f"index must be an integer, got {m!r}")
    if m < lowest:
        raise ConstantsError(f"index must be >= {lowest}, got {m}")
    return int(m)


def wallis_c(m: int) -> float:
    """c_m from the two-step recursion; c_0 = pi, c_1 = 2."""
    m = _check_index(m, 0)
    _WALLIS.ensure(m)
    return float(_WALLIS.c[m])


def wallis_c_array(m_max: int) -> np.ndarray:
    """Read-only view of [c_0, ..., c_{m_max}]."""
    m_max = _check_index(m_max, 0)
    _WALLIS.ensure(m_max)
    out = _WALLIS.c[: m_max + 1]
    out.flags.writeable = False
    return out

def wallis_h(m: int) -> float:
    """h_m = c_m except h_2 = c_1 (the non-monotone seam in the products)."""
    m = _check_index(m, 0)
    _WALLIS.ensure(m)
    return float(_WALLIS.h[m])


def log_wallis_K(m: int) -> float:
    """log K_m for m >= -1; K_{-1} = 1 so log K_{-1} = 0."""
    m = _check_index(m, -1)
    _WALLIS.ensure(max(m, 0))
    return float(_WALLIS.logK[m + 1])


def log_wallis_K_array(m_max: int) -> np.ndarray:
    """Read-only [log K_{-1}, log K_0, ..., log K_{m_max}] (length m_max + 2)."""
    m_max = _check_index(m_max, -1)
    _WALLIS.ensure(max(m_max, 0))
    out = _WALLIS.logK[: m_max + 2]
    out.flags.writeable = False
    return out


def wallis_K(m: int) -> float:
    """K_m in linear scale; underflows to 0 for large m (use log_wallis_K)."""
    return math.exp(log_wallis_K(m))


def log_wallis_H(m: int) -> float:
    """log H_m for m >= -1 with H_{-1} = 1."""
    m = _check_index(m, -1)
    _WALLIS.ensure(max(m, 0))
    return float(_WALLIS.logH[m + 1])


def wallis_H(m: int) -> float:
    """H_m in linear scale; underflows to 0 for large m."""
    return math.exp(log_wallis_H(m))


@dataclass(frozen=True)
class WallisTable:
    """Snapshot of the first m_max + 1 Wallis constants and their products."""

    m_max: int
    c: np.ndarray
    h: np.ndarray
    log_K: np.ndarray  # index i holds log K_{i-1}, i = 0 .. m_max + 1
    log_H: np.ndarray

    def __post_init__(self) -> None:
        for arr in (self.c, self.h, self.log_K, self.log_H):
            arr.flags.writeable = False


def wallis_table(m_max: int) -> WallisTable:
    m_max = _check_index(m_max, 0)
    _WALLIS.ensure(m_max)
    return WallisTable(
        m_max=m_max,
        c=_WALLIS.c[: m_max + 1].copy(),
        h=_WALLIS.h[: m_max + 1].copy(),
        log_K=_WALLIS.logK[: m_max + 2].copy(),
        log_H=_WALLIS.logH[: m_max + 2].copy(),
    )


# ---------------------------------------------------------------------------
# Log-gamma / log-binomial.
# ---------------------------------------------------------------------------


def log_gamma(x: float) -> float:
    """log Gamma(x) for x > 0."""
    if not x > 0:
        raise ConstantsError(f"log_gamma needs x > 0, got {x}")
    return math.lgamma(x)


def log_factorial(n: int) -> float:
    """log n! for integer n >= 0."""
    n = _check_index(n, 0)
    return math.lgamma(n + 1.0)


def _stirling_remainder(x: float) -> float:
    # lgamma(x+1) = (x + 1/2) log x - x + log sqrt(2 pi) + S(x), truncated
    # after the x^-5 term; for x >= 40 the next term is < 4e-15.
    xx = x * x
    return (1.0 / 12.0 - (1.0 / 360.0 - 1.0 / 1260.0 / xx) / xx) / x


def log_binomial(a: int, b: int) -> float:
    """log of the binomial coefficient C(a, b), relative error ~1e-14.

    A direct lgamma difference loses precision once a is large (the three
    lgamma values reach ~2e10 at a = 1e9 while the result can stay small),
    so the large-b branch evaluates the cancellation-free regrouping

        b log(a/b) + (a-b) log1p(b/(a-b)) + (1/2) log(a / (2 pi b (a-b)))
        + S(a) - S(b) - S(a-b)

    of the Stirling expansion; small b falls back to an exact product.
    """
    a = _check_index(a, 0)
    if not isinstance(b, (int, np.integer)):
        raise ConstantsError(f"b must be an integer, got {b!r}")
    b = int(b)
    if b < 0 or b > a:
        raise ConstantsError(f"need 0 <= b <= a, got a={a}, b={b}")
    m = min(b, a - b)
    if m == 0:
        return 0.0
    if m <= 40:
        c = a - m
        return math.fsum(math.log((c + j) / j) for j in range(1, m + 1))
    c = a - m
    t1 = m * math.log(a / m)
    t2 = c * math.log1p(m / c)
    t3 = 0.5 * math.log(a / (2.0 * math.pi * m * c))
    return (
        t1
        + t2
        + t3
        + _stirling_remainder(float(a))
        - _stirling_remainder(float(m))
        - _stirling_remainder(float(c))
    )


# ---------------------------------------------------------------------------
# Regularized incomplete gamma, chi-square CDF, normal CDF and quantile.
# ---------------------------------------------------------------------------

_GAMMA_EPS = 1e-16
_GAMMA_MAX_ITER = 600
_GAMMA_TINY = 1e-300


def _reg_lower_gamma_series(a: float, x: float) -> float:
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(_GAMMA_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _GAMMA_EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _reg_upper_gamma_cf(a: float, x: float) -> float:
    # Modified Lentz evaluation of the continued fraction for Q(a, x).
    b = x + 1.0 - a
    c = 1.0 / _GAMMA_TINY
    d = 1.0 / b
    frac = d
    for i in range(1, _GAMMA_MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _GAMMA_TINY:
            d = _GAMMA_TINY
        c = b + an / c
        if abs(c) < _GAMMA_TINY:
            c = _GAMMA_TINY
        d = 1.0 / d
        delta = d * c
        frac *= delta
        if abs(delta - 1.0) < _GAMMA_EPS:
            break
    return frac * math.exp(-x + a * math.log(x) - math.lgamma(a))


def regularized_lower_gamma(a: float, x: float) -> float:
    """P(a, x), the regularized lower incomplete gamma function."""
    if not a > 0:
        raise ConstantsError(f"shape must be positive, got {a}")
    if x < 0:
        raise ConstantsError(f"argument must be >= 0, got {x}")
    if x == 0.0:
        return 0.0
    if x < a + 1.0:
        return min(_reg_lower_gamma_series(a, x), 1.0)
    return max(1.0 - _reg_upper_gamma_cf(a, x), 0.0)


def chi2_cdf(x: float, df: int) -> float:
    """CDF of the chi-square law with df degrees of freedom.

    For df = 2 this reduces to 1 - exp(-x/2), a useful exactness probe.
    """
    df = _check_index(df, 1)
    if x < 0:
        raise ConstantsError(f"chi2_cdf needs x >= 0, got {x}")
    return regularized_lower_gamma(0.5 * df, 0.5 * x)


def normal_cdf(x: float) -> float:
    """Standard normal CDF via erfc; absolute error well below 1e-10."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


# Acklam's rational starting approximation for the normal quantile.
_PPF_A = (
    -3.969683028665376e01,
    2.209460984245205e02,
    -2.759285104469687e02,
    1.383577518672690e02,
    -3.066479806614716e01,
    2.506628277459239e00,
)
_PPF_B = (
    -5.447609879822406e01,
    1.615858368580409e02,
    -1.556989798598866e02,
    6.680131188771972e01,
    -1.328068155288572e01,
)
_PPF_C = (
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e00,
    -2.549732539343734e00,
    4.374664141464968e00,
    2.938163982698783e00,
)
_PPF_D = (
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e00,
    3.754408661907416e00,
)


def _normal_ppf_lower(q: float) -> float:
    # q <= 0.5; normal_cdf keeps full relative precision on this side, so
    # the Halley correction never hits the ulp(1) cancellation floor.
    p_low = 0.02425
    if q < p_low:
        r = math.sqrt(-2.0 * math.log(q))
        x = (
            ((((_PPF_C[0] * r + _PPF_C[1]) * r + _PPF_C[2]) * r + _PPF_C[3]) * r + _PPF_C[4]) * r
            + _PPF_C[5]
        ) / ((((_PPF_D[0] * r + _PPF_D[1]) * r + _PPF_D[2]) * r + _PPF_D[3]) * r + 1.0)
    else:
        r = q - 0.5
        s = r * r
        x = (
            (((((_PPF_A[0] * s + _PPF_A[1]) * s + _PPF_A[2]) * s + _PPF_A[3]) * s + _PPF_A[4]) * s + _PPF_A[5])
            * r
        ) / (((((_PPF_B[0] * s + _PPF_B[1]) * s + _PPF_B[2]) * s + _PPF_B[3]) * s + _PPF_B[4]) * s + 1.0)
    for _ in range(2):
        err = normal_cdf(x) - q
        pdf = math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
        if pdf == 0.0:
            break
        u = err / pdf
        x -= u / (1.0 + 0.5 * x * u)
    return x


def normal_ppf(q: float) -> float:
    """Standard normal quantile, refined to ~1e-14 by Halley iterations.

    The upper half reflects to the lower half; 1 - q is exact for
    q >= 1/2 (Sterbenz), so both tails share the well-conditioned branch.
    """
    if not 0.0 < q < 1.0:
        raise ConstantsError(f"quantile level must be in (0, 1), got {q}")
    if q > 0.5:
        return -_normal_ppf_lower(1.0 - q)
    return _normal_ppf_lower(q)
