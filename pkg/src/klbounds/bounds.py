"""Closed-form upper bounds on the deviation of an empirical distribution.

Every bound here controls P(D(P_hat || P) >= eps) (or the L1 analogue)
for n iid samples from a distribution on k symbols, uniformly in P unless
stated otherwise.  All arithmetic is in log space; a BoundResult carries
log_value so that bounds like e^(-5000) survive unharmed.

The catalogue:

* method_of_types_bound   C(n+k-1, k-1) e^(-n eps), the classical baseline.
* binary_bound            2 e^(-n eps), tight for k = 2.
* recursive_bound         e^(-n eps) (3 c_1/c_2) sum_{i=0}^{k-2}
                          K_{i-1} (e sqrt(n) / (2 pi))^i, from a recursion
                          on the alphabet size with Wallis constants K_m.
* recursive_bound_loose   e^(-n eps) C1 (sum_{i=1}^{k-2}
                          sqrt(e^3 n / (2 pi i))^i + 1), a closed-form
                          relaxation of the sum.
* recursive_bound_piecewise  four regime rows that upper-bound the loose
                          sum with elementary prefactors (see docstring).
* convex_split_bound      2(k-1) e^(-n eps/(k-1)), from splitting the
                          event across k-1 binary sub-alphabets; the
                          strongest small-k bound for moderate eps.
* agrawal_bound           e^(-n eps) (2e (eps n/(k-1) - log 2))^(k-1),
                          valid for eps > (k-1)(log 2 + 1)/n
                          (Agrawal 2020, arXiv:1904.02291).
* conjectured_*           two unproven candidates, quarantined behind a
                          conjectural flag and excluded from best_kl_bound.
* l1_weissman / l1_recursive   L1-deviation bounds through phi(pi_P)
                          (Weissman, Ordentlich, Seroussi, Verdu and
                          Weinberger 2003 for the subset-exponent form).

Where a bound has the shape f(n, k) e^(-n eps), its threshold
eps_thresh = log f(n, k) / n marks the point where it drops below 1;
threshold ratios between bounds are the headline comparison and are
computed by eps_thresh_comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from klbounds.constants import (
    C0,
    C1,
    log_binomial,
    log_wallis_K_array,
    wallis_c,
)
from klbounds.divergence import Distribution, phi, pi_P

__all__ = [
    "BoundResult",
    "BoundsError",
    "MeanBounds",
    "ThresholdReport",
    "VarianceBound",
    "agrawal_bound",
    "agrawal_subgaussian_bound",
    "best_kl_bound",
    "binary_bound",
    "conjectured_centered_bound",
    "conjectured_tail_bound",
    "convex_split_bound",
    "eps_thresh_comparison",
    "l1_recursive_bound",
    "l1_weissman",
    "mean_bounds",
    "method_of_types_bound",
    "moment_upper",
    "recursive_bound",
    "recursive_bound_loose",
    "recursive_bound_piecewise",
    "variance_upper",
]

_LOG2 = math.log(2.0)
_LOG_2PI = math.log(2.0 * math.pi)


class BoundsError(ValueError):
    """Raised for out-of-domain bound arguments."""


@dataclass(frozen=True)
class BoundResult:
    """A single evaluated bound.

    log_value is authoritative; `value` exponentiates it (and may
    overflow to inf for vacuous bounds), `clamped_value` caps the
    presentation at 1.  eps_thresh is log f(n,k)/n for bounds of the
    shape f(n,k) e^(-n eps) and None otherwise.  `valid` is False when
    the inputs sit outside the bound's proven range; the numeric fields
    still describe the formula's value there.
    """

    name: str
    n: int
    k: int
    eps: float
    log_value: float
    valid: bool = True
    eps_thresh: float | None = None
    conjectural: bool = False
    note: str = ""

    @property
    def value(self) -> float:
        if self.log_value > 709.0:
            return math.inf
        return math.exp(self.log_value)

    @property
    def clamped_value(self) -> float:
        return min(self.value, 1.0)


def _check_n(n: int) -> int:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 1:
        raise BoundsError(f"sample size n must be an integer >= 1, got {n!r}")
    return int(n)


def _check_k(k: int, lowest: int = 2) -> int:
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool) or k < lowest:
        raise BoundsError(f"alphabet size k must be an integer >= {lowest}, got {k!r}")
    return int(k)


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not math.isfinite(eps) or eps < 0.0:
        raise BoundsError(f"eps must be finite and >= 0, got {eps!r}")
    return eps


def _logsumexp(terms: np.ndarray) -> float:
    m = float(np.max(terms))
    if not math.isfinite(m):
        return m
    return m + math.log(float(np.sum(np.exp(terms - m))))


# ---------------------------------------------------------------------------
# KL tail bounds.
# ---------------------------------------------------------------------------


def method_of_types_bound(n: int, k: int, eps: float) -> BoundResult:
    """C(n+k-1, k-1) e^(-n eps): counts types, Sanov-style."""
    n, k, eps = _check_n(n), _check_k(k), _check_eps(eps)
    log_pref = log_binomial(n + k - 1, k - 1)
    return BoundResult(
        name="method_of_types",
        n=n,
        k=k,
        eps=eps,
        log_value=log_pref - n * eps,
        eps_thresh=log_pref / n,
    )


def binary_bound(n: int, eps: float) -> BoundResult:
    """2 e^(-n eps), the k = 2 tail bound; exact at the tie point eps = log 2."""
    n, eps = _check_n(n), _check_eps(eps)
    return BoundResult(
        name="binary",
        n=n,
        k=2,
        eps=eps,
        log_value=_LOG2 - n * eps,
        eps_thresh=_LOG2 / n,
    )


@lru_cache(maxsize=4096)
def _recursive_log_prefactor(n: int, k: int) -> float:
    # log[(3 c_1 / c_2) sum_{i=0}^{k-2} K_{i-1} (e sqrt(n) / (2 pi))^i]
    x = 1.0 + 0.5 * math.log(n) - _LOG_2PI
    log_k = log_wallis_K_array(k - 3)  # entry i is log K_{i-1}, i = 0..k-2
    terms = log_k + x * np.arange(k - 1, dtype=np.float64)
    return math.log(3.0 * wallis_c(1) / wallis_c(2)) + _logsumexp(terms)


def recursive_bound(n: int, k: int, eps: float) -> BoundResult:
    """The Wallis-product sum bound; the tightest proven form in the family.

    For k = 2 the prefactor degenerates to 3 c_1 / c_2 = 12 / pi ~ 3.82,
    slightly above the dedicated binary bound.
    """
    n, k, eps = _check_n(n), _check_k(k), _check_eps(eps)
    log_pref = _recursive_log_prefactor(n, k)
    return BoundResult(
        name="recursive_sum",
        n=n,
        k=k,
        eps=eps,
        log_value=log_pref - n * eps,
        eps_thresh=log_pref / n,
    )


@lru_cache(maxsize=4096)
def _loose_log_prefactor(n: int, k: int) -> float:
    # log[C1 (sum_{i=1}^{k-2} sqrt(e^3 n / (2 pi i))^i + 1)]
    base = 3.0 + math.log(n) - _LOG_2PI
    i = np.arange(1, k - 1, dtype=np.float64)
    terms = np.concatenate([[0.0], i * 0.5 * (base - np.log(i))])
    return math.log(C1) + _logsumexp(terms)


def recursive_bound_loose(n: int, k: int, eps: float) -> BoundResult:
    """Closed-form relaxation of recursive_bound (k >= 3).

    Each i >= 1 term of the sum form is upper-bounded via the factorial
    estimates behind the Wallis products, so the relaxation can only fall
    below the sum form through its smaller constant term (C1 versus
    3 c_1/c_2 = 12/pi at i = 0).  Consequently this bound exceeds
    recursive_bound whenever n >= 400 (already from n = 5 for k >= 4,
    n = 386 for k = 3), and even below that stays within the additive
    constant 12/pi - C1 ~ 0.8907 of it in linear space.
    """
    n, k, eps = _check_n(n), _check_k(k, lowest=3), _check_eps(eps)
    log_pref = _loose_log_prefactor(n, k)
    return BoundResult(
        name="recursive_loose",
        n=n,
        k=k,
        eps=eps,
        log_value=log_pref - n * eps,
        eps_thresh=log_pref / n,
    )


def _piecewise_prefactor(n: int, k: int) -> tuple[float, str]:
    nc = n * C0
    kf = float(k)
    log_c1 = math.log(C1)
    if kf <= math.sqrt(nc) + 2.0:
        # rows 1 and 2 overlap here; keep the smaller (row 1 wins for k >= 3
        # since it replaces a factor k with e)
        row1 = log_c1 + 1.0 + 0.5 * kf * math.log(nc / kf)
        row2 = log_c1 + math.log(kf) + 0.5 * kf * math.log(nc / kf)
        if row1 <= row2:
            return row1, "row 1 (small k; overlap min with row 2)"
        return row2, "row 2 (small k; overlap min with row 1)"
    if kf <= nc / math.e + 2.0:
        return log_c1 + math.log(kf) + 0.5 * kf * math.log(nc / kf), "row 2"
    if kf <= nc + 2.0:
        return log_c1 + math.log(kf) + nc / (2.0 * math.e), "row 3"
    big = math.log(nc) + nc / (2.0 * math.e)
    return log_c1 + np.logaddexp(big, math.log(kf)), "row 4"


def recursive_bound_piecewise(n: int, k: int, eps: float) -> BoundResult:
    """Elementary per-regime prefactors dominating the loose sum (k >= 3).

    With N = n C0:  row 1: C1 e (N/k)^(k/2) for 3 <= k <= sqrt(N) + 2;
    row 2: C1 k (N/k)^(k/2) for 3 <= k <= N/e + 2; row 3:
    C1 k e^(N/(2e)) for N/e + 2 <= k <= N + 2; row 4:
    C1 (N e^(N/(2e)) + k) for k >= N + 2.  Overlapping ranges take the
    minimum.  (Row 3 is the table form; a figure-label variant with k/2
    in the exponent circulates but is not implemented.)
    """
    n, k, eps = _check_n(n), _check_k(k, lowest=3), _check_eps(eps)
    log_pref, row = _piecewise_prefactor(n, k)
    return BoundResult(
        name="recursive_piecewise",
        n=n,
        k=k,
        eps=eps,
        log_value=log_pref - n * eps,
        eps_thresh=log_pref / n,
        note=row,
    )


def convex_split_bound(n: int, k: int, eps: float) -> BoundResult:
    """2(k-1) e^(-n eps / (k-1)); coincides with binary_bound at k = 2.

    The exponent loses a factor k-1 but the prefactor is tiny, which wins
    whenever k is small next to n (about k <= (n C0 / 4)^(1/3))."""
    n, k, eps = _check_n(n), _check_k(k), _check_eps(eps)
    log_pref = math.log(2.0 * (k - 1))
    return BoundResult(
        name="convex_split",
        n=n,
        k=k,
        eps=eps,
        log_value=log_pref - n * eps / (k - 1),
        eps_thresh=(k - 1) * log_pref / n,
    )


def agrawal_bound(n: int, k: int, eps: float) -> BoundResult:
    """e^(-n eps) (2e (eps n/(k-1) - log 2))^(k-1), k >= 3.

    Proven for eps > (k-1)(log 2 + 1)/n (Agrawal 2020); outside that
    window valid=False, and where the log argument dies (<= 0) the
    formula itself is vacuous, reported as log_value = +inf.
    """
    n, k, eps = _check_n(n), _check_k(k, lowest=3), _check_eps(eps)
    boundary = (k - 1) * (_LOG2 + 1.0) / n
    valid = eps > boundary
    arg = eps * n / (k - 1) - _LOG2
    if arg <= 0.0:
        return BoundResult(
            name="agrawal",
            n=n,
            k=k,
            eps=eps,
            log_value=math.inf,
            valid=False,
            note="log argument nonpositive; formula undefined, bound vacuous",
        )
    log_value = -n * eps + (k - 1) * math.log(2.0 * math.e * arg)
    return BoundResult(
        name="agrawal",
        n=n,
        k=k,
        eps=eps,
        log_value=log_value,
        valid=valid,
        note="" if valid else f"below proven window eps > {boundary:.6g}",
    )


def agrawal_subgaussian_bound(n: int, k: int, eps: float) -> BoundResult:
    """The e^(-n eps / 2) consequence, valid for eps > 10 (k-1)/n."""
    n, k, eps = _check_n(n), _check_k(k, lowest=3), _check_eps(eps)
    boundary = 10.0 * (k - 1) / n
    valid = eps > boundary
    return BoundResult(
        name="agrawal_subgaussian",
        n=n,
        k=k,
        eps=eps,
        log_value=-n * eps / 2.0,
        valid=valid,
        note="" if valid else f"below proven window eps > {boundary:.6g}",
    )


def conjectured_tail_bound(n: int, k: int, eps: float) -> BoundResult:
    """Unproven candidate 2 (1 + (k-1)/n)^n e^(-n eps); conjectural only.

    Its prefactor tends to 2 e^(k-1) as n grows.  Never consumed by
    best_kl_bound; reported for falsification hunts.
    """
    n, k, eps = _check_n(n), _check_k(k), _check_eps(eps)
    log_pref = n * math.log1p((k - 1) / n) + _LOG2
    return BoundResult(
        name="conjectured_noncentral",
        n=n,
        k=k,
        eps=eps,
        log_value=log_pref - n * eps,
        eps_thresh=log_pref / n,
        conjectural=True,
    )


def conjectured_centered_bound(
    n: int, k: int, t: float, g1: float, g2: float
) -> BoundResult:
    """Unproven candidate g1 exp(-g2 min(n^2 t^2/(k-1), n t)) for the
    deviation above the mean; the two exponents cross at t = (k-1)/n."""
    n, k = _check_n(n), _check_k(k)
    t = float(t)
    if not math.isfinite(t) or t < 0.0:
        raise BoundsError(f"deviation t must be finite and >= 0, got {t!r}")
    if not (g1 > 0.0 and g2 > 0.0):
        raise BoundsError(f"constants g1, g2 must be positive, got {g1!r}, {g2!r}")
    exponent = min(n * n * t * t / (k - 1), n * t)
    return BoundResult(
        name="conjectured_centered",
        n=n,
        k=k,
        eps=t,
        log_value=math.log(g1) - g2 * exponent,
        conjectural=True,
        note="bound on P(D >= E[D] + t)",
    )


_BEST_PRECEDENCE = (
    "binary",
    "convex_split",
    "recursive_sum",
    "recursive_piecewise",
    "agrawal",
    "method_of_types",
)


def best_kl_bound(n: int, k: int, eps: float) -> BoundResult:
    """The smallest proven KL tail bound at (n, k, eps).

    Candidates: binary (k = 2 only), convex_split, recursive_sum,
    recursive_piecewise (k >= 3), agrawal (only inside its window) and
    method_of_types.  Conjectured bounds never participate.  Ties break
    by the fixed precedence order above, so the winner is deterministic.
    """
    n, k, eps = _check_n(n), _check_k(k), _check_eps(eps)
    candidates: list[BoundResult] = []
    if k == 2:
        candidates.append(binary_bound(n, eps))
    candidates.append(convex_split_bound(n, k, eps))
    candidates.append(recursive_bound(n, k, eps))
    if k >= 3:
        candidates.append(recursive_bound_piecewise(n, k, eps))
        agl = agrawal_bound(n, k, eps)
        if agl.valid:
            candidates.append(agl)
    candidates.append(method_of_types_bound(n, k, eps))
    best = candidates[0]
    for cand in candidates[1:]:
        if cand.log_value < best.log_value:
            best = cand
    return best


# ---------------------------------------------------------------------------
# Threshold comparison.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThresholdReport:
    """eps_thresh values at (n, k) and the headline ratio.

    ratio compares the recursive-sum threshold against the closed-form
    LOWER bound (k-1) log((n+k-1)/(k-1)) / n on the method-of-types
    threshold (log C(n+k-1,k-1) >= (k-1) log((n+k-1)/(k-1))), so it is
    an upper bound on the true threshold ratio; the asymptotic reference
    values 1/2, ~0.8125 and ~0.6758 (at k = o(n), k = n C0/e, k = n C0)
    are stated for this definition.
    """

    n: int
    k: int
    method_of_types: float
    method_of_types_lower: float
    recursive_sum: float
    recursive_piecewise: float
    convex_split: float
    ratio: float


def eps_thresh_comparison(n: int, k: int) -> ThresholdReport:
    n, k = _check_n(n), _check_k(k)
    mot = log_binomial(n + k - 1, k - 1) / n
    mot_lower = (k - 1) * math.log((n + k - 1) / (k - 1)) / n
    rec = _recursive_log_prefactor(n, k) / n
    if k >= 3:
        piece = _piecewise_prefactor(n, k)[0] / n
    else:
        piece = _LOG2 / n
    split = (k - 1) * math.log(2.0 * (k - 1)) / n if k > 2 else _LOG2 / n
    return ThresholdReport(
        n=n,
        k=k,
        method_of_types=mot,
        method_of_types_lower=mot_lower,
        recursive_sum=rec,
        recursive_piecewise=piece,
        convex_split=split,
        ratio=rec / mot_lower,
    )


# ---------------------------------------------------------------------------
# Moment and variance bounds.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MeanBounds:
    """Bracket for E[D].  The lower bound is proven for uniform P once
    n >= 15 k (lower_valid records that); the upper bound holds for every
    interior P at every n."""

    n: int
    k: int
    lower: float
    lower_valid: bool
    upper: float


def mean_bounds(n: int, k: int) -> MeanBounds:
    n, k = _check_n(n), _check_k(k)
    nf = float(n)
    lower = (k - 1) / (2.0 * nf) + k * k / (20.0 * nf * nf) - 1.0 / (12.0 * nf * nf)
    return MeanBounds(
        n=n,
        k=k,
        lower=lower,
        lower_valid=n >= 15 * k,
        upper=math.log1p((k - 1) / nf),
    )


@dataclass(frozen=True)
class VarianceBound:
    """min of the two variance upper bounds with its provenance branch."""

    n: int
    k: int
    value: float
    branch: str
    c_free: float
    valid: bool
    note: str = ""


#: Default for the free constant in the k/n^2 variance branch.  Desk-grid
#: calibration (max over the exact-oracle grid of n^2 Var / k, doubled)
#: lands near 1; 60 is kept as a deliberately conservative default and the
#: verify harness reports the measured value next to it.
DEFAULT_VARIANCE_C = 60.0


def variance_upper(n: int, k: int, c_free: float = DEFAULT_VARIANCE_C) -> VarianceBound:
    """Var[D] <= min(6 (3 + log k)^2 / n, c_free * k / n^2).

    The first branch is fully proven.  The second holds asymptotically
    for a large enough universal constant; since 4 n^2 Var tends to at
    least 2(k-1), any c_free < (k-1)/(2k) is provably too small and the
    result is flagged invalid.
    """
    n, k = _check_n(n), _check_k(k)
    c_free = float(c_free)
    if not (math.isfinite(c_free) and c_free > 0.0):
        raise BoundsError(f"c_free must be positive and finite, got {c_free!r}")
    b_log = 6.0 * (3.0 + math.log(k)) ** 2 / n
    b_quad = c_free * k / (float(n) * n)
    if b_log <= b_quad:
        value, branch = b_log, "log"
    else:
        value, branch = b_quad, "quadratic"
    floor_c = (k - 1) / (2.0 * k)
    valid = c_free >= floor_c
    return VarianceBound(
        n=n,
        k=k,
        value=value,
        branch=branch,
        c_free=c_free,
        valid=valid,
        note=""
        if valid
        else f"c_free {c_free} below the asymptotic floor (k-1)/(2k) = {floor_c:.6g}",
    )


def moment_upper(n: int, k: int, p_order: int) -> float:
    """E[D^p] <= eps_thresh^p + p!/n^p with the recursive-sum threshold."""
    n, k = _check_n(n), _check_k(k)
    if not isinstance(p_order, (int, np.integer)) or isinstance(p_order, bool) or p_order < 1:
        raise BoundsError(f"moment order must be an integer >= 1, got {p_order!r}")
    thresh = _recursive_log_prefactor(n, k) / n
    return thresh**p_order + math.factorial(p_order) / float(n) ** p_order


# ---------------------------------------------------------------------------
# L1 bounds.
# ---------------------------------------------------------------------------


def _check_l1_eps(eps: float) -> float:
    eps = float(eps)
    if not math.isfinite(eps) or not 0.0 <= eps <= 2.0:
        raise BoundsError(f"L1 radius eps must lie in [0, 2], got {eps!r}")
    return eps


def l1_weissman(p: Distribution, n: int, eps: float) -> BoundResult:
    """(2^k - 2) exp(-n phi(pi_P) eps^2 / 4) on P(||P_hat - P||_1 >= eps).

    The prefactor counts the nontrivial subsets of the alphabet; its log
    is evaluated as k log 2 + log1p(-2^(1-k)) to stay finite at large k.
    """
    n = _check_n(n)
    eps = _check_l1_eps(eps)
    k = p.k
    phi_val = phi(pi_P(p))
    log_pref = k * _LOG2 + math.log1p(-(2.0 ** (1 - k)))
    return BoundResult(
        name="l1_weissman",
        n=n,
        k=k,
        eps=eps,
        log_value=log_pref - n * phi_val * eps * eps / 4.0,
    )


def l1_recursive_bound(
    p: Distribution, n: int, eps: float, form: str = "piecewise"
) -> BoundResult:
    """KL prefactor times exp(-n phi(pi_P) eps^2 / 4).

    Identical to evaluating the chosen KL bound at the effective radius
    phi(pi_P) eps^2 / 4 (the strengthened Pinsker reduction); `form`
    picks the prefactor: 'sum', 'loose' or 'piecewise'.
    """
    n = _check_n(n)
    eps = _check_l1_eps(eps)
    k = p.k
    phi_val = phi(pi_P(p))
    note = ""
    if form == "sum":
        log_pref = _recursive_log_prefactor(n, k)
    elif form == "loose":
        _check_k(k, lowest=3)
        log_pref = _loose_log_prefactor(n, k)
    elif form == "piecewise":
        _check_k(k, lowest=3)
        log_pref, note = _piecewise_prefactor(n, k)
    else:
        raise BoundsError(f"unknown form {form!r}; use sum, loose or piecewise")
    return BoundResult(
        name=f"l1_recursive_{form}",
        n=n,
        k=k,
        eps=eps,
        log_value=log_pref - n * phi_val * eps * eps / 4.0,
        note=note,
    )
