"""Self-check suite behind the `verify` CLI subcommand.

Each check compares a closed-form bound against one of the exact ground
truths (type enumeration, exact moment formulas) or asserts an internal
identity, and reports its worst margin.  The suite is sized to finish in
well under a minute with the compiled kernel and a few minutes without.

Checks marked conjectural never affect the exit status: they exist to
hunt for counterexamples to the unproven candidate bounds, not to gate
the build.

One check deserves a note: the binomial KL-moment inequality
E_i <= h_i e sqrt(n) / (2 pi) is asserted only for n >= 360.  The
inequality is simply false below that — E_0(1) = 2 > e/2, and more
generally the l = 0 and l = n terms of the sum contribute 1 each, which
the h_i e sqrt(n)/(2 pi) envelope cannot absorb until n is large (for
i <= 20, n = 360 is exactly where violations stop).  The check prints
the n = 1 counterexample as a reminder rather than failing on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from klbounds import bounds, constants, oracle
from klbounds._kernels import next_double, normalize_seed, stream_state
from klbounds.bounds import (
    _loose_log_prefactor,
    _piecewise_prefactor,
    _recursive_log_prefactor,
)
from klbounds.constants import C0, C1
from klbounds.divergence import Distribution

__all__ = ["CheckResult", "VerifyConfig", "run_suite"]

_LOG2 = math.log(2.0)
_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    margin: float | None
    detail: str
    conjectural: bool = False


@dataclass(frozen=True)
class VerifyConfig:
    """Grid sizes for the suite; defaults finish fast on any backend."""

    max_n: int = 14
    ks: tuple[int, ...] = (2, 3, 4)
    per_cell: int = 6
    eps_points: int = 40
    seed: int = 1729
    conjectures: bool = False
    #: Test-only harness knob: added to the binary bound's log prefactor so
    #: the tie-equality check is guaranteed to fail, proving the suite can.
    bug_injection: float = 0.0


def _random_interior(k: int, state: int) -> tuple[tuple[float, ...], int]:
    """A random interior distribution: normalized exponentials mixed with
    5% uniform so no atom can collapse toward 0."""
    raw = []
    for _ in range(k):
        u, state = next_double(state)
        raw.append(-math.log1p(-u))
    total = math.fsum(raw)
    probs = [0.95 * (r / total) + 0.05 / k for r in raw]
    probs[-1] = 1.0 - math.fsum(probs[:-1])
    return tuple(probs), state


def _cells(cfg: VerifyConfig):
    """Deterministic (n, k, P) cells; stream index advances per cell."""
    counter = 0
    for n in range(1, cfg.max_n + 1):
        for k in cfg.ks:
            for _ in range(cfg.per_cell):
                state = stream_state(normalize_seed(cfg.seed), counter)
                counter += 1
                probs, _ = _random_interior(k, state)
                yield n, k, Distribution(probs)


# ---------------------------------------------------------------------------
# Individual checks.
# ---------------------------------------------------------------------------


def _check_binary_tie(cfg: VerifyConfig) -> CheckResult:
    worst = 0.0
    fair = Distribution((0.5, 0.5))
    for n in range(1, 21):
        exact = oracle.exact_tail_kl(fair, n, _LOG2).probability
        log_bound = bounds.binary_bound(n, _LOG2).log_value + cfg.bug_injection
        rel = abs(exact - math.exp(log_bound)) / exact
        worst = max(worst, rel)
    return CheckResult(
        name="binary-tie-equality",
        passed=worst <= 1e-12,
        margin=worst,
        detail="exact P(D >= log 2) vs 2 e^{-n log 2} at k=2, n=1..20 "
        "(tie case, equality expected); margin = worst relative difference",
    )


def _check_soundness_kl(cfg: VerifyConfig):
    min_margin = math.inf
    worst_mass = 0.0
    first_bad = None
    comparisons = 0
    for n, k, dist in _cells(cfg):
        eps = np.linspace(0.0, 1.02 * oracle.max_kl_over_types(dist), cfg.eps_points)
        curve = oracle.tail_curve_kl(dist, n, eps)
        worst_mass = max(worst_mass, abs(oracle.exact_tail_kl(dist, n, 0.0).mass_residual))
        cands = [bounds.method_of_types_bound(n, k, 0.0),
                 bounds.recursive_bound(n, k, 0.0),
                 bounds.convex_split_bound(n, k, 0.0)]
        if k == 2:
            cands.append(bounds.binary_bound(n, 0.0))
        if k >= 3:
            cands.append(bounds.recursive_bound_loose(n, k, 0.0))
            cands.append(bounds.recursive_bound_piecewise(n, k, 0.0))
        for i, e in enumerate(eps):
            exact = float(curve[i])
            for cand in cands:
                scale = 1.0 / (k - 1) if cand.name == "convex_split" else 1.0
                val = math.exp(min(cand.log_value - n * e * scale, 1.0))
                comparisons += 1
                margin = val - exact
                if margin < min_margin:
                    min_margin = margin
                if exact > val + 1e-12 and first_bad is None:
                    first_bad = (cand.name, n, k, dist.probs, float(e))
            if k >= 3:
                agl = bounds.agrawal_bound(n, k, float(e))
                if agl.valid:
                    comparisons += 1
                    margin = agl.value - exact
                    if margin < min_margin:
                        min_margin = margin
                    if exact > agl.value + 1e-12 and first_bad is None:
                        first_bad = ("agrawal", n, k, dist.probs, float(e))
    detail = (
        f"{comparisons} exact-tail vs bound comparisons on the desk grid "
        f"(n<={cfg.max_n}, k in {cfg.ks}, {cfg.per_cell} random P per cell)"
    )
    if first_bad is not None:
        detail += f"; first counterexample (bound n k P eps) = {first_bad}"
    sound = CheckResult(
        name="kl-soundness-grid",
        passed=first_bad is None,
        margin=min_margin,
        detail=detail,
    )
    mass = CheckResult(
        name="type-mass-conservation",
        passed=worst_mass <= 1e-9,
        margin=worst_mass,
        detail="worst |sum pmf - 1| over all enumerated (P, n) cells",
    )
    return [sound, mass]


def _check_prefactor_order(cfg: VerifyConfig) -> CheckResult:
    """Ordering of the three recursive-prefactor forms.

    Three clauses, each provable (the naive "sum <= loose for every n"
    is false at small n because the i = 0 constant shrinks from
    3 c_1/c_2 = 12/pi to C1 when the sum is relaxed):

    1. termwise, n-independent: for every i >= 1 the relaxed term
       dominates the exact term, i.e.
       (C1 pi / 12) (2 pi e / i)^{i/2} / K_{i-1} >= 1;
    2. aggregate with the constant-term correction: the sum-form
       prefactor never exceeds loose + (12/pi - C1), any n, k;
    3. plain orderings sum <= loose <= piecewise for n >= 400 on a log
       grid (the k = 3 crossover sits at n = 386; k >= 4 crosses by
       n = 5), plus loose <= piecewise for ALL n >= 1 (each piecewise
       row upper-bounds the loose sum termwise).
    """
    min_margin = math.inf
    bad = None

    def note(clause, margin, where):
        nonlocal min_margin, bad
        if margin < min_margin:
            min_margin = margin
        if margin < -1e-9 and bad is None:
            bad = (clause, where, margin)

    log_k = constants.log_wallis_K_array(500)  # log_k[i] = log K_{i-1}
    base = math.log(C1 * math.pi / 12.0)
    for i in range(1, 499):
        term = base + 0.5 * i * (1.0 + _LOG_2PI - math.log(i)) - log_k[i]
        note("termwise", term, f"i={i}")

    ns = sorted(set(int(round(x)) for x in np.logspace(0.0, 5.0, 21)))
    ks = sorted(set(int(round(x)) for x in np.logspace(math.log10(3), math.log10(500), 16)))
    slack = math.log(12.0 / math.pi - C1)
    for n in ns:
        for k in ks:
            rec = _recursive_log_prefactor(n, k)
            loose = _loose_log_prefactor(n, k)
            piece = _piecewise_prefactor(n, k)[0]
            note("corrected-sum<=loose", np.logaddexp(loose, slack) - rec,
                 f"(n={n}, k={k})")
            note("loose<=piecewise", piece - loose, f"(n={n}, k={k})")
            if n >= 400:
                note("sum<=loose", loose - rec, f"(n={n}, k={k})")
                note("sum<=piecewise", piece - rec, f"(n={n}, k={k})")
    detail = (
        "prefactor orderings: termwise i>=1 dominance, sum <= loose + (12/pi - C1) "
        "everywhere, sum <= loose <= piecewise for n >= 400 (k=3 crossover n=386), "
        "loose <= piecewise for all n"
    )
    if bad is not None:
        detail += f"; violated by {bad}"
    return CheckResult(
        name="prefactor-ordering", passed=bad is None, margin=min_margin, detail=detail
    )


def _check_improvement(cfg: VerifyConfig) -> CheckResult:
    min_margin = math.inf
    bad = None
    for n in (10, 14, 20, 31, 50, 100, 316, 1000):
        k_hi = int(n * C0) + 2
        ks = sorted(set(int(round(x)) for x in np.logspace(math.log10(3), math.log10(k_hi), 12)))
        for k in ks:
            if k < 3 or k > k_hi:
                continue
            margin = bounds.method_of_types_bound(n, k, 0.0).log_value - _recursive_log_prefactor(n, k)
            if margin < min_margin:
                min_margin = margin
            if margin < 0.0 and bad is None:
                bad = (n, k, margin)
    detail = "recursive-sum prefactor below method-of-types prefactor on the documented grid n>=10, 3<=k<=n C0+2"
    if bad is not None:
        detail += f"; violated at (n,k,margin)={bad}"
    return CheckResult(
        name="threshold-improvement", passed=bad is None, margin=min_margin, detail=detail
    )


def _check_quadratic_moments(cfg: VerifyConfig) -> CheckResult:
    worst = 0.0
    counter = 10_000  # separate substream block from the soundness cells
    for n in range(2, 11):
        for k in (2, 3, 4):
            for _ in range(3):
                state = stream_state(normalize_seed(cfg.seed), counter)
                counter += 1
                probs, _ = _random_interior(k, state)
                dist = Distribution(probs)
                for i in range(k):
                    for j in range(i + 1, k):
                        closed = oracle.exact_quadratic_moments(dist, n, i, j)
                        enum = oracle.enumerated_quadratic_moments(dist, n, i, j)
                        for c, m in zip(closed, enum):
                            scale = max(abs(c), abs(m), 1e-30)
                            worst = max(worst, abs(c - m) / scale)
    return CheckResult(
        name="quadratic-moment-identities",
        passed=worst <= 1e-9,
        margin=worst,
        detail="closed-form E[X_i X_j] vs float enumeration, n<=10, k<=4; "
        "margin = worst relative difference",
    )


def _check_binomial_moment(cfg: VerifyConfig) -> CheckResult:
    from klbounds.constants import wallis_h

    min_margin = math.inf
    bad = None
    ns = sorted(set(int(round(x)) for x in np.logspace(math.log10(360.0), 4.0, 25)))
    for n in ns:
        env = math.e * math.sqrt(n) / (2.0 * math.pi)
        prev = None
        for i in range(21):
            e_i = oracle.binomial_exp_kl_moment(0.5, n, i)
            margin = wallis_h(i) * env - e_i
            if margin < min_margin:
                min_margin = margin
            if margin < 0.0 and bad is None:
                bad = (n, i, margin)
            if prev is not None and e_i > prev + 1e-15:
                bad = bad or (n, i, "monotonicity")
            prev = e_i
    counter_example = oracle.binomial_exp_kl_moment(0.5, 1, 0)
    detail = (
        "E_i <= h_i e sqrt(n)/(2 pi) for n in [360, 1e4] log grid, i<=20, plus "
        "E_{i+1} <= E_i; the literal any-n claim is false below n=360 "
        f"(upstream flaw: E_0(1) = {counter_example:g} > e/2 = {math.e / 2:.6f})"
    )
    if bad is not None:
        detail += f"; violated at {bad}"
    return CheckResult(
        name="binomial-kl-moment-bound", passed=bad is None, margin=min_margin, detail=detail
    )


def _check_mean_var(cfg: VerifyConfig):
    up_margin = math.inf
    var_margin = math.inf
    up_bad = None
    var_bad = None
    calib = 0.0
    for n, k, dist in _cells(cfg):
        mean, var = oracle.exact_mean_var_kl(dist, n)
        mb = bounds.mean_bounds(n, k)
        m = mb.upper - mean
        if m < up_margin:
            up_margin = m
        if m < -1e-12 and up_bad is None:
            up_bad = (n, k, dist.probs, m)
        vb = 6.0 * (3.0 + math.log(k)) ** 2 / n
        v = vb - var
        if v < var_margin:
            var_margin = v
        if v < -1e-12 and var_bad is None:
            var_bad = (n, k, dist.probs, v)
        calib = max(calib, n * n * var / k)
    lo_margin = math.inf
    lo_bad = None
    for k, ns in ((2, (30, 60, 100, 150, 200)), (3, (45, 60))):
        for n in ns:
            mean, _ = oracle.exact_mean_var_kl(Distribution.uniform(k), n)
            m = mean - bounds.mean_bounds(n, k).lower
            if m < lo_margin:
                lo_margin = m
            if m < -1e-12 and lo_bad is None:
                lo_bad = (n, k, m)
    checks = [
        CheckResult(
            name="mean-upper-bound",
            passed=up_bad is None,
            margin=up_margin,
            detail="exact E[D] <= log(1 + (k-1)/n) on the desk grid"
            + (f"; violated at {up_bad}" if up_bad else ""),
        ),
        CheckResult(
            name="mean-lower-bound",
            passed=lo_bad is None,
            margin=lo_margin,
            detail="exact E[D] >= (k-1)/(2n) + k^2/(20 n^2) - 1/(12 n^2) for uniform P, n >= 15k"
            + (f"; violated at {lo_bad}" if lo_bad else ""),
        ),
        CheckResult(
            name="variance-upper-bound",
            passed=var_bad is None,
            margin=var_margin,
            detail="exact Var[D] <= 6 (3 + log k)^2 / n on the desk grid; "
            f"measured max n^2 Var / k = {calib:.6g} (quadratic-branch calibration; "
            f"default c_free = {bounds.DEFAULT_VARIANCE_C:g})"
            + (f"; violated at {var_bad}" if var_bad else ""),
        ),
    ]
    return checks


def _check_ratio_targets(cfg: VerifyConfig) -> CheckResult:
    n = 10**6
    r10 = bounds.eps_thresh_comparison(n, 10).ratio
    r_mid = bounds.eps_thresh_comparison(n, int(n * C0 / math.e)).ratio
    r_hi = bounds.eps_thresh_comparison(n, int(n * C0)).ratio
    slacks = (0.55 - r10, 0.02 - abs(r_mid - 0.8125), 0.02 - abs(r_hi - 0.6758))
    return CheckResult(
        name="threshold-ratio-targets",
        passed=all(s >= 0.0 for s in slacks),
        margin=min(slacks),
        detail=f"n=1e6 threshold ratios vs mot lower bound: k=10 -> {r10:.4f} (<= 0.55), "
        f"k=floor(n C0/e) -> {r_mid:.5f} (0.8125 +- 0.02), "
        f"k=floor(n C0) -> {r_hi:.5f} (0.6758 +- 0.02)",
    )


def _check_l1(cfg: VerifyConfig):
    min_margin = math.inf
    bad = None
    for k in cfg.ks:
        dist = Distribution.uniform(k)
        for n in range(1, cfg.max_n + 1):
            eps = np.linspace(0.0, 2.0, cfg.eps_points)
            curve = oracle.tail_curve_l1(dist, n, eps)
            for i, e in enumerate(eps):
                exact = float(curve[i])
                cands = [bounds.l1_weissman(dist, n, float(e)),
                         bounds.l1_recursive_bound(dist, n, float(e), form="sum")]
                if k >= 3:
                    cands.append(bounds.l1_recursive_bound(dist, n, float(e), form="piecewise"))
                for cand in cands:
                    val = math.exp(min(cand.log_value, 1.0))
                    margin = val - exact
                    if margin < min_margin:
                        min_margin = margin
                    if exact > val + 1e-12 and bad is None:
                        bad = (cand.name, n, k, float(e))
    k_cmp, n_cmp = 100, 90
    piece_log = _piecewise_prefactor(n_cmp, k_cmp)[0]
    weiss_log = k_cmp * _LOG2 + math.log1p(-(2.0 ** (1 - k_cmp)))
    reg_margin = weiss_log - piece_log
    checks = [
        CheckResult(
            name="l1-soundness-grid",
            passed=bad is None,
            margin=min_margin,
            detail="exact L1 tail <= subset-exponent and KL-reduction bounds, uniform P"
            + (f"; violated at {bad}" if bad else ""),
        ),
        CheckResult(
            name="l1-prefactor-regime",
            passed=reg_margin > 0.0,
            margin=reg_margin,
            detail=f"at (k={k_cmp}, n={n_cmp}) the piecewise KL prefactor log "
            f"({piece_log:.4f}) undercuts the subset prefactor log ({weiss_log:.4f})",
        ),
    ]
    return checks


def _check_conjectures(cfg: VerifyConfig):
    min_margin = math.inf
    bad = None
    for n, k, dist in _cells(cfg):
        eps = np.linspace(0.0, 1.02 * oracle.max_kl_over_types(dist), cfg.eps_points)
        curve = oracle.tail_curve_kl(dist, n, eps)
        base = bounds.conjectured_tail_bound(n, k, 0.0).log_value
        for i, e in enumerate(eps):
            val = math.exp(min(base - n * e, 1.0))
            margin = val - float(curve[i])
            if margin < min_margin:
                min_margin = margin
            if margin < -1e-12 and bad is None:
                bad = (n, k, dist.probs, float(e))
    detail = "conjectured 2 (1 + (k-1)/n)^n e^{-n eps} vs exact tails (report-only)"
    if bad is not None:
        detail += f"; COUNTEREXAMPLE at {bad}"
    else:
        detail += "; no counterexample on this grid"
    return [
        CheckResult(
            name="conjectured-noncentral-tail",
            passed=True,
            margin=min_margin,
            detail=detail,
            conjectural=True,
        )
    ]


def run_suite(cfg: VerifyConfig) -> list[CheckResult]:
    results: list[CheckResult] = []
    results.append(_check_binary_tie(cfg))
    results.extend(_check_soundness_kl(cfg))
    results.append(_check_prefactor_order(cfg))
    results.append(_check_improvement(cfg))
    results.append(_check_quadratic_moments(cfg))
    results.append(_check_binomial_moment(cfg))
    results.extend(_check_mean_var(cfg))
    results.append(_check_ratio_targets(cfg))
    results.extend(_check_l1(cfg))
    if cfg.conjectures:
        results.extend(_check_conjectures(cfg))
    return results
