"""Seeded Monte Carlo estimation of empirical-distribution deviations.

This module is the stochastic counterpart of `klbounds.oracle`: where the
oracle enumerates every type exactly, this one samples.  It exists to
check soundness of the closed-form bounds at sizes enumeration cannot
reach, so reproducibility is absolute:

* trial t of a run draws from the counter-based substream
  (seed, start_trial + t); its value depends on nothing else;
* work is split into fixed chunks of CHUNK_TRIALS trials, and a chunk is
  a pure function of (seed, chunk start), so any worker count — and any
  split into separate calls via start_trial — concatenates to the same
  float64 array, bit for bit;
* both kernel backends produce identical streams (see _kernels).

Tail probabilities count ties (D >= eps), matching the exact oracle, and
come with Wilson score intervals.  Two goodness-of-fit diagnostics guard
the sampler itself against distributional bugs: 2 n D is asymptotically
chi-square with k - 1 degrees of freedom under multinomial sampling, and
sqrt(n) times the Poissonized statistic is asymptotically standard
normal (its leading fluctuation is the total-count deviation
(N - n)/sqrt(n)); each is reduced to a Kolmogorov-Smirnov distance.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from klbounds import _kernels
from klbounds.constants import chi2_cdf, normal_cdf, normal_ppf
from klbounds.divergence import Distribution

__all__ = [
    "CHUNK_TRIALS",
    "GofReport",
    "MeanVarEstimate",
    "MonteCarloError",
    "TailEstimate",
    "gof_chisq_kl",
    "gof_normal_poissonized",
    "ks_statistic",
    "mc_mean_var_kl",
    "mc_samples_kl",
    "mc_samples_kl_poissonized",
    "mc_samples_l1",
    "mc_tail_kl",
    "mc_tail_l1",
    "sample_multinomial",
    "wilson_interval",
]

#: Trials per unit of parallel work.  Fixed — never tuned at run time —
#: because chunk boundaries are part of the reproducibility contract.
CHUNK_TRIALS = 16384

#: Substreams are spaced 2^32 counter steps apart, so a run may address
#: at most 2^32 trial indices (start_trial + trials).
_MAX_TRIAL_INDEX = 1 << 32


class MonteCarloError(ValueError):
    """Raised for invalid simulation parameters."""


@dataclass(frozen=True)
class TailEstimate:
    """Estimated P(stat >= eps) with a Wilson score interval."""

    stat: str
    n: int
    k: int
    eps: float
    trials: int
    hits: int
    estimate: float
    ci_low: float
    ci_high: float
    ci_level: float
    seed: int
    backend: str


@dataclass(frozen=True)
class MeanVarEstimate:
    """Sample mean and variance of the divergence with jackknife errors.

    `var` is the unbiased (ddof = 1) sample variance; `var_se` is the
    delete-one jackknife standard error of the plug-in variance,
    computed in closed form from centered first and second power sums.
    For a degenerate sample (all trials equal) both are exactly 0.
    """

    n: int
    k: int
    trials: int
    mean: float
    mean_se: float
    var: float
    var_se: float
    seed: int
    backend: str


@dataclass(frozen=True)
class GofReport:
    """Kolmogorov-Smirnov distance of a simulated statistic from its
    asymptotic reference law."""

    test: str
    n: int
    k: int
    trials: int
    ks: float
    seed: int
    backend: str
    note: str = ""


# ---------------------------------------------------------------------------
# Input plumbing.
# ---------------------------------------------------------------------------


def _coerce(p) -> Distribution:
    if isinstance(p, Distribution):
        return p
    return Distribution(p)


def _check_trial_range(trials: int, start_trial: int) -> tuple[int, int]:
    if not isinstance(trials, (int, np.integer)) or isinstance(trials, bool) or trials < 0:
        raise MonteCarloError(f"trials must be an integer >= 0, got {trials!r}")
    if (
        not isinstance(start_trial, (int, np.integer))
        or isinstance(start_trial, bool)
        or start_trial < 0
    ):
        raise MonteCarloError(f"start_trial must be an integer >= 0, got {start_trial!r}")
    if start_trial + trials > _MAX_TRIAL_INDEX:
        raise MonteCarloError(
            f"start_trial + trials = {start_trial + trials} exceeds the "
            f"substream address space 2^32"
        )
    return int(trials), int(start_trial)


def _check_n(n: int) -> int:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 1:
        raise MonteCarloError(f"sample size n must be an integer >= 1, got {n!r}")
    return int(n)


def _require_interior(dist: Distribution, what: str) -> None:
    if not dist.interior:
        raise MonteCarloError(
            f"{what} requires an interior distribution (all atoms positive); "
            f"probability {dist.min_prob!r} at some index is not"
        )


def _run_chunk(task):
    probs, n, count, seed, start, stat = task
    p_arr = np.asarray(probs, dtype=np.float64)
    logfact = _kernels.logfact_table(n)
    return _kernels.mc_stat_samples(p_arr, n, count, seed, start, stat, logfact)


def _samples(stat: int, p, n: int, trials: int, seed: int, start_trial: int, workers: int):
    dist = _coerce(p)
    n = _check_n(n)
    trials, start_trial = _check_trial_range(trials, start_trial)
    if stat in (_kernels.STAT_KL, _kernels.STAT_KL_POISSON):
        _require_interior(dist, "the KL statistic")
    if not isinstance(workers, (int, np.integer)) or isinstance(workers, bool) or workers < 1:
        raise MonteCarloError(f"workers must be an integer >= 1, got {workers!r}")
    seed = _kernels.normalize_seed(seed)
    if trials == 0:
        return np.empty(0, dtype=np.float64), dist, seed
    probs = dist.probs
    tasks = [
        (probs, n, min(CHUNK_TRIALS, trials - off), seed, start_trial + off, stat)
        for off in range(0, trials, CHUNK_TRIALS)
    ]
    if workers == 1 or len(tasks) == 1:
        parts = [_run_chunk(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            parts = list(pool.map(_run_chunk, tasks))
    out = parts[0] if len(parts) == 1 else np.concatenate(parts)
    return out, dist, seed


def mc_samples_kl(p, n: int, trials: int, seed: int = 0, start_trial: int = 0,
                  workers: int = 1) -> np.ndarray:
    """KL divergence D(P_hat || P) for each of `trials` multinomial draws."""
    return _samples(_kernels.STAT_KL, p, n, trials, seed, start_trial, workers)[0]


def mc_samples_l1(p, n: int, trials: int, seed: int = 0, start_trial: int = 0,
                  workers: int = 1) -> np.ndarray:
    """L1 distance ||P_hat - P||_1 for each of `trials` multinomial draws."""
    return _samples(_kernels.STAT_L1, p, n, trials, seed, start_trial, workers)[0]


def mc_samples_kl_poissonized(p, n: int, trials: int, seed: int = 0,
                              start_trial: int = 0, workers: int = 1) -> np.ndarray:
    """Signed KL-form statistic with independent Poisson(n p_i) counts.

    The summands keep their sign and the total count is random, so
    values may be negative; nothing is clamped.
    """
    return _samples(_kernels.STAT_KL_POISSON, p, n, trials, seed, start_trial, workers)[0]


# ---------------------------------------------------------------------------
# Tail estimation.
# ---------------------------------------------------------------------------


def wilson_interval(hits: int, trials: int, level: float = 0.99) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion; safe at 0 and trials."""
    if trials < 1:
        raise MonteCarloError(f"trials must be >= 1, got {trials!r}")
    if not 0 <= hits <= trials:
        raise MonteCarloError(f"hits {hits!r} outside [0, {trials}]")
    if not 0.0 < level < 1.0:
        raise MonteCarloError(f"confidence level must be in (0, 1), got {level!r}")
    z = normal_ppf(0.5 * (1.0 + level))
    z2 = z * z
    phat = hits / trials
    denom = 1.0 + z2 / trials
    center = (phat + z2 / (2.0 * trials)) / denom
    half = (
        z
        * math.sqrt(phat * (1.0 - phat) / trials + z2 / (4.0 * trials * trials))
        / denom
    )
    return max(0.0, center - half), min(1.0, center + half)


def _tail(stat: int, name: str, p, n: int, eps: float, trials: int, seed: int,
          workers: int, ci_level: float) -> TailEstimate:
    eps = float(eps)
    if not math.isfinite(eps) or eps < 0.0:
        raise MonteCarloError(f"eps must be finite and >= 0, got {eps!r}")
    if trials < 1:
        raise MonteCarloError(f"tail estimation needs trials >= 1, got {trials!r}")
    samples, dist, seed_n = _samples(stat, p, n, trials, seed, 0, workers)
    hits = int(np.count_nonzero(samples >= eps))
    lo, hi = wilson_interval(hits, trials, ci_level)
    return TailEstimate(
        stat=name,
        n=int(n),
        k=dist.k,
        eps=eps,
        trials=trials,
        hits=hits,
        estimate=hits / trials,
        ci_low=lo,
        ci_high=hi,
        ci_level=ci_level,
        seed=seed_n,
        backend=_kernels.BACKEND,
    )


def mc_tail_kl(p, n: int, eps: float, trials: int, seed: int = 0,
               workers: int = 1, ci_level: float = 0.99) -> TailEstimate:
    """Estimate P(D(P_hat || P) >= eps); ties count, as in the exact oracle."""
    return _tail(_kernels.STAT_KL, "kl", p, n, eps, trials, seed, workers, ci_level)


def mc_tail_l1(p, n: int, eps: float, trials: int, seed: int = 0,
               workers: int = 1, ci_level: float = 0.99) -> TailEstimate:
    """Estimate P(||P_hat - P||_1 >= eps)."""
    return _tail(_kernels.STAT_L1, "l1", p, n, eps, trials, seed, workers, ci_level)


# ---------------------------------------------------------------------------
# Moments.
# ---------------------------------------------------------------------------


def mc_mean_var_kl(p, n: int, trials: int, seed: int = 0,
                   workers: int = 1) -> MeanVarEstimate:
    """Sample mean and variance of D(P_hat || P) with jackknife errors."""
    if trials < 2:
        raise MonteCarloError(f"mean/variance estimation needs trials >= 2, got {trials!r}")
    samples, dist, seed_n = _samples(_kernels.STAT_KL, p, n, trials, seed, 0, workers)
    t = trials
    mean = float(np.mean(samples))
    c = samples - mean
    s1 = float(np.sum(c))  # ~0; kept exact for the leave-one-out identity
    s2 = float(np.sum(c * c))
    var = s2 / (t - 1)
    mean_se = math.sqrt(var / t)
    # Delete-one plug-in variances from the centered power sums.
    loo = (s2 - c * c) / (t - 1) - ((s1 - c) / (t - 1)) ** 2
    loo_mean = float(np.mean(loo))
    var_se = math.sqrt(max(0.0, (t - 1) / t * float(np.sum((loo - loo_mean) ** 2))))
    if s2 == 0.0:
        var = 0.0
        var_se = 0.0
    return MeanVarEstimate(
        n=int(n),
        k=dist.k,
        trials=trials,
        mean=mean,
        mean_se=mean_se,
        var=var,
        var_se=var_se,
        seed=seed_n,
        backend=_kernels.BACKEND,
    )


def sample_multinomial(p, n: int, seed: int = 0, trial: int = 0) -> np.ndarray:
    """One multinomial count vector from substream (seed, trial)."""
    dist = _coerce(p)
    n = _check_n(n)
    _check_trial_range(1, trial)
    state = _kernels.stream_state(_kernels.normalize_seed(seed), int(trial))
    counts, _ = _kernels.multinomial_once(
        np.asarray(dist.probs, dtype=np.float64), n, state, _kernels.logfact_table(n)
    )
    return np.asarray(counts, dtype=np.int64)


# ---------------------------------------------------------------------------
# Goodness of fit.
# ---------------------------------------------------------------------------


def ks_statistic(samples: np.ndarray, cdf) -> float:
    """One-sample Kolmogorov-Smirnov distance against a scalar CDF."""
    x = np.sort(np.asarray(samples, dtype=np.float64))
    t = x.size
    if t == 0:
        raise MonteCarloError("Kolmogorov-Smirnov distance needs at least one sample")
    f = np.array([cdf(v) for v in x])
    grid = np.arange(t, dtype=np.float64)
    d_plus = float(np.max((grid + 1.0) / t - f))
    d_minus = float(np.max(f - grid / t))
    return max(d_plus, d_minus, 0.0)


def gof_chisq_kl(p, n: int, trials: int, seed: int = 0,
                 workers: int = 1) -> GofReport:
    """KS distance of 2 n D from chi-square with k - 1 degrees of freedom.

    A sampler diagnostic: for fixed interior P the distance decays like
    O(1/sqrt(n)) plus the O(1/sqrt(trials)) empirical-CDF noise; a
    broken sampler shows up as an O(1) distance.
    """
    if trials < 1:
        raise MonteCarloError(f"goodness of fit needs trials >= 1, got {trials!r}")
    samples, dist, seed_n = _samples(_kernels.STAT_KL, p, n, trials, seed, 0, workers)
    df = dist.k - 1
    ks = ks_statistic(2.0 * n * samples, lambda v: chi2_cdf(v, df))
    return GofReport(
        test="chisq_kl",
        n=int(n),
        k=dist.k,
        trials=trials,
        ks=ks,
        seed=seed_n,
        backend=_kernels.BACKEND,
        note=f"2nD against chi-square, {df} degrees of freedom",
    )


def gof_normal_poissonized(p, n: int, trials: int, seed: int = 0,
                           workers: int = 1) -> GofReport:
    """KS distance of sqrt(n) times the Poissonized statistic from N(0, 1).

    The signed statistic's leading term is (N - n)/sqrt(n) for the random
    total count N, hence the standard normal reference; the quadratic
    remainder biases the distance by O(k/sqrt(n)).
    """
    if trials < 1:
        raise MonteCarloError(f"goodness of fit needs trials >= 1, got {trials!r}")
    samples, dist, seed_n = _samples(
        _kernels.STAT_KL_POISSON, p, n, trials, seed, 0, workers
    )
    ks = ks_statistic(math.sqrt(n) * samples, normal_cdf)
    return GofReport(
        test="normal_poissonized",
        n=int(n),
        k=dist.k,
        trials=trials,
        ks=ks,
        seed=seed_n,
        backend=_kernels.BACKEND,
        note="sqrt(n) x signed Poissonized statistic against N(0, 1)",
    )
