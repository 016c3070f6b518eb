"""Pure-Python kernel backend.

This is the reference implementation of the hot loops: multinomial type
enumeration with compensated tail accumulation, and the Monte Carlo
samplers driven by a counter-based RNG.  The compiled twin in _ckern.pyx
mirrors it operation for operation; both are restricted to IEEE double
arithmetic plus libm log/log1p/exp/sqrt (Python's math module wraps the
same libm for these), so results are bit-identical across backends.
math.lgamma is deliberately absent here: CPython ships its own lgamma
that can differ from C libm by an ulp, so factorials arrive via a shared
precomputed table with an explicit Stirling fallback.

RNG: SplitMix64 over a Weyl counter (increment 0x9E3779B97F4A7C15, the
Steele-Lea-Flood finalizer constants).  Trial t of a run seeded with s
reads the master sequence at counter offsets (t << 32) + 1, 2, ..., so
per-trial substreams are disjoint for any trial count below 2^32 and the
result of a trial depends only on (s, t), never on scheduling.

Samplers: binomial by sequential inversion for n*p <= 30, else the BTRS
transformed-rejection method (Hormann 1993); Poisson by inversion for
lambda <= 30, else PTRS (same family).  Both rejection methods are exact.
"""

from __future__ import annotations

from math import exp, fabs, floor, log, log1p, sqrt

import numpy as np

BACKEND = "python"

_MASK = 0xFFFFFFFFFFFFFFFF
_GAMMA = 0x9E3779B97F4A7C15
_INV53 = 1.0 / 9007199254740992.0
_LOG2PI = log(2.0 * 3.141592653589793)


# -- counter-based RNG -------------------------------------------------------


def _mix64(z):
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def stream_state(seed, trial):
    """Initial counter for substream `trial` of the run seeded by `seed`."""
    z0 = _mix64(seed & _MASK)
    return (z0 + ((trial << 32) & _MASK) * _GAMMA) & _MASK


def next_u64(state):
    state = (state + _GAMMA) & _MASK
    return _mix64(state), state


def next_double(state):
    z, state = next_u64(state)
    return (z >> 11) * _INV53, state


# -- factorial helpers -------------------------------------------------------


def _st_series(kp1):
    kp1sq = kp1 * kp1
    return (1.0 / 12.0 - (1.0 / 360.0 - 1.0 / 1260.0 / kp1sq) / kp1sq) / kp1


def _st_tail(kd, logfact):
    # log k! minus its Stirling base (k+1/2)log(k+1) - (k+1) + log sqrt(2pi)
    if kd < 10.0:
        return logfact[int(kd)] - (
            (kd + 0.5) * log(kd + 1.0) - (kd + 1.0) + 0.5 * _LOG2PI
        )
    return _st_series(kd + 1.0)


def _logfactorial(kd, logfact, nfact):
    ki = int(kd)
    if ki < nfact:
        return logfact[ki]
    return (kd + 0.5) * log(kd + 1.0) - (kd + 1.0) + 0.5 * _LOG2PI + _st_series(kd + 1.0)


# -- binomial ----------------------------------------------------------------


def _binomial_inv(n, pp, state):
    q = 1.0 - pp
    s = pp / q
    a = (n + 1.0) * s
    r = exp(n * log1p(-pp))
    u, state = next_double(state)
    x = 0
    while x < n and u > r:
        u -= r
        x += 1
        r *= a / x - s
    return x, state


def _binomial_btrs(n, pp, state, logfact):
    q = 1.0 - pp
    spq = sqrt(n * pp * q)
    b = 1.15 + 2.53 * spq
    a = -0.0873 + 0.0248 * b + 0.01 * pp
    c = n * pp + 0.5
    vr = 0.92 - 4.2 / b
    r = pp / q
    alpha = (2.83 + 5.1 / b) * spq
    md = floor((n + 1.0) * pp)
    t_m = _st_tail(md, logfact)
    t_nm = _st_tail(n - md, logfact)
    nd = float(n)
    while True:
        u, state = next_double(state)
        u -= 0.5
        v, state = next_double(state)
        us = 0.5 - fabs(u)
        kf = floor((2.0 * a / us + b) * u + c)
        if us >= 0.07 and v <= vr:
            return int(kf), state
        if kf < 0.0 or kf > nd:
            continue
        v = log(v * alpha / (a / (us * us) + b))
        ub = (
            (md + 0.5) * log((md + 1.0) / (r * (nd - md + 1.0)))
            + (nd + 1.0) * log((nd - md + 1.0) / (nd - kf + 1.0))
            + (kf + 0.5) * log(r * (nd - kf + 1.0) / (kf + 1.0))
            + t_m
            + t_nm
            - _st_tail(kf, logfact)
            - _st_tail(nd - kf, logfact)
        )
        if v <= ub:
            return int(kf), state


def binomial_once(n, p, state, logfact):
    if n <= 0 or p <= 0.0:
        return 0, state
    if p >= 1.0:
        return n, state
    if p <= 0.5:
        pp = p
        flip = False
    else:
        pp = 1.0 - p
        flip = True
    if n * pp <= 30.0:
        x, state = _binomial_inv(n, pp, state)
    else:
        x, state = _binomial_btrs(n, pp, state, logfact)
    return (n - x if flip else x), state


# -- Poisson -----------------------------------------------------------------


def _poisson_inv(lam, state):
    u, state = next_double(state)
    x = 0
    pr = exp(-lam)
    # fp guard: past lam + 40 sqrt(lam) + 50 the residual mass is < 1e-250,
    # but a subnormal pr could otherwise spin forever.
    cap = int(lam + 40.0 * sqrt(lam) + 50.0)
    while x < cap and u > pr:
        u -= pr
        x += 1
        pr *= lam / x
    return x, state


def _poisson_ptrs(lam, state, logfact, nfact):
    slam = sqrt(lam)
    loglam = log(lam)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
    vr = 0.9277 - 3.6224 / (b - 2.0)
    while True:
        u, state = next_double(state)
        u -= 0.5
        v, state = next_double(state)
        us = 0.5 - fabs(u)
        kf = floor((2.0 * a / us + b) * u + lam + 0.43)
        if us >= 0.07 and v <= vr:
            return int(kf), state
        if kf < 0.0:
            continue
        if us < 0.013 and v > us:
            continue
        if log(v) + log(inv_alpha) - log(a / (us * us) + b) <= kf * loglam - lam - _logfactorial(
            kf, logfact, nfact
        ):
            return int(kf), state


def poisson_once(lam, state, logfact):
    if lam <= 0.0:
        return 0, state
    if lam <= 30.0:
        return _poisson_inv(lam, state)
    return _poisson_ptrs(lam, state, logfact, len(logfact))


# -- multinomial via conditional binomials -----------------------------------


def multinomial_once(p, n, state, logfact):
    p = list(p)
    k = len(p)
    counts = np.zeros(k, dtype=np.int64)
    remaining = n
    rest = 1.0
    for i in range(k - 1):
        if remaining <= 0:
            rest -= p[i]
            continue
        if rest <= p[i]:
            pc = 1.0
        else:
            pc = p[i] / rest
        x, state = binomial_once(remaining, pc, state, logfact)
        counts[i] = x
        remaining -= x
        rest -= p[i]
    counts[k - 1] = remaining
    return counts, state


# -- statistics --------------------------------------------------------------


def _kl_of_counts(counts, p, k, nd):
    d = 0.0
    for i in range(k):
        ci = counts[i]
        if ci > 0:
            fi = ci / nd
            d += fi * log(fi / p[i])
    return d


def _l1_of_counts(counts, p, k, nd):
    d = 0.0
    for i in range(k):
        d += fabs(counts[i] / nd - p[i])
    return d


def mc_stat_samples(p, n, trials, seed, start_trial, stat, logfact):
    """One statistic value per trial; stat 0 = KL, 1 = L1, 2 = Poissonized KL.

    Trial t uses substream (seed, start_trial + t), so chunked and
    single-shot invocations concatenate to identical arrays.
    """
    p = [float(x) for x in p]
    lf = logfact  # indexable by sampled counts; callers size it to cover n
    k = len(p)
    nd = float(n)
    out = np.empty(trials, dtype=np.float64)
    counts = [0] * k
    nfact = len(lf)
    for t in range(trials):
        state = stream_state(seed, start_trial + t)
        if stat == 2:
            d = 0.0
            for i in range(k):
                lam = nd * p[i]
                x, state = poisson_once(lam, state, lf)
                if x > 0:
                    fx = x / nd
                    d += fx * log(fx / p[i])
        else:
            remaining = n
            rest = 1.0
            for i in range(k - 1):
                if remaining <= 0:
                    counts[i] = 0
                    rest -= p[i]
                    continue
                if rest <= p[i]:
                    pc = 1.0
                else:
                    pc = p[i] / rest
                x, state = binomial_once(remaining, pc, state, lf)
                counts[i] = x
                remaining -= x
                rest -= p[i]
            counts[k - 1] = remaining
            if stat == 0:
                d = _kl_of_counts(counts, p, k, nd)
            else:
                d = _l1_of_counts(counts, p, k, nd)
        out[t] = d
    return out


# -- exact enumeration over multinomial types --------------------------------


def _bisect_right(eps, m, d):
    lo = 0
    hi = m
    while lo < hi:
        mid = (lo + hi) >> 1
        if eps[mid] <= d:
            lo = mid + 1
        else:
            hi = mid
    return lo


def tail_sums(p, n, eps_sorted, stat, logfact):
    """Exact P(stat >= eps_j) for every eps_j in one enumeration pass.

    Walks all C(n+k-1, k-1) count vectors in colexicographic order,
    accumulating each type's multinomial probability into a per-threshold
    bucket with Neumaier compensation.  Returns (tails, total_mass, count);
    total_mass should be 1 up to rounding and is the caller's sanity check.
    """
    p = [float(x) for x in p]
    lf = logfact.tolist() if hasattr(logfact, "tolist") else list(logfact)
    k = len(p)
    m = len(eps_sorted)
    eps = [float(e) for e in eps_sorted]
    nd = float(n)
    logp = [log(x) if x > 0.0 else float("-inf") for x in p]
    counts = [0] * k
    counts[0] = n
    s_b = [0.0] * (m + 1)
    c_b = [0.0] * (m + 1)
    s_mass = 0.0
    c_mass = 0.0
    total = 0
    lf_n = lf[n]
    while True:
        total += 1
        lpmf = lf_n
        if stat == 0:
            d = 0.0
            for i in range(k):
                ci = counts[i]
                if ci > 0:
                    lpmf += ci * logp[i] - lf[ci]
                    fi = ci / nd
                    d += fi * log(fi / p[i])
        else:
            d = 0.0
            for i in range(k):
                ci = counts[i]
                if ci > 0:
                    lpmf += ci * logp[i] - lf[ci]
                d += fabs(ci / nd - p[i])
        w = exp(lpmf)
        t = s_mass + w
        if fabs(s_mass) >= fabs(w):
            c_mass += (s_mass - t) + w
        else:
            c_mass += (w - t) + s_mass
        s_mass = t
        idx = _bisect_right(eps, m, d)
        t = s_b[idx] + w
        if fabs(s_b[idx]) >= fabs(w):
            c_b[idx] += (s_b[idx] - t) + w
        else:
            c_b[idx] += (w - t) + s_b[idx]
        s_b[idx] = t
        if counts[k - 1] == n:
            break
        j = 0
        while counts[j] == 0:
            j += 1
        tj = counts[j]
        counts[j] = 0
        counts[0] = tj - 1
        counts[j + 1] += 1
    tails = np.empty(m, dtype=np.float64)
    acc = 0.0
    for j in range(m - 1, -1, -1):
        acc += s_b[j + 1] + c_b[j + 1]
        v = acc
        if v < 0.0:
            v = 0.0
        if v > 1.0:
            v = 1.0
        tails[j] = v
    return tails, s_mass + c_mass, total


def kl_moments(p, n, logfact):
    """Exact (mean, variance, total_mass, type_count) of D over the types."""
    p = [float(x) for x in p]
    lf = logfact.tolist() if hasattr(logfact, "tolist") else list(logfact)
    k = len(p)
    nd = float(n)
    logp = [log(x) for x in p]
    counts = [0] * k
    counts[0] = n
    s1 = 0.0
    c1 = 0.0
    s2 = 0.0
    c2 = 0.0
    s_mass = 0.0
    c_mass = 0.0
    total = 0
    lf_n = lf[n]
    while True:
        total += 1
        lpmf = lf_n
        d = 0.0
        for i in range(k):
            ci = counts[i]
            if ci > 0:
                lpmf += ci * logp[i] - lf[ci]
                fi = ci / nd
                d += fi * log(fi / p[i])
        w = exp(lpmf)
        t = s_mass + w
        if fabs(s_mass) >= fabs(w):
            c_mass += (s_mass - t) + w
        else:
            c_mass += (w - t) + s_mass
        s_mass = t
        y = w * d
        t = s1 + y
        if fabs(s1) >= fabs(y):
            c1 += (s1 - t) + y
        else:
            c1 += (y - t) + s1
        s1 = t
        y = w * d * d
        t = s2 + y
        if fabs(s2) >= fabs(y):
            c2 += (s2 - t) + y
        else:
            c2 += (y - t) + s2
        s2 = t
        if counts[k - 1] == n:
            break
        j = 0
        while counts[j] == 0:
            j += 1
        tj = counts[j]
        counts[j] = 0
        counts[0] = tj - 1
        counts[j + 1] += 1
    mean = s1 + c1
    second = s2 + c2
    var = second - mean * mean
    if var < 0.0:
        var = 0.0
    return mean, var, s_mass + c_mass, total
