# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled kernel backend.

Operation-for-operation mirror of _pykern.py; see that module for the
algorithm documentation.  Expression shapes and evaluation order are kept
identical so that, with contraction disabled at compile time, both
backends produce bit-identical doubles.
"""

from libc.math cimport INFINITY, exp, fabs, floor, log, log1p, sqrt

import numpy as np

BACKEND = "cython"

ctypedef unsigned long long u64
ctypedef long long i64

cdef double _INV53 = 1.0 / 9007199254740992.0
cdef u64 _GAMMA = 0x9E3779B97F4A7C15ULL
cdef double _LOG2PI = log(2.0 * 3.141592653589793)


# -- counter-based RNG -------------------------------------------------------


cdef inline u64 _mix64(u64 z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline u64 _stream_state(u64 seed, u64 trial) nogil:
    return _mix64(seed) + (trial << 32) * _GAMMA


cdef inline double _next_double(u64* state) nogil:
    state[0] = state[0] + _GAMMA
    return (_mix64(state[0]) >> 11) * _INV53


def stream_state(seed, trial):
    return _stream_state(<u64> seed, <u64> trial)


def next_u64(state):
    cdef u64 s = <u64> state
    s = s + _GAMMA
    return _mix64(s), s


def next_double(state):
    cdef u64 s = <u64> state
    cdef u64 z
    s = s + _GAMMA
    z = _mix64(s)
    return (z >> 11) * _INV53, s


# -- factorial helpers -------------------------------------------------------


cdef inline double _st_series(double kp1) nogil:
    cdef double kp1sq = kp1 * kp1
    return (1.0 / 12.0 - (1.0 / 360.0 - 1.0 / 1260.0 / kp1sq) / kp1sq) / kp1


cdef inline double _st_tail(double kd, double[::1] logfact) nogil:
    if kd < 10.0:
        return logfact[<Py_ssize_t> kd] - (
            (kd + 0.5) * log(kd + 1.0) - (kd + 1.0) + 0.5 * _LOG2PI
        )
    return _st_series(kd + 1.0)


cdef inline double _logfactorial(double kd, double[::1] logfact) nogil:
    cdef Py_ssize_t ki = <Py_ssize_t> kd
    if ki < logfact.shape[0]:
        return logfact[ki]
    return (kd + 0.5) * log(kd + 1.0) - (kd + 1.0) + 0.5 * _LOG2PI + _st_series(kd + 1.0)


# -- binomial ----------------------------------------------------------------


cdef i64 _binomial_inv(i64 n, double pp, u64* state) nogil:
    cdef double q = 1.0 - pp
    cdef double s = pp / q
    cdef double a = (n + 1.0) * s
    cdef double r = exp(n * log1p(-pp))
    cdef double u = _next_double(state)
    cdef i64 x = 0
    while x < n and u > r:
        u -= r
        x += 1
        r *= a / x - s
    return x


cdef i64 _binomial_btrs(i64 n, double pp, u64* state, double[::1] logfact) nogil:
    cdef double q = 1.0 - pp
    cdef double spq = sqrt(n * pp * q)
    cdef double b = 1.15 + 2.53 * spq
    cdef double a = -0.0873 + 0.0248 * b + 0.01 * pp
    cdef double c = n * pp + 0.5
    cdef double vr = 0.92 - 4.2 / b
    cdef double r = pp / q
    cdef double alpha = (2.83 + 5.1 / b) * spq
    cdef double md = floor((n + 1.0) * pp)
    cdef double t_m = _st_tail(md, logfact)
    cdef double t_nm = _st_tail(n - md, logfact)
    cdef double nd = <double> n
    cdef double u, v, us, kf, ub
    while True:
        u = _next_double(state) - 0.5
        v = _next_double(state)
        us = 0.5 - fabs(u)
        kf = floor((2.0 * a / us + b) * u + c)
        if us >= 0.07 and v <= vr:
            return <i64> kf
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
            return <i64> kf


cdef i64 _binomial(i64 n, double p, u64* state, double[::1] logfact) nogil:
    cdef double pp
    cdef bint flip
    cdef i64 x
    if n <= 0 or p <= 0.0:
        return 0
    if p >= 1.0:
        return n
    if p <= 0.5:
        pp = p
        flip = False
    else:
        pp = 1.0 - p
        flip = True
    if n * pp <= 30.0:
        x = _binomial_inv(n, pp, state)
    else:
        x = _binomial_btrs(n, pp, state, logfact)
    return n - x if flip else x


def binomial_once(n, p, state, logfact):
    cdef double[::1] lf = np.ascontiguousarray(logfact, dtype=np.float64)
    cdef u64 s = <u64> state
    cdef i64 x = _binomial(<i64> n, <double> p, &s, lf)
    return x, s


# -- Poisson -----------------------------------------------------------------


cdef i64 _poisson_inv(double lam, u64* state) nogil:
    cdef double u = _next_double(state)
    cdef i64 x = 0
    cdef double pr = exp(-lam)
    cdef i64 cap = <i64> (lam + 40.0 * sqrt(lam) + 50.0)
    while x < cap and u > pr:
        u -= pr
        x += 1
        pr *= lam / x
    return x


cdef i64 _poisson_ptrs(double lam, u64* state, double[::1] logfact) nogil:
    cdef double slam = sqrt(lam)
    cdef double loglam = log(lam)
    cdef double b = 0.931 + 2.53 * slam
    cdef double a = -0.059 + 0.02483 * b
    cdef double inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
    cdef double vr = 0.9277 - 3.6224 / (b - 2.0)
    cdef double u, v, us, kf
    while True:
        u = _next_double(state) - 0.5
        v = _next_double(state)
        us = 0.5 - fabs(u)
        kf = floor((2.0 * a / us + b) * u + lam + 0.43)
        if us >= 0.07 and v <= vr:
            return <i64> kf
        if kf < 0.0:
            continue
        if us < 0.013 and v > us:
            continue
        if log(v) + log(inv_alpha) - log(a / (us * us) + b) <= kf * loglam - lam - _logfactorial(
            kf, logfact
        ):
            return <i64> kf


cdef i64 _poisson(double lam, u64* state, double[::1] logfact) nogil:
    if lam <= 0.0:
        return 0
    if lam <= 30.0:
        return _poisson_inv(lam, state)
    return _poisson_ptrs(lam, state, logfact)


def poisson_once(lam, state, logfact):
    cdef double[::1] lf = np.ascontiguousarray(logfact, dtype=np.float64)
    cdef u64 s = <u64> state
    cdef i64 x = _poisson(<double> lam, &s, lf)
    return x, s


# -- multinomial via conditional binomials -----------------------------------


cdef void _multinomial_into(
    i64* counts, double* p, Py_ssize_t k, i64 n, u64* state, double[::1] logfact
) nogil:
    cdef i64 remaining = n
    cdef double rest = 1.0
    cdef Py_ssize_t i
    cdef double pc
    cdef i64 x
    for i in range(k - 1):
        if remaining <= 0:
            counts[i] = 0
            rest -= p[i]
            continue
        if rest <= p[i]:
            pc = 1.0
        else:
            pc = p[i] / rest
        x = _binomial(remaining, pc, state, logfact)
        counts[i] = x
        remaining -= x
        rest -= p[i]
    counts[k - 1] = remaining


def multinomial_once(p, n, state, logfact):
    cdef double[::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef double[::1] lf = np.ascontiguousarray(logfact, dtype=np.float64)
    cdef Py_ssize_t k = pv.shape[0]
    counts_arr = np.zeros(k, dtype=np.int64)
    cdef i64[::1] counts = counts_arr
    cdef u64 s = <u64> state
    _multinomial_into(&counts[0], &pv[0], k, <i64> n, &s, lf)
    return counts_arr, s


# -- statistics --------------------------------------------------------------


def mc_stat_samples(p, n, trials, seed, start_trial, stat, logfact):
    """One statistic value per trial; stat 0 = KL, 1 = L1, 2 = Poissonized KL."""
    cdef double[::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef double[::1] lf = np.ascontiguousarray(logfact, dtype=np.float64)
    cdef Py_ssize_t k = pv.shape[0]
    cdef i64 nn = <i64> n
    cdef double nd = <double> nn
    cdef Py_ssize_t num = <Py_ssize_t> trials
    cdef u64 sd = <u64> seed
    cdef u64 st0 = <u64> start_trial
    cdef int stt = <int> stat
    out_arr = np.empty(num, dtype=np.float64)
    cdef double[::1] out = out_arr
    counts_arr = np.zeros(k, dtype=np.int64)
    cdef i64[::1] counts = counts_arr
    cdef u64 state
    cdef Py_ssize_t t, i
    cdef double d, fx, lam
    cdef i64 x, ci
    with nogil:
        for t in range(num):
            state = _stream_state(sd, st0 + t)
            if stt == 2:
                d = 0.0
                for i in range(k):
                    lam = nd * pv[i]
                    x = _poisson(lam, &state, lf)
                    if x > 0:
                        fx = x / nd
                        d += fx * log(fx / pv[i])
            else:
                _multinomial_into(&counts[0], &pv[0], k, nn, &state, lf)
                if stt == 0:
                    d = 0.0
                    for i in range(k):
                        ci = counts[i]
                        if ci > 0:
                            fx = ci / nd
                            d += fx * log(fx / pv[i])
                else:
                    d = 0.0
                    for i in range(k):
                        d += fabs(counts[i] / nd - pv[i])
            out[t] = d
    return out_arr


# -- exact enumeration over multinomial types --------------------------------


def tail_sums(p, n, eps_sorted, stat, logfact):
    """Exact P(stat >= eps_j) for every eps_j in one enumeration pass."""
    cdef double[::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef double[::1] lf = np.ascontiguousarray(logfact, dtype=np.float64)
    cdef double[::1] eps = np.ascontiguousarray(eps_sorted, dtype=np.float64)
    cdef Py_ssize_t k = pv.shape[0]
    cdef Py_ssize_t m = eps.shape[0]
    cdef i64 nn = <i64> n
    cdef double nd = <double> nn
    cdef int stt = <int> stat
    logp_arr = np.empty(k, dtype=np.float64)
    cdef double[::1] logp = logp_arr
    counts_arr = np.zeros(k, dtype=np.int64)
    cdef i64[::1] counts = counts_arr
    sb_arr = np.zeros(m + 1, dtype=np.float64)
    cb_arr = np.zeros(m + 1, dtype=np.float64)
    cdef double[::1] s_b = sb_arr
    cdef double[::1] c_b = cb_arr
    tails_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] tails = tails_arr
    cdef double s_mass = 0.0
    cdef double c_mass = 0.0
    cdef i64 total = 0
    cdef double lf_n = lf[nn]
    cdef Py_ssize_t i, j, lo, hi, mid, idx
    cdef i64 ci, tj
    cdef double d, lpmf, w, fi, t, acc, v
    for i in range(k):
        logp[i] = log(pv[i]) if pv[i] > 0.0 else -INFINITY
    counts[0] = nn
    with nogil:
        while True:
            total += 1
            lpmf = lf_n
            if stt == 0:
                d = 0.0
                for i in range(k):
                    ci = counts[i]
                    if ci > 0:
                        lpmf += ci * logp[i] - lf[ci]
                        fi = ci / nd
                        d += fi * log(fi / pv[i])
            else:
                d = 0.0
                for i in range(k):
                    ci = counts[i]
                    if ci > 0:
                        lpmf += ci * logp[i] - lf[ci]
                    d += fabs(ci / nd - pv[i])
            w = exp(lpmf)
            t = s_mass + w
            if fabs(s_mass) >= fabs(w):
                c_mass += (s_mass - t) + w
            else:
                c_mass += (w - t) + s_mass
            s_mass = t
            lo = 0
            hi = m
            while lo < hi:
                mid = (lo + hi) >> 1
                if eps[mid] <= d:
                    lo = mid + 1
                else:
                    hi = mid
            idx = lo
            t = s_b[idx] + w
            if fabs(s_b[idx]) >= fabs(w):
                c_b[idx] += (s_b[idx] - t) + w
            else:
                c_b[idx] += (w - t) + s_b[idx]
            s_b[idx] = t
            if counts[k - 1] == nn:
                break
            j = 0
            while counts[j] == 0:
                j += 1
            tj = counts[j]
            counts[j] = 0
            counts[0] = tj - 1
            counts[j + 1] += 1
        acc = 0.0
        for j in range(m - 1, -1, -1):
            acc += s_b[j + 1] + c_b[j + 1]
            v = acc
            if v < 0.0:
                v = 0.0
            if v > 1.0:
                v = 1.0
            tails[j] = v
    return tails_arr, s_mass + c_mass, total


def kl_moments(p, n, logfact):
    """Exact (mean, variance, total_mass, type_count) of D over the types."""
    cdef double[::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef double[::1] lf = np.ascontiguousarray(logfact, dtype=np.float64)
    cdef Py_ssize_t k = pv.shape[0]
    cdef i64 nn = <i64> n
    cdef double nd = <double> nn
    logp_arr = np.empty(k, dtype=np.float64)
    cdef double[::1] logp = logp_arr
    counts_arr = np.zeros(k, dtype=np.int64)
    cdef i64[::1] counts = counts_arr
    cdef double s1 = 0.0, cc1 = 0.0, s2 = 0.0, cc2 = 0.0
    cdef double s_mass = 0.0, c_mass = 0.0
    cdef i64 total = 0
    cdef double lf_n = lf[nn]
    cdef Py_ssize_t i, j
    cdef i64 ci, tj
    cdef double d, lpmf, w, fi, t, y, mean, second, var
    for i in range(k):
        logp[i] = log(pv[i])
    counts[0] = nn
    with nogil:
        while True:
            total += 1
            lpmf = lf_n
            d = 0.0
            for i in range(k):
                ci = counts[i]
                if ci > 0:
                    lpmf += ci * logp[i] - lf[ci]
                    fi = ci / nd
                    d += fi * log(fi / pv[i])
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
                cc1 += (s1 - t) + y
            else:
                cc1 += (y - t) + s1
            s1 = t
            y = w * d * d
            t = s2 + y
            if fabs(s2) >= fabs(y):
                cc2 += (s2 - t) + y
            else:
                cc2 += (y - t) + s2
            s2 = t
            if counts[k - 1] == nn:
                break
            j = 0
            while counts[j] == 0:
                j += 1
            tj = counts[j]
            counts[j] = 0
            counts[0] = tj - 1
            counts[j + 1] += 1
    mean = s1 + cc1
    second = s2 + cc2
    var = second - mean * mean
    if var < 0.0:
        var = 0.0
    return mean, var, s_mass + c_mass, total
