"""Discrete distributions, empirical counts, and the deviation functionals.

Everything downstream measures how far an empirical distribution P_hat,
built from n iid samples, sits from the sampling distribution P.  The two
functionals are the KL divergence

    D(Q || P) = sum_i q_i log(q_i / p_i)      (0 log 0 = 0)

and the L1 distance ||Q - P||_1.  The module also carries the two scalars
that sharpen the L1 analysis:

    pi_P  = max_A min(P(A), 1 - P(A))  over subsets A, always <= 1/2,
    phi(p) = log((1 - p)/p) / (1 - 2p)  on (0, 1/2], phi(1/2) = 2,

which combine into the strengthened Pinsker inequality
||Q - P||_1 <= sqrt(4 D(Q || P) / phi(pi_P)).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "CountVector",
    "Distribution",
    "ValidationError",
    "binary_kl",
    "kl",
    "l1",
    "parse_distribution",
    "phi",
    "pi_P",
]

_SUM_TOL = 1e-12


class ValidationError(ValueError):
    """Raised when a probability vector or count vector is malformed."""


@dataclass(frozen=True)
class Distribution:
    """A probability vector on a finite alphabet of size k >= 2.

    Entries must lie in [0, 1] and sum to 1 within 1e-12.  `interior` is
    True when every entry is strictly positive; the KL oracle and the
    KL bounds require an interior sampling distribution.
    """

    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        probs = tuple(float(p) for p in self.probs)
        if len(probs) < 2:
            raise ValidationError(f"need alphabet size k >= 2, got k={len(probs)}")
        for i, p in enumerate(probs):
            if not math.isfinite(p):
                raise ValidationError(f"entry {i} is not finite: {p!r}")
            if p < 0.0 or p > 1.0:
                raise ValidationError(f"entry {i} is outside [0, 1]: {p!r}")
        total = math.fsum(probs)
        if abs(total - 1.0) > _SUM_TOL:
            raise ValidationError(
                f"entries sum to {total!r}, off from 1 by more than {_SUM_TOL}"
            )
        object.__setattr__(self, "probs", probs)

    @property
    def k(self) -> int:
        return len(self.probs)

    @property
    def interior(self) -> bool:
        return all(p > 0.0 for p in self.probs)

    @property
    def min_prob(self) -> float:
        return min(self.probs)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=np.float64)

    @classmethod
    def uniform(cls, k: int) -> "Distribution":
        if k < 2:
            raise ValidationError(f"need k >= 2, got {k}")
        return cls(probs=(1.0 / k,) * k)

    def is_uniform(self) -> bool:
        first = self.probs[0]
        return all(p == first for p in self.probs)


@dataclass(frozen=True)
class CountVector:
    """Nonnegative integer counts summing to the sample size n >= 1."""

    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        counts = tuple(self.counts)
        if len(counts) < 2:
            raise ValidationError(f"need k >= 2 coordinates, got {len(counts)}")
        for i, c in enumerate(counts):
            if not isinstance(c, (int, np.integer)) or isinstance(c, bool):
                raise ValidationError(f"count {i} is not an integer: {c!r}")
            if c < 0:
                raise ValidationError(f"count {i} is negative: {c}")
        if sum(counts) < 1:
            raise ValidationError("counts must sum to n >= 1")
        object.__setattr__(self, "counts", tuple(int(c) for c in counts))

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def k(self) -> int:
        return len(self.counts)

    def empirical(self) -> tuple[float, ...]:
        n = self.n
        return tuple(c / n for c in self.counts)


def _as_prob_tuple(q: "Distribution | CountVector | Sequence[float]") -> tuple[float, ...]:
    if isinstance(q, Distribution):
        return q.probs
    if isinstance(q, CountVector):
        return q.empirical()
    return Distribution(probs=tuple(float(x) for x in q)).probs


def kl(q: "Distribution | CountVector | Sequence[float]", p: Distribution) -> float:
    """D(Q || P) in nats with 0 log 0 = 0; +inf when Q charges a P-null atom.

    Terms are combined with exact compensated summation (math.fsum), so the
    result is deterministic and correctly rounded for the given terms.
    """
    qs = _as_prob_tuple(q)
    if len(qs) != p.k:
        raise ValidationError(f"alphabet mismatch: {len(qs)} vs {p.k}")
    terms = []
    for i, (qi, pi) in enumerate(zip(qs, p.probs)):
        if qi == 0.0:
            continue
        if pi == 0.0:
            return math.inf
        terms.append(qi * math.log(qi / pi))
    return math.fsum(terms)


def binary_kl(q: float, p: float) -> float:
    """KL divergence between Bernoulli(q) and Bernoulli(p)."""
    for name, v in (("q", q), ("p", p)):
        if not 0.0 <= v <= 1.0:
            raise ValidationError(f"{name} must be in [0, 1], got {v}")
    terms = []
    if q > 0.0:
        if p == 0.0:
            return math.inf
        terms.append(q * math.log(q / p))
    if q < 1.0:
        if p == 1.0:
            return math.inf
        terms.append((1.0 - q) * math.log((1.0 - q) / (1.0 - p)))
    return math.fsum(terms)


def l1(q: "Distribution | CountVector | Sequence[float]", p: Distribution) -> float:
    """||Q - P||_1, always in [0, 2]."""
    qs = _as_prob_tuple(q)
    if len(qs) != p.k:
        raise ValidationError(f"alphabet mismatch: {len(qs)} vs {p.k}")
    return math.fsum(abs(qi - pi) for qi, pi in zip(qs, p.probs))


def phi(p: float) -> float:
    """phi(p) = log((1-p)/p) / (1-2p) on (0, 1/2]; phi(1/2) = 2 by continuity.

    With d = 1 - 2p the function equals 2 atanh(d) / d, which handles the
    removable singularity at p = 1/2 without a series switch.  phi is
    nonincreasing and phi(p) >= 2 everywhere, with phi(1/4) = 2 log 3.
    """
    if not 0.0 < p <= 0.5:
        raise ValidationError(f"phi is defined on (0, 1/2], got {p}")
    d = 1.0 - 2.0 * p
    if d == 0.0:
        return 2.0
    return 2.0 * math.atanh(d) / d


_EXACT_PI_LIMIT = 20
_MITM_PI_LIMIT = 40


def _pi_from_best_mass(best: float) -> float:
    return min(best, 1.0 - best)


def _pi_exact(probs: Sequence[float]) -> float:
    # Complementary subsets give the same value, so pin the last element
    # outside A and enumerate the remaining 2^(k-1) subset masses.
    sums = _subset_sums(probs[:-1])
    best_mass = float(sums[np.argmin(np.abs(sums - 0.5))])
    return _pi_from_best_mass(best_mass)


def _subset_sums(vals: Sequence[float]) -> np.ndarray:
    sums = np.zeros(1)
    for v in vals:
        sums = np.concatenate([sums, sums + v])
    return sums


def _pi_meet_in_middle(probs: Sequence[float]) -> float:
    k = len(probs)
    left = probs[: k // 2]
    right = probs[k // 2 :]
    sums_l = _subset_sums(left)
    sums_r = np.sort(_subset_sums(right))
    best_gap = 0.5
    best_mass = 0.0
    targets = 0.5 - sums_l
    idx = np.searchsorted(sums_r, targets)
    for a, j in zip(sums_l, idx):
        for jj in (j - 1, j):
            if 0 <= jj < len(sums_r):
                mass = a + sums_r[jj]
                gap = abs(mass - 0.5)
                if gap < best_gap:
                    best_gap = gap
                    best_mass = mass
    return _pi_from_best_mass(best_mass)


def pi_P(p: Distribution) -> float:
    """max over subsets A of min(P(A), 1 - P(A)); always <= 1/2.

    Exact subset enumeration up to k = 20, meet-in-the-middle up to k = 40,
    and the conservative value 1/2 above that (phi is nonincreasing, so a
    larger pi_P weakens, never invalidates, the L1 bounds that consume it).
    Uniform P short-circuits to the analytic value: 1/2 for even k,
    floor(k/2)/k for odd k.
    """
    k = p.k
    if p.is_uniform():
        if k % 2 == 0:
            return 0.5
        return (k // 2) / k
    if k <= _EXACT_PI_LIMIT:
        return _pi_exact(p.probs)
    if k <= _MITM_PI_LIMIT:
        return _pi_meet_in_middle(p.probs)
    return 0.5


def parse_distribution(text: str, k: int | None = None) -> Distribution:
    """Parse 'uniform', a comma-separated list, or a JSON list of probabilities.

    'uniform' needs the alphabet size k.  Validation failures name the
    offending index.
    """
    text = text.strip()
    if text.lower() == "uniform":
        if k is None:
            raise ValidationError("'uniform' needs an explicit alphabet size k")
        return Distribution.uniform(k)
    if text.startswith("["):
        try:
            values = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid JSON list: {exc}") from exc
        if not isinstance(values, list):
            raise ValidationError("JSON input must be a list of probabilities")
    else:
        parts = [part.strip() for part in text.split(",") if part.strip()]
        values = []
        for i, part in enumerate(parts):
            try:
                values.append(float(part))
            except ValueError as exc:
                raise ValidationError(f"entry {i} is not a number: {part!r}") from exc
    dist = Distribution(probs=tuple(float(v) for v in values))
    if k is not None and dist.k != k:
        raise ValidationError(f"parsed k={dist.k} but expected k={k}")
    return dist
