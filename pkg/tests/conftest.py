"""Shared fixtures: deterministic random interior distributions."""

from __future__ import annotations

import numpy as np
import pytest

from klbounds.divergence import Distribution


def random_interior(k: int, rng: np.random.Generator, floor: float = 0.05) -> Distribution:
    """A strictly interior distribution on k symbols.

    Exponential raws normalized, then mixed with uniform so no atom falls
    below floor/k; keeps KL and enumeration weights finite and well
    scaled on the desk grid.
    """
    raw = rng.exponential(size=k)
    probs = (1.0 - floor) * raw / raw.sum() + floor / k
    probs[-1] = 1.0 - probs[:-1].sum()
    return Distribution(tuple(probs))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260824)


@pytest.fixture
def interior_dist(rng) -> Distribution:
    return random_interior(3, rng)
