"""Shared builders for the test suite.

Everything is seeded through counter-based generators so the suite is
deterministic run to run.  The heavier constructions (exactly periodic
two-dimensional wave data, constant commuting seeds for the three-term
reduction) live in latticedress.verify and are reused from there.
"""

import numpy as np
import pytest

from latticedress import ring
from latticedress.errors import LatticeDressError


def make_rng(seed):
    return np.random.Generator(np.random.Philox(seed))


def random_invertible(ctx, rng, tries=8):
    last = None
    for _ in range(tries):
        el = ctx.random(rng)
        try:
            ring.pointwise_inverse(el)
            return el
        except LatticeDressError as exc:
            last = exc
    raise last


def random_operator(ctx, rng, low, high):
    return ring.DifferenceOperator(
        low, high, {m: ctx.random(rng) for m in range(low, high + 1)}
    )


def random_matrix(rng, d, scale=1.0):
    return scale * (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))


@pytest.fixture
def ctx62():
    return ring.RingContext(6, 2, 1e-9)


@pytest.fixture
def rng():
    return make_rng(20260818)
