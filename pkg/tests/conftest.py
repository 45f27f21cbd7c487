"""Shared fixtures: seeded random suites, reused across test modules."""

import numpy as np
import pytest

from csym import fixtures


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260810)


@pytest.fixture(scope="session")
def small_suite():
    """A couple dozen smooth random functions at 128^2 for module tests."""
    return [fixtures.random_bumps(seed, n=128) for seed in range(24)]
