"""Shared oracles and helpers for the test suite."""

import itertools
import math

import numpy as np
import pytest


def sigma_enumerated(k, x):
    """Elementary symmetric polynomial by brute-force enumeration.

    Independent oracle: sums products over all k-subsets.  Only usable for
    small n; the library itself must never do this.
    """
    x = list(x)
    if k == 0:
        return 1.0
    return math.fsum(math.prod(combo) for combo in itertools.combinations(x, k))


def quotient_enumerated(n, k, x):
    """Normalized sigma-quotient root via the enumeration oracle."""
    c = math.comb(n, k) ** (1.0 / (n - k))
    return c * (sigma_enumerated(n, x) / sigma_enumerated(k, x)) ** (1.0 / (n - k))


def random_spd_matrix(rng, n, log_range=(-2.0, 2.0)):
    """Random symmetric matrix with log-uniform positive spectrum."""
    lam = 10.0 ** rng.uniform(*log_range, size=n)
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return (q * lam) @ q.T


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
