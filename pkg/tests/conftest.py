"""Shared test helpers.

The KS and quadrature helpers here are deliberately independent of the
package code they are used to check.
"""

import numpy as np
import pytest

from statforge.rng import RandomStream


def ks_distance(sample, cdf) -> float:
    """Exact one-sample Kolmogorov-Smirnov statistic against ``cdf``."""
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    f = cdf(x)
    upper = np.max(np.arange(1, n + 1) / n - f)
    lower = np.max(f - np.arange(0, n) / n)
    return float(max(upper, lower))


def trapezoid_mass(pdf, lo, hi, n=200_001):
    """Trapezoid-rule integral of a density over [lo, hi]."""
    grid = np.linspace(lo, hi, n)
    return float(np.trapezoid(pdf(grid), grid))


@pytest.fixture
def stream():
    return RandomStream(20260810)
