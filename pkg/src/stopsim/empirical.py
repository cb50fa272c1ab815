"""Empirical CDFs, order-statistic quantiles, and DKW confidence bands."""

import math

import numpy as np

from .errors import DomainError


class EmpiricalCdf:
    """Sorted sample set representing the empirical distribution."""

    def __init__(self, sorted_samples):
        self.samples = sorted_samples

    @property
    def m(self):
        return len(self.samples)

    def __repr__(self):
        return f"EmpiricalCdf(m={self.m})"


def build_empirical(samples):
    """Sort a non-empty sample list into an EmpiricalCdf.

    Input order is irrelevant; the input is copied.
    """
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim != 1 or len(arr) == 0:
        raise DomainError("samples must be a non-empty 1-d collection")
    return EmpiricalCdf(np.sort(arr))


def quantile_rank(m, q):
    """1-based order-statistic rank the q-quantile reads from m samples."""
    if not (0.0 < q <= 1.0):
        raise DomainError(f"q must lie in (0, 1], got {q}")
    return max(1, math.ceil(q * m))


def empirical_quantile(ecdf, q):
    """The ceil(q*m)-th smallest sample, for q in (0, 1]."""
    rank = quantile_rank(ecdf.m, q)
    return float(ecdf.samples[rank - 1])


def dkw_epsilon(m, alpha):
    """Half-width of the DKW band: sup-distance exceeds it w.p. <= alpha."""
    if m < 1:
        raise DomainError(f"m must be a positive integer, got {m}")
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * m))


def sup_distance(ecdf, spec):
    """Exact Kolmogorov-Smirnov statistic sup_x |ecdf(x) - F(x)|.

    Uses the two-sided order-statistic form with left limits of F, so
    the statistic is exact for discrete specs as well: the upward part
    compares i/m against F(x_(i)) and the downward part compares
    F(x_(i)^-) against (i-1)/m.
    """
    xs = ecdf.samples
    m = ecdf.m
    grid = np.arange(1, m + 1, dtype=np.float64) / m
    up = grid - spec.cdf_array(xs)
    down = spec.cdf_left_array(xs) - (grid - 1.0 / m)
    return max(0.0, float(up.max()), float(down.max()))
