"""Acceptance-probability schedules from the threshold ODE.

The per-step acceptance probabilities eps_1..eps_n of the
quantile-schedule rule come from the initial value problem

    y'(t) = y(t) * (ln y(t) - 1) - (beta - 1),    y(0) = 1,

integrated over [0, 1] with classical RK4. beta is calibrated by
bisection so that y(1) = 0, which lands at beta = 1.34148... (whose
reciprocal is 0.74544...). The schedule is eps_i = 1 - y(i/n)^(1/(n-1))
with eps_0 = 0 and eps_n = 1 forced exactly.
"""

import math
from functools import lru_cache

import numpy as np

from .errors import ComputationError, DomainError

# working constant when the caller does not calibrate
BETA_DEFAULT = 1.3414

DEFAULT_STEP = 1e-5

# y values below this are treated as an exact zero when the curve is
# raised to the power 1/(n-1); the calibrated curve only reaches this
# region at t = 1, where eps is forced to 1 anyway
Y_SNAP = 1e-9

_Y_FLOOR = 1e-14


class YCurve:
    """RK4 solution grid of the threshold ODE on [0, 1]."""

    def __init__(self, beta, h, ys):
        self.beta = beta
        self.h = h
        self.ys = ys

    @property
    def ts(self):
        return np.linspace(0.0, 1.0, len(self.ys))

    def y_at(self, t):
        """Linear interpolation between grid points."""
        return float(np.interp(t, self.ts, self.ys))

    def __repr__(self):
        return f"YCurve(beta={self.beta!r}, points={len(self.ys)})"


class QuantileSchedule:
    """Acceptance probabilities eps_0 = 0 < eps_1 < ... < eps_n = 1."""

    def __init__(self, n, eps):
        self.n = n
        self.eps = eps

    def __repr__(self):
        return f"QuantileSchedule(n={self.n})"


def _rhs(y, beta):
    if y <= _Y_FLOOR:
        # limit of y*ln(y) is 0
        return -(beta - 1.0)
    return y * (math.log(y) - 1.0) - (beta - 1.0)


def solve_hill_kertz(beta, step=DEFAULT_STEP):
    """Integrate the threshold ODE with RK4 at the given step size.

    y is clamped to [0, 1] after every step, and the y*ln(y) term is
    evaluated as 0 below 1e-14, so the integration passes cleanly
    through the y = 0 boundary that the calibrated curve reaches at
    t = 1. The step is rounded so the grid lands on t = 1 exactly.
    """
    if not (0.0 < step <= 1e-3):
        raise DomainError(f"step must lie in (0, 1e-3], got {step}")
    if not (1.0 < beta < 2.0):
        raise DomainError(f"beta must lie in (1, 2), got {beta}")
    nsteps = max(1, round(1.0 / step))
    h = 1.0 / nsteps
    ys = np.empty(nsteps + 1)
    ys[0] = 1.0
    y = 1.0
    h6 = h / 6.0
    h2 = h / 2.0
    for s in range(nsteps):
        k1 = _rhs(y, beta)
        k2 = _rhs(min(max(y + h2 * k1, 0.0), 1.0), beta)
        k3 = _rhs(min(max(y + h2 * k2, 0.0), 1.0), beta)
        k4 = _rhs(min(max(y + h * k3, 0.0), 1.0), beta)
        y += h6 * (k1 + 2.0 * (k2 + k3) + k4)
        y = min(max(y, 0.0), 1.0)
        ys[s + 1] = y
    return YCurve(beta, h, ys)


@lru_cache(maxsize=8)
def calibrate_beta(tol, step=DEFAULT_STEP):
    """Bisect beta in [1.30, 1.40] until y(1) = 0 within tol.

    Returns the smallest bracketed beta whose terminal value is <= tol.
    """
    if tol < 1e-10:
        raise DomainError(f"tol must be at least 1e-10, got {tol}")
    lo, hi = 1.30, 1.40
    flo = solve_hill_kertz(lo, step).ys[-1]
    fhi = solve_hill_kertz(hi, step).ys[-1]
    if not (flo > tol >= fhi):
        raise ComputationError(
            f"calibration bracket failed: y(1)@{lo}={flo}, y(1)@{hi}={fhi}")
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if solve_hill_kertz(mid, step).ys[-1] > tol:
            lo = mid
        else:
            hi = mid
    if not (1.34 <= hi <= 1.35):
        raise ComputationError(f"calibrated beta {hi} outside [1.34, 1.35]")
    return hi


def quantile_schedule(n, curve):
    """Build the eps schedule for horizon n from a solved curve.

    eps_0 = 0 and eps_n = 1 exactly; interior entries use linear
    interpolation of y and a minimal ascending repair (1e-12 steps) to
    keep the sequence strictly increasing.
    """
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")
    eps = np.zeros(n + 1)
    ts = np.arange(1, n, dtype=np.float64) / n
    yi = np.interp(ts, curve.ts, curve.ys)
    exponent = 1.0 / (n - 1.0)
    x = np.where(yi > Y_SNAP, yi, 1.0) ** exponent
    x[yi <= Y_SNAP] = 0.0
    eps[1:n] = 1.0 - x
    eps[n] = 1.0
    for i in range(1, n):
        if eps[i] <= eps[i - 1]:
            eps[i] = eps[i - 1] + 1e-12
    if eps[n - 1] >= 1.0:
        raise ComputationError(f"schedule degenerate at n={n}: interior "
                               "acceptance reached 1")
    return QuantileSchedule(n, eps)
