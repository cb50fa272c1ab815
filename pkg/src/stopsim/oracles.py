"""Exact and quasi-exact reference values for the closed-form quantities.

Everything here is independent of the Monte Carlo machinery: rational
arithmetic where an exact identity is claimed, closed forms where they
exist, adaptive quadrature for the revenue-integral identity, and a
grid search for the three-point ceiling. The acceptance suite treats
these as ground truth.
"""

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate as _integrate

from .errors import ComputationError, DomainError, UnsupportedSpecError

# Euler-Mascheroni constant to 20 digits
GAMMA_EM = 0.57721566490153286061


@dataclass(frozen=True)
class ExactValue:
    """A reference value plus how it was obtained.

    exact carries the Fraction when the method is exact_rational;
    error_bound carries the quadrature bound when applicable.
    """

    value: float
    method: str
    exact: Fraction | None = None
    error_bound: float | None = None


def harmonic(n):
    """H_n, summed smallest term first."""
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    return ExactValue(math.fsum(1.0 / j for j in range(n, 0, -1)),
                      "closed_form")


def _harmonic_fractions(upto):
    """H_1..H_upto as Fractions (index 0 unused)."""
    hs = [Fraction(0)] * (upto + 1)
    acc = Fraction(0)
    for j in range(1, upto + 1):
        acc += Fraction(1, j)
        hs[j] = acc
    return hs


def single_threshold_stop_prob(n):
    """P(stop before the forced last step) for the max-of-samples rule.

    The telescoping sum (n-1) / ((n-1+i)(n-2+i)) over i = 1..n-1 equals
    exactly 1/2 for every n >= 2; computed in rational arithmetic so the
    equality is exact, not approximate.
    """
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")
    total = Fraction(0)
    for i in range(1, n):
        total += Fraction(n - 1, (n - 1 + i) * (n - 2 + i))
    return ExactValue(float(total), "exact_rational", exact=total)


def single_threshold_exp_value(n):
    """E[reward] of the max-of-samples rule on Exponential(1).

    Rational sum over stop indices plus the forced-last-step term 1/2
    (P(reach last) = 1/2 times E[X] = 1); cross-checked against the
    digamma closed form H_(n-1) + 1 - H_(2n-2)/2 to 1e-10.
    """
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")
    hs = _harmonic_fractions(2 * n - 2)
    total = Fraction(0)
    for i in range(1, n):
        total += hs[n - 1 + i] * Fraction(1, n - 1 + i) \
            * Fraction(n - 1, n - 2 + i)
    total += Fraction(1, 2)
    value = float(total)
    closed = float(hs[n - 1]) + 1.0 - float(hs[2 * n - 2]) / 2.0
    if abs(value - closed) > 1e-10:
        raise ComputationError(
            f"sum form {value} and digamma form {closed} disagree at n={n}")
    return ExactValue(value, "exact_rational", exact=total)


def fresh_samples_guarantee(n):
    """1 - (1 - 1/n)^n, the pool rule's exact ratio at horizon n."""
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    return ExactValue(1.0 - ((n - 1.0) / n) ** n, "closed_form")


def b_gamma(gamma):
    """Guarantee constant for the secretary rule with gamma*n samples."""
    if gamma < 0:
        raise DomainError(f"gamma must be non-negative, got {gamma}")
    ratio = gamma / (1.0 + gamma)
    if 1.0 / math.e >= ratio:
        return ExactValue((1.0 + gamma) / math.e, "closed_form")
    return ExactValue(-gamma * math.log(ratio), "closed_form")


def dp_threshold_vector(spec, n):
    """Backward-induction continuation values.

    Returns (V_1, thresholds) where thresholds[i-1] = V_(i+1) is the
    bar the i-th value must clear; V_(n+1) = 0.
    """
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    if not hasattr(spec, "expected_max_with"):
        raise UnsupportedSpecError(f"no E[max(X, c)] for {spec!r}")
    thr = np.empty(n)
    v = 0.0
    for i in range(n - 1, -1, -1):
        thr[i] = v
        v = spec.expected_max_with(v)
    return v, thr


def dp_value(spec, n):
    """Value of the optimal (backward-induction) rule."""
    v, _ = dp_threshold_vector(spec, n)
    return ExactValue(v, "closed_form")


def three_point_best_ratio(n, grid_size=10_000):
    """Best ratio any constant-acceptance rule gets on the 3-point instance.

    Scans alpha*sqrt(n) over (0, 10] on a grid_size grid (clipped to
    alpha <= 1). The per-step stop probability is
    s = n^(-3/2) + alpha/sqrt(n) and the per-step reward contribution is
    1/(n(e-2)) + alpha/sqrt(n); the ratio follows in closed form, no
    Monte Carlo involved.
    """
    from .distributions import adversarial_instance

    if n < 4:
        raise DomainError(f"n must be at least 4, got {n}")
    if grid_size < 1:
        raise DomainError("grid_size must be positive")
    emax = adversarial_instance("three_point", n).expected_max(n)
    sqrt_n = math.sqrt(n)
    h = 10.0 / grid_size
    xs = h * np.arange(1, grid_size + 1)      # alpha * sqrt(n)
    alphas = xs / sqrt_n
    alphas = alphas[alphas <= 1.0]
    s = n ** -1.5 + alphas / sqrt_n
    contrib = 1.0 / (n * (math.e - 2.0)) + alphas / sqrt_n
    reward = contrib * -np.expm1(n * np.log1p(-s)) / s
    ratios = reward / emax
    j = int(np.argmax(ratios))
    return float(alphas[j]), float(ratios[j])


def expected_max_via_rq(spec, n):
    """E[max of n draws] through the revenue-curve identity.

    Integrates n(n-1) * (1-q)^(n-2) * R(q) over q in [0,1], with
    R(q) = integral of the quantile F^(-1)(1-theta) for theta up to q,
    both by adaptive quadrature. Must agree with the closed form.
    """
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")
    if not hasattr(spec, "quantile"):
        raise UnsupportedSpecError(f"no quantile for {spec!r}")

    def inv(theta):
        return spec.quantile(1.0 - theta)

    def revenue(q):
        if q <= 0.0:
            return 0.0
        # tight inner tolerance so outer refinement is not noise limited
        val, _ = _integrate.quad(inv, 0.0, q, limit=200,
                                 epsabs=1e-13, epsrel=1e-13)
        return val

    def outer(q):
        return (1.0 - q) ** (n - 2) * revenue(q)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _integrate.IntegrationWarning)
        value, abserr = _integrate.quad(outer, 0.0, 1.0, limit=200,
                                        epsabs=1e-12, epsrel=1e-12)
    value *= n * (n - 1.0)
    abserr *= n * (n - 1.0)
    if not math.isfinite(value):
        raise ComputationError(
            f"revenue integral diverged for {spec!r}, n={n}: {value}")
    if abserr > 1e-8:
        raise ComputationError(
            f"revenue integral error bound {abserr} exceeds 1e-8 "
            f"for {spec!r}, n={n}")
    return ExactValue(value, "quadrature", error_bound=abserr)
