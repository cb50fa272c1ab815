"""Value distributions and the adversarial instances used by upper-bound
experiments.

Three families cover everything the rules and oracles need: Uniform01,
Exponential(rate), and DiscreteWeighted (finite atoms). Each exposes
cdf / quantile / sampling plus the closed-form moments the oracles and
the backward-induction rule rely on.

Conventions
-----------
quantile(q) is the generalized inverse: the smallest x with
cdf(x) >= q. At q = 0 this returns the infimum of the support rather
than -inf. Sampling maps a uniform u through the inverse CDF; for
discrete specs u lands on atom j when cum[j-1] <= u < cum[j].
"""

import json
import math

import numpy as np

from .errors import DomainError, UnsupportedSpecError


def _harmonic_float(n):
    # smallest terms first to limit rounding
    return math.fsum(1.0 / j for j in range(n, 0, -1))


class Uniform01:
    """Uniform distribution on [0, 1]."""

    kind = "uniform01"

    def cdf(self, x):
        return min(max(x, 0.0), 1.0)

    def cdf_left(self, x):
        return self.cdf(x)

    def cdf_array(self, xs):
        return np.clip(np.asarray(xs, dtype=np.float64), 0.0, 1.0)

    def cdf_left_array(self, xs):
        return self.cdf_array(xs)

    def quantile(self, q):
        _check_q(q)
        return float(q)

    def transform(self, u):
        """Map uniforms in [0,1) to draws (identity)."""
        return np.asarray(u, dtype=np.float64)

    def mean(self):
        return 0.5

    def expected_max(self, n):
        _check_n(n)
        return n / (n + 1.0)

    def expected_max_with(self, c):
        """E[max(X, c)]."""
        if c <= 0.0:
            return 0.5
        if c >= 1.0:
            return float(c)
        return 0.5 * (1.0 + c * c)

    def support_min(self):
        return 0.0

    def to_json(self):
        return {"kind": self.kind}

    def __repr__(self):
        return "Uniform01()"

    def __eq__(self, other):
        return isinstance(other, Uniform01)


class Exponential:
    """Exponential distribution with the given rate (mean 1/rate)."""

    kind = "exponential"

    def __init__(self, rate=1.0):
        if not (rate > 0):
            raise DomainError(f"rate must be positive, got {rate}")
        self.rate = float(rate)

    def cdf(self, x):
        if x <= 0.0:
            return 0.0
        return -math.expm1(-self.rate * x)

    def cdf_left(self, x):
        return self.cdf(x)

    def cdf_array(self, xs):
        xs = np.asarray(xs, dtype=np.float64)
        return np.where(xs > 0.0, -np.expm1(-self.rate * xs), 0.0)

    def cdf_left_array(self, xs):
        return self.cdf_array(xs)

    def quantile(self, q):
        _check_q(q)
        if q == 1.0:
            return math.inf
        return -math.log1p(-q) / self.rate

    def transform(self, u):
        return -np.log1p(-np.asarray(u, dtype=np.float64)) / self.rate

    def mean(self):
        return 1.0 / self.rate

    def expected_max(self, n):
        _check_n(n)
        return _harmonic_float(n) / self.rate

    def expected_max_with(self, c):
        if c <= 0.0:
            return 1.0 / self.rate
        return c + math.exp(-self.rate * c) / self.rate

    def support_min(self):
        return 0.0

    def to_json(self):
        return {"kind": self.kind, "rate": self.rate}

    def __repr__(self):
        return f"Exponential(rate={self.rate!r})"

    def __eq__(self, other):
        return isinstance(other, Exponential) and other.rate == self.rate


class DiscreteWeighted:
    """Finite distribution over strictly ascending non-negative atoms."""

    kind = "discrete"

    def __init__(self, values, probs):
        values = np.asarray(values, dtype=np.float64)
        probs = np.asarray(probs, dtype=np.float64)
        if values.ndim != 1 or probs.ndim != 1 or len(values) != len(probs):
            raise DomainError("values and probs must be 1-d and equally long")
        if len(values) == 0:
            raise DomainError("at least one atom required")
        if np.any(values < 0):
            raise DomainError("atom values must be non-negative")
        if np.any(np.diff(values) <= 0):
            raise DomainError("atom values must be strictly ascending")
        if np.any(probs <= 0):
            raise DomainError("atom probabilities must be positive")
        total = math.fsum(probs.tolist())
        if abs(total - 1.0) > 1e-12:
            raise DomainError(f"probabilities sum to {total}, not 1")
        self.values = values
        self.probs = probs
        cum = np.cumsum(probs)
        cum[-1] = 1.0
        self.cum = cum

    def cdf(self, x):
        idx = np.searchsorted(self.values, x, side="right")
        return float(self.cum[idx - 1]) if idx > 0 else 0.0

    def cdf_left(self, x):
        """P(X < x), the left limit of the CDF at x."""
        idx = np.searchsorted(self.values, x, side="left")
        return float(self.cum[idx - 1]) if idx > 0 else 0.0

    def cdf_array(self, xs):
        idx = np.searchsorted(self.values, np.asarray(xs), side="right")
        padded = np.concatenate(([0.0], self.cum))
        return padded[idx]

    def cdf_left_array(self, xs):
        idx = np.searchsorted(self.values, np.asarray(xs), side="left")
        padded = np.concatenate(([0.0], self.cum))
        return padded[idx]

    def quantile(self, q):
        _check_q(q)
        idx = int(np.searchsorted(self.cum, q, side="left"))
        idx = min(idx, len(self.values) - 1)
        return float(self.values[idx])

    def transform(self, u):
        idx = np.searchsorted(self.cum, np.asarray(u, dtype=np.float64),
                              side="right")
        return self.values[idx]

    def mean(self):
        return float(np.dot(self.values, self.probs))

    def expected_max(self, n):
        _check_n(n)
        hi = self.cum ** n
        lo = np.empty_like(hi)
        lo[0] = 0.0
        lo[1:] = hi[:-1]
        return float(np.dot(self.values, hi - lo))

    def expected_max_with(self, c):
        return float(np.dot(self.probs, np.maximum(self.values, c)))

    def support_min(self):
        return float(self.values[0])

    def to_json(self):
        return {"kind": self.kind,
                "values": self.values.tolist(),
                "probs": self.probs.tolist()}

    def __repr__(self):
        if len(self.values) > 6:
            return f"DiscreteWeighted(<{len(self.values)} atoms>)"
        return (f"DiscreteWeighted(values={self.values.tolist()!r}, "
                f"probs={self.probs.tolist()!r})")

    def __eq__(self, other):
        return (isinstance(other, DiscreteWeighted)
                and np.array_equal(other.values, self.values)
                and np.array_equal(other.probs, self.probs))


def _check_q(q):
    if not (0.0 <= q <= 1.0):
        raise DomainError(f"quantile level must lie in [0, 1], got {q}")


def _check_n(n):
    if n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")


# ---------------------------------------------------------------------------
# module-level operation surface

def sample_many(spec, count, stream):
    """Draw `count` i.i.d. values from `spec` using `stream`.

    Bit-identical for identical (spec, count, seed, purpose, trial)
    regardless of platform or how surrounding work is parallelized.
    """
    if count < 0:
        raise DomainError("count must be non-negative")
    if count == 0:
        return np.empty(0, dtype=np.float64)
    return spec.transform(stream.uniforms(count))


def cdf(spec, x):
    return spec.cdf(x)


def quantile(spec, q):
    return spec.quantile(q)


def exact_expected_max(spec, n):
    """E[max of n i.i.d. draws], in closed form per family."""
    if not hasattr(spec, "expected_max"):
        raise UnsupportedSpecError(f"no expected_max for {spec!r}")
    return spec.expected_max(n)


def adversarial_instance(kind, n, eps=None):
    """Hard instances for the upper-bound experiments.

    secretary_like: n^3 low atoms 1..n^3 plus a high atom n^6 + 1 that
    carries probability 1/n^2. three_point: atoms {0, 1, sqrt(n)/(e-2)}
    with the 1/sqrt(n), 1/n^(3/2) tail weights. rare_bernoulli: {0, 1}
    with P(1) = eps/n.
    """
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")
    if kind == "secretary_like":
        count = n ** 3
        low = (1.0 - 1.0 / n ** 2) / count
        values = np.arange(1, count + 2, dtype=np.float64)
        values[-1] = n ** 6 + 1
        probs = np.full(count + 1, low)
        probs[-1] = 1.0 / n ** 2
        return DiscreteWeighted(values, probs)
    if kind == "three_point":
        p1 = 1.0 / math.sqrt(n)
        p2 = n ** -1.5
        if p1 + p2 > 1.0:
            raise DomainError(f"three_point needs 1/sqrt(n) + n^-1.5 <= 1; "
                              f"n={n} gives {p1 + p2}")
        top = math.sqrt(n) / (math.e - 2.0)
        return DiscreteWeighted([0.0, 1.0, top], [1.0 - p1 - p2, p1, p2])
    if kind == "rare_bernoulli":
        if eps is None or not (0.0 < eps <= 1.0):
            raise DomainError("rare_bernoulli needs eps in (0, 1]")
        return DiscreteWeighted([0.0, 1.0], [1.0 - eps / n, eps / n])
    raise DomainError(f"unknown adversarial kind {kind!r}")


def from_json(obj):
    """Inverse of each spec's to_json; accepts a dict or a JSON string."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    kind = obj.get("kind")
    if kind == "uniform01":
        return Uniform01()
    if kind == "exponential":
        return Exponential(rate=obj.get("rate", 1.0))
    if kind == "discrete":
        return DiscreteWeighted(obj["values"], obj["probs"])
    raise DomainError(f"unknown distribution kind {kind!r}")
