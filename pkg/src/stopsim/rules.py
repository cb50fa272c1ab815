"""Stopping rules as stepping state machines.

Every rule follows one contract: construct with horizon n (plus its
init samples when the family uses them), then feed values one at a
time through advance(), which returns Decision.STOP or
Decision.CONTINUE. A rule that stopped, or that has consumed n values,
must not be stepped again. If all n values pass without a stop, the
trial's reward is 0 by convention.

Comparison conventions (they matter on discrete instances): the
sample-pool rules (single_threshold, fresh_samples) stop on >= against
their threshold; the secretary rules stop on > against the running
maximum; the quantile-schedule rule stops on > against the quantile.
Internal randomness is budgeted exactly: one uniform per rejection in
fresh_samples' eviction, one per middle-atom decision in
constant_alpha, none anywhere else.
"""

import enum
import json
import math
from dataclasses import dataclass

import numpy as np

from . import schedule as _schedule
from .distributions import DiscreteWeighted, from_json as _dist_from_json
from .empirical import EmpiricalCdf, build_empirical, empirical_quantile
from .errors import DomainError, UsageError
from .oracles import dp_threshold_vector


class Decision(enum.Enum):
    STOP = "stop"
    CONTINUE = "continue"


class Rule:
    """Shared stepping skeleton; subclasses implement _decide."""

    def __init__(self, n, k):
        if n < 1:
            raise DomainError(f"n must be a positive integer, got {n}")
        self.n = n
        self.k = k
        self.position = 0          # values consumed so far
        self.stopped = False

    def advance(self, value, stream=None):
        if self.stopped:
            raise UsageError("rule already stopped")
        if self.position >= self.n:
            raise UsageError(f"rule already consumed all {self.n} values")
        self.position += 1
        decision = self._decide(self.position, value, stream)
        if decision is Decision.STOP:
            self.stopped = True
        return decision

    def _decide(self, i, value, stream):
        raise NotImplementedError


def advance(rule, value, stream=None):
    """Step `rule` with the next value; see Rule.advance."""
    return rule.advance(value, stream)


def _check_samples(samples, k):
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim != 1 or len(arr) != k:
        raise DomainError(f"rule needs exactly {k} init samples, "
                          f"got {len(np.atleast_1d(arr))}")
    return arr


class SecretaryRule(Rule):
    """Reject a fixed prefix, then take the first running maximum."""

    def __init__(self, n, cutoff_fraction=1.0 / math.e):
        if not (0.0 < cutoff_fraction < 1.0):
            raise DomainError(
                f"cutoff_fraction must lie in (0, 1), got {cutoff_fraction}")
        super().__init__(n, 0)
        self.cutoff_count = int(math.floor(cutoff_fraction * n))
        self.running_max = -math.inf

    def _decide(self, i, value, stream):
        if i > self.cutoff_count and value > self.running_max:
            return Decision.STOP
        if value > self.running_max:
            self.running_max = value
        return Decision.CONTINUE


class SecretarySamplesRule(Rule):
    """Secretary rule over the combined sequence of samples and values.

    The k = gamma*n samples act as a rejected prefix; a value at
    combined position p is eligible once p >= x*(n+k) with
    x = max(1/e, gamma/(1+gamma)), and is taken when it beats
    everything seen in the combined sequence.
    """

    def __init__(self, n, gamma, samples):
        if gamma < 0:
            raise DomainError(f"gamma must be non-negative, got {gamma}")
        k_real = gamma * n
        k = int(round(k_real))
        if abs(k_real - k) > 1e-9:
            raise DomainError(f"gamma*n must be integral, got {k_real}")
        super().__init__(n, k)
        samples = _check_samples(samples, k)
        self.gamma = gamma
        self.x = max(1.0 / math.e, gamma / (1.0 + gamma))
        self.eligible_from = self.x * (n + k)
        self.running_max = float(samples.max()) if k else -math.inf

    def _decide(self, i, value, stream):
        if self.k + i >= self.eligible_from and value > self.running_max:
            return Decision.STOP
        if value > self.running_max:
            self.running_max = value
        return Decision.CONTINUE


class SingleThresholdRule(Rule):
    """Compare against the max of n-1 samples; forced stop at the end."""

    def __init__(self, n, samples):
        super().__init__(n, n - 1)
        samples = _check_samples(samples, n - 1)
        self.threshold = float(samples.max()) if n > 1 else -math.inf

    def _decide(self, i, value, stream):
        if i == self.n or value >= self.threshold:
            return Decision.STOP
        return Decision.CONTINUE


class FreshSamplesRule(Rule):
    """Stop at the first value that tops a pool of n-1 samples.

    On rejection the value joins the pool and one uniformly chosen
    element of the resulting n-element set is evicted (one uniform
    consumed per rejection), keeping the pool's marginal law fresh.
    """

    def __init__(self, n, samples):
        super().__init__(n, n - 1)
        samples = _check_samples(samples, n - 1)
        self.pool = samples.copy()
        self.pool_max = float(samples.max()) if n > 1 else -math.inf
        self.last_threshold = math.inf
        self.threshold_violated = False

    def _decide(self, i, value, stream):
        if self.pool_max > self.last_threshold:
            self.threshold_violated = True
        self.last_threshold = self.pool_max
        if value >= self.pool_max:
            return Decision.STOP
        u = stream.next_uniform()
        j = int(u * self.n)
        if j < self.n - 1:
            evicted = self.pool[j]
            self.pool[j] = value
            if evicted == self.pool_max:
                self.pool_max = float(self.pool.max())
        return Decision.CONTINUE


class QuantileScheduleRule(Rule):
    """Accept the i-th value above the (1 - eps_i)-quantile.

    The quantile source is either a distribution spec (exact) or an
    EmpiricalCdf built from the rule's own samples. Indices whose
    acceptance probability is below delta/n are skipped outright;
    eps = 1 accepts unconditionally.
    """

    def __init__(self, n, sched, quantile_source, delta):
        if sched.n != n:
            raise DomainError(f"schedule built for n={sched.n}, rule n={n}")
        if not (0.0 < delta < 1.0):
            raise DomainError(f"delta must lie in (0, 1), got {delta}")
        if isinstance(quantile_source, EmpiricalCdf):
            k = quantile_source.m
            qfun = lambda q: empirical_quantile(quantile_source, q)  # noqa: E731
        else:
            k = 0
            qfun = quantile_source.quantile
        super().__init__(n, k)
        eps = sched.eps
        cut = delta / n
        kskip = next(i for i in range(1, n + 1) if eps[i] >= cut)
        thresholds = np.full(n + 1, math.inf)
        for i in range(kskip + 1, n + 1):
            thresholds[i] = -math.inf if eps[i] >= 1.0 else qfun(1.0 - eps[i])
        self.eps = eps
        self.kskip = kskip
        self.thresholds = thresholds

    def _decide(self, i, value, stream):
        if i <= self.kskip:
            return Decision.CONTINUE
        if self.eps[i] >= 1.0 or value > self.thresholds[i]:
            return Decision.STOP
        return Decision.CONTINUE


class DpRule(Rule):
    """Backward-induction rule: stop once a value clears V_(i+1)."""

    def __init__(self, spec, n):
        _, thresholds = dp_threshold_vector(spec, n)
        super().__init__(n, 0)
        self.thresholds = thresholds

    def _decide(self, i, value, stream):
        if value >= self.thresholds[i - 1]:
            return Decision.STOP
        return Decision.CONTINUE


class ConstantAlphaRule(Rule):
    """Take the top atom always, the middle atom with probability alpha."""

    def __init__(self, n, alpha, high_value):
        if not (0.0 <= alpha <= 1.0):
            raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
        super().__init__(n, 0)
        self.alpha = alpha
        self.high_value = high_value

    def _decide(self, i, value, stream):
        if value == self.high_value:
            return Decision.STOP
        if value == 1.0:
            if stream.next_uniform() < self.alpha:
                return Decision.STOP
        return Decision.CONTINUE


# constructor surface mirroring the rule families

def secretary_rule(n, cutoff_fraction=1.0 / math.e):
    return SecretaryRule(n, cutoff_fraction)


def secretary_with_samples_rule(n, gamma, samples):
    return SecretarySamplesRule(n, gamma, samples)


def single_threshold_rule(n, samples):
    return SingleThresholdRule(n, samples)


def fresh_samples_rule(n, samples):
    return FreshSamplesRule(n, samples)


def quantile_schedule_rule(n, sched, quantile_source, delta):
    return QuantileScheduleRule(n, sched, quantile_source, delta)


def dp_rule(spec, n):
    return DpRule(spec, n)


def constant_alpha_rule(n, alpha, high_value):
    return ConstantAlphaRule(n, alpha, high_value)


RULE_NAMES = ("secretary", "secretary_samples", "single_threshold",
              "fresh_samples", "quantile_schedule", "dp", "constant_alpha")


@dataclass
class RuleSpec:
    """Parsed, validated rule configuration; builds per-trial rules."""

    name: str
    cutoff: float = 1.0 / math.e
    gamma: float = 1.0
    delta: float = 0.1
    source: str = "exact"
    m: int = 0
    beta: float | None = None
    step: float = _schedule.DEFAULT_STEP
    tol: float = 1e-6
    alpha: float = 0.5
    high_value: float | None = None

    def __post_init__(self):
        if self.name not in RULE_NAMES:
            raise DomainError(f"unknown rule {self.name!r}; "
                              f"expected one of {RULE_NAMES}")
        if self.name == "quantile_schedule":
            if self.source not in ("exact", "empirical"):
                raise DomainError(
                    f"source must be exact or empirical, got {self.source!r}")
            if self.source == "empirical" and self.m < 1:
                raise DomainError("empirical source needs m >= 1 samples")
        self._sched_cache = {}

    def sample_count(self, n):
        """How many init samples the rule draws at horizon n."""
        if self.name in ("single_threshold", "fresh_samples"):
            return n - 1
        if self.name == "secretary_samples":
            k_real = self.gamma * n
            k = int(round(k_real))
            if abs(k_real - k) > 1e-9:
                raise DomainError(f"gamma*n must be integral, got {k_real}")
            return k
        if self.name == "quantile_schedule" and self.source == "empirical":
            return self.m
        return 0

    def schedule_for(self, n):
        """The eps schedule at horizon n (calibrated once, then cached)."""
        if n not in self._sched_cache:
            beta = self.beta
            if beta is None:
                beta = _schedule.calibrate_beta(self.tol, self.step)
            curve = _schedule.solve_hill_kertz(beta, self.step)
            self._sched_cache[n] = _schedule.quantile_schedule(n, curve)
        return self._sched_cache[n]

    def make(self, n, dist, samples):
        """Instantiate the rule for one trial."""
        name = self.name
        if name == "secretary":
            return SecretaryRule(n, self.cutoff)
        if name == "secretary_samples":
            return SecretarySamplesRule(n, self.gamma, samples)
        if name == "single_threshold":
            return SingleThresholdRule(n, samples)
        if name == "fresh_samples":
            return FreshSamplesRule(n, samples)
        if name == "quantile_schedule":
            sched = self.schedule_for(n)
            if self.source == "exact":
                return QuantileScheduleRule(n, sched, dist, self.delta)
            ecdf = build_empirical(samples)
            return QuantileScheduleRule(n, sched, ecdf, self.delta)
        if name == "dp":
            return DpRule(dist, n)
        if name == "constant_alpha":
            return ConstantAlphaRule(n, self.alpha, self._high_value(dist))
        raise DomainError(f"unknown rule {name!r}")

    def _high_value(self, dist):
        if self.high_value is not None:
            return self.high_value
        if isinstance(dist, DiscreteWeighted):
            return float(dist.values[-1])
        raise DomainError("constant_alpha needs high_value for "
                          "non-discrete distributions")

    def to_json(self):
        out = {"rule": self.name}
        if self.name == "secretary":
            out["cutoff"] = self.cutoff
        elif self.name == "secretary_samples":
            out["gamma"] = self.gamma
        elif self.name == "quantile_schedule":
            out.update(delta=self.delta, source=self.source, step=self.step,
                       tol=self.tol)
            if self.source == "empirical":
                out["m"] = self.m
            if self.beta is not None:
                out["beta"] = self.beta
        elif self.name == "constant_alpha":
            out["alpha"] = self.alpha
            if self.high_value is not None:
                out["high_value"] = self.high_value
        return out


_RULE_SPEC_KEYS = {"rule", "cutoff", "gamma", "delta", "source", "m",
                   "beta", "step", "tol", "alpha", "high_value"}


def rule_spec_from_json(obj):
    """Parse {"rule": name, params...} from a dict or JSON string."""
    if isinstance(obj, str):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError:
            # bare rule name shorthand
            obj = {"rule": obj}
    if "rule" not in obj:
        raise DomainError("rule spec needs a 'rule' field")
    unknown = set(obj) - _RULE_SPEC_KEYS
    if unknown:
        raise DomainError(f"unknown rule spec fields: {sorted(unknown)}")
    kwargs = {k: v for k, v in obj.items() if k != "rule"}
    return RuleSpec(obj["rule"], **kwargs)
