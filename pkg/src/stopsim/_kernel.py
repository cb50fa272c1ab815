"""Kernel selection and the per-config simulation plan.

A Plan freezes everything trial-independent about one evaluation
(horizon, sample count, per-index thresholds or ranks, atom values) so
kernels only loop over trials. Both kernels take the same Plan; the
compiled one gets it flattened into scalars and arrays.

The compiled extension is preferred when importable. Set STOPSIM_PURE=1
to force the numpy fallback, or pass kernel="pure"/"compiled"," to pin
one explicitly.
"""

import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import _kernel_py
from .distributions import DiscreteWeighted, Exponential, Uniform01
from .empirical import EmpiricalCdf, quantile_rank
from .errors import DomainError, UsageError
from .oracles import dp_threshold_vector
from .rules import (QuantileScheduleRule, SecretaryRule,
                    SecretarySamplesRule)

try:
    from . import _ckernel
except ImportError:
    _ckernel = None

HAVE_COMPILED = _ckernel is not None

_EMPTY_F8 = np.empty(0, dtype=np.float64)
_EMPTY_I8 = np.empty(0, dtype=np.int64)


@dataclass
class Plan:
    kind: str
    seed: int
    n: int
    k: int
    dist: object
    cutoff_count: int = 0
    eligible_from: float = 0.0
    strict: int = 0
    thresholds: np.ndarray = field(default_factory=lambda: _EMPTY_F8)
    ranks: np.ndarray = field(default_factory=lambda: _EMPTY_I8)
    kskip: int = 0
    alpha: float = 0.0
    high_value: float = math.nan


def build_plan(rule_spec, dist, n, seed):
    """Freeze one (rule, dist, n, seed) configuration into a Plan."""
    name = rule_spec.name
    k = rule_spec.sample_count(n)
    plan = Plan(kind=name, seed=seed, n=n, k=k, dist=dist)

    if name == "secretary":
        probe = SecretaryRule(n, rule_spec.cutoff)
        plan.cutoff_count = probe.cutoff_count

    elif name == "secretary_samples":
        probe = SecretarySamplesRule(n, rule_spec.gamma, np.zeros(k))
        plan.eligible_from = probe.eligible_from

    elif name == "quantile_schedule":
        sched = rule_spec.schedule_for(n)
        if rule_spec.source == "exact":
            probe = QuantileScheduleRule(n, sched, dist, rule_spec.delta)
            plan.kind = "thresholds"
            plan.strict = 1
            plan.thresholds = np.asarray(probe.thresholds[1:], dtype=np.float64)
        else:
            probe = QuantileScheduleRule(n, sched,
                                         EmpiricalCdf(np.zeros(k)),
                                         rule_spec.delta)
            plan.kind = "quantile_empirical"
            plan.kskip = probe.kskip
            ranks = np.empty(n + 1, dtype=np.int64)
            ranks[0] = -1
            for i in range(1, n + 1):
                if i <= probe.kskip:
                    ranks[i] = -1
                elif probe.eps[i] >= 1.0:
                    ranks[i] = 0
                else:
                    ranks[i] = quantile_rank(k, 1.0 - probe.eps[i])
            plan.ranks = ranks

    elif name == "dp":
        _, thresholds = dp_threshold_vector(dist, n)
        plan.kind = "thresholds"
        plan.strict = 0
        plan.thresholds = np.asarray(thresholds, dtype=np.float64)

    elif name == "constant_alpha":
        plan.alpha = rule_spec.alpha
        plan.high_value = rule_spec._high_value(dist)

    elif name not in ("single_threshold", "fresh_samples"):
        raise DomainError(f"unknown rule {name!r}")

    return plan


def resolve_kernel(kernel="auto"):
    """Pick the kernel implementation: 'compiled' or 'pure'."""
    if kernel not in ("auto", "compiled", "pure"):
        raise UsageError(f"kernel must be auto, compiled or pure, "
                         f"got {kernel!r}")
    forced_pure = os.environ.get("STOPSIM_PURE", "") not in ("", "0")
    if kernel == "compiled":
        if not HAVE_COMPILED:
            raise UsageError("compiled kernel requested but the extension "
                             "is not importable")
        return "compiled"
    if kernel == "pure" or forced_pure or not HAVE_COMPILED:
        return "pure"
    return "compiled"


_KIND_CODES = None


def _kind_code(kind):
    global _KIND_CODES
    if _KIND_CODES is None:
        _KIND_CODES = {
            "secretary": _ckernel.KIND_SECRETARY,
            "secretary_samples": _ckernel.KIND_SECRETARY_SAMPLES,
            "single_threshold": _ckernel.KIND_SINGLE_THRESHOLD,
            "fresh_samples": _ckernel.KIND_FRESH_SAMPLES,
            "thresholds": _ckernel.KIND_THRESHOLDS,
            "quantile_empirical": _ckernel.KIND_QUANTILE_EMPIRICAL,
            "constant_alpha": _ckernel.KIND_CONSTANT_ALPHA,
        }
    return _KIND_CODES[kind]


def _dist_args(dist):
    if isinstance(dist, Uniform01):
        return 0, 0.0, _EMPTY_F8, _EMPTY_F8
    if isinstance(dist, Exponential):
        return 1, dist.rate, _EMPTY_F8, _EMPTY_F8
    if isinstance(dist, DiscreteWeighted):
        return (2, 0.0,
                np.ascontiguousarray(dist.values, dtype=np.float64),
                np.ascontiguousarray(dist.cum, dtype=np.float64))
    raise DomainError(f"kernels do not support distribution {dist!r}")


def alloc_out(count):
    """Per-trial output arrays one block's kernel run fills."""
    return {
        "reward": np.empty(count, dtype=np.float64),
        "realized_max": np.empty(count, dtype=np.float64),
        "stop_index": np.empty(count, dtype=np.int32),
        "stop_at_max": np.empty(count, dtype=np.uint8),
        "violation": np.empty(count, dtype=np.uint8),
    }


def run_block(plan, t0, t1, out, which):
    """Fill `out` with trials [t0, t1) of `plan` using kernel `which`."""
    if which == "pure":
        _kernel_py.run_block(plan, t0, t1, out)
        return
    did, rate, dval, dcum = _dist_args(plan.dist)
    _ckernel.run_block(
        _kind_code(plan.kind), plan.seed, t0, t1, plan.n, plan.k,
        did, rate, dval, dcum,
        plan.cutoff_count, plan.eligible_from, plan.strict,
        plan.thresholds, plan.ranks, plan.kskip,
        plan.alpha,
        plan.high_value,
        out["reward"], out["realized_max"], out["stop_index"],
        out["stop_at_max"], out["violation"])
