"""Monte Carlo evaluation: trial orchestration, reduction, reports.

Determinism contract: trial t of a (rule, dist, n, seed) configuration
consumes the same Philox streams no matter which kernel runs it, how
many workers run, or how trials are split into blocks. Reduction folds
fixed-size blocks in block order with Python-float accumulators, so a
report is byte-identical across worker counts.

run_trial is the reference path: it steps an actual Rule object value
by value. The kernels replay the same decisions in bulk; parity tests
hold them together.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernel
from ._philox import (PURPOSE_AUX, PURPOSE_RULE, PURPOSE_SAMPLES,
                      PURPOSE_VALUES, Stream, block_uniforms)
from .errors import DomainError
from .rules import Decision

BLOCK = 8192
Z95 = 1.959963984540054

_MEDIAN_CHUNK_WORDS = 4_000_000


@dataclass
class EvalConfig:
    """One complete evaluation request."""

    rule: object                # RuleSpec
    dist: object                # distribution spec
    n: int
    trials: int
    seed: int
    workers: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}")
        if self.trials < 1:
            raise DomainError(
                f"trials must be a positive integer, got {self.trials}")
        if self.workers < 1:
            raise DomainError(
                f"workers must be a positive integer, got {self.workers}")


@dataclass
class TrialOutcome:
    """One trial, fully resolved."""

    stop_index: int | None
    reward: float
    realized_max: float
    stop_at_max: bool
    threshold_violation: bool


@dataclass
class EvalReport:
    """Aggregates over all trials of one configuration."""

    rule: dict
    dist: dict
    n: int
    k: int
    trials: int
    seed: int
    workers: int
    kernel: str
    mean_reward: float
    mean_max: float
    ratio: float
    ci_halfwidth: float
    stop_probability: float
    stop_at_max_probability: float
    threshold_violations: int
    ratio_vs_exact: float
    stop_histogram: list

    def to_json(self):
        out = dict(self.__dict__)
        out["stop_histogram"] = list(self.stop_histogram)
        return out


def run_trial(config, trial_index):
    """Reference single-trial path through the Rule state machines."""
    if not (0 <= trial_index < config.trials):
        raise DomainError(f"trial_index must lie in [0, {config.trials}), "
                          f"got {trial_index}")
    rule_spec, dist, n, seed = config.rule, config.dist, config.n, config.seed
    trial = trial_index
    k = rule_spec.sample_count(n)
    if k:
        su = block_uniforms(seed, PURPOSE_SAMPLES, trial, 1, k)[0]
        samples = np.atleast_1d(dist.transform(su))
    else:
        samples = np.empty(0)
    vu = block_uniforms(seed, PURPOSE_VALUES, trial, 1, n)[0]
    values = np.atleast_1d(dist.transform(vu))
    stream = Stream(seed, PURPOSE_RULE, trial)
    rule = rule_spec.make(n, dist, samples)

    stop_index = None
    for i in range(n):
        if rule.advance(float(values[i]), stream) is Decision.STOP:
            stop_index = i + 1
            break

    realized = float(values.max())
    combined = max(realized, float(samples.max())) if k else realized
    reward = float(values[stop_index - 1]) if stop_index else 0.0
    return TrialOutcome(
        stop_index=stop_index,
        reward=reward,
        realized_max=realized,
        stop_at_max=bool(stop_index) and reward == combined,
        threshold_violation=bool(getattr(rule, "threshold_violated", False)),
    )


def _block_partial(plan, t0, t1, which, n):
    out = _kernel.alloc_out(t1 - t0)
    _kernel.run_block(plan, t0, t1, out, which)
    r = out["reward"]
    m = out["realized_max"]
    return (
        float(np.sum(r)),
        float(np.sum(m)),
        float(np.sum(r * r)),
        float(np.sum(m * m)),
        float(np.sum(r * m)),
        np.bincount(out["stop_index"], minlength=n + 1).astype(np.int64),
        int(np.sum(out["stop_at_max"], dtype=np.int64)),
        int(np.sum(out["violation"], dtype=np.int64)),
    )


def evaluate(config, kernel="auto"):
    """Run all trials of `config` and aggregate them."""
    rule_spec, dist = config.rule, config.dist
    n, trials, seed, workers = (config.n, config.trials, config.seed,
                                config.workers)
    which = _kernel.resolve_kernel(kernel)
    plan = _kernel.build_plan(rule_spec, dist, n, seed)
    blocks = [(t0, min(t0 + BLOCK, trials)) for t0 in range(0, trials, BLOCK)]

    sr = sm = sr2 = sm2 = srm = 0.0
    hist = np.zeros(n + 1, dtype=np.int64)
    stopmax = 0
    viol = 0
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_block_partial, plan, t0, t1, which, n)
                   for t0, t1 in blocks]
        # fold in block order so totals never depend on completion order
        for fut in futures:
            bsr, bsm, bsr2, bsm2, bsrm, bhist, bsm_ct, bviol = fut.result()
            sr += bsr
            sm += bsm
            sr2 += bsr2
            sm2 += bsm2
            srm += bsrm
            hist += bhist
            stopmax += bsm_ct
            viol += bviol

    t = float(trials)
    mean_reward = sr / t
    mean_max = sm / t
    if mean_max > 0.0:
        ratio = mean_reward / mean_max
        vr = max(sr2 / t - mean_reward * mean_reward, 0.0)
        vm = max(sm2 / t - mean_max * mean_max, 0.0)
        cov = srm / t - mean_reward * mean_max
        var_ratio = (vr - 2.0 * ratio * cov + ratio * ratio * vm) \
            / (mean_max * mean_max * t)
        ci = Z95 * math.sqrt(max(var_ratio, 0.0))
    else:
        ratio = math.nan
        ci = math.nan

    exact_max = float(dist.expected_max(n))
    return EvalReport(
        rule=rule_spec.to_json(),
        dist=dist.to_json(),
        n=n,
        k=plan.k,
        trials=trials,
        seed=seed,
        workers=workers,
        kernel=which,
        mean_reward=mean_reward,
        mean_max=mean_max,
        ratio=ratio,
        ci_halfwidth=ci,
        stop_probability=float(1.0 - hist[0] / t),
        stop_at_max_probability=stopmax / t,
        threshold_violations=viol,
        ratio_vs_exact=mean_reward / exact_max if exact_max > 0 else math.nan,
        stop_histogram=[int(c) for c in hist],
    )


def stop_profile(config, kernel="auto"):
    """Conditional stop probabilities per index, with standard errors.

    Entry i is (i, p_i, se_i) where p_i estimates Pr[stop at i | reached
    i]; an index no trial ever reached reports (i, None, None).
    """
    return profile_from_report(evaluate(config, kernel=kernel))


def profile_from_report(report):
    """stop_profile for an evaluation that already ran."""
    hist = report.stop_histogram
    n = report.n
    reached = report.trials
    out = []
    for i in range(1, n + 1):
        if reached <= 0:
            out.append((i, None, None))
            continue
        p = hist[i] / reached
        se = math.sqrt(p * (1.0 - p) / reached)
        out.append((i, p, se))
        reached -= hist[i]
    return out


@dataclass
class MedianReport:
    """Concentration of the sample median around 1/2."""

    n: int
    m: int
    trials: int
    seed: int
    estimate: float
    stderr: float

    def to_json(self):
        return dict(self.__dict__)


def median_experiment(n, m, trials, seed):
    """Fraction of m-sample uniform medians within 1/n of 1/2.

    m is bumped to the next odd integer so the median is a single
    order statistic.
    """
    if n < 1 or m < 1 or trials < 1:
        raise DomainError("n, m and trials must be positive integers")
    if m % 2 == 0:
        m += 1
    mid = m // 2
    band = 1.0 / n
    hits = 0
    chunk = max(1, _MEDIAN_CHUNK_WORDS // m)
    t0 = 0
    while t0 < trials:
        c = min(chunk, trials - t0)
        u = block_uniforms(seed, PURPOSE_AUX, t0, c, m)
        med = np.partition(u, mid, axis=1)[:, mid]
        hits += int(np.sum(np.abs(med - 0.5) <= band, dtype=np.int64))
        t0 += c
    p = hits / trials
    se = math.sqrt(p * (1.0 - p) / trials)
    return MedianReport(n=n, m=m, trials=trials, seed=seed,
                        estimate=p, stderr=se)
