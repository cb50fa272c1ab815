"""Pure-Python (vectorized numpy) simulation kernel.

Fallback for when the compiled extension is unavailable, and the
reference the compiled kernel is tested against. Both kernels consume
identical uniform streams (see _philox) and make identical
comparisons; trial t of a given config produces the same decisions in
either kernel. The only tolerated divergence is the exponential
inverse CDF, where numpy's vectorized log1p can differ from libc's
scalar log1p by one ulp.

The kernel contract: fill per-trial output arrays for trials t0..t1-1
of the plan. Reductions happen in the evaluator, identically for both
kernels.
"""

import numpy as np

from ._philox import (PURPOSE_RULE, PURPOSE_SAMPLES, PURPOSE_VALUES,
                      block_uniforms)

# trials per generation chunk are capped so per-chunk scratch stays
# around tens of MB even for sample-hungry rules
_CHUNK_BUDGET = 4_000_000


def run_block(plan, t0, t1, out):
    ntr = t1 - t0
    words = plan.n + plan.k + (plan.n if plan.kind in
                               ("fresh_samples", "constant_alpha") else 0)
    chunk = max(1, min(ntr, _CHUNK_BUDGET // max(words, 1)))
    base = 0
    while base < ntr:
        c = min(chunk, ntr - base)
        _run_chunk(plan, t0 + base, c,
                   {k: v[base:base + c] for k, v in out.items()})
        base += c


def _values_for(plan, t0, c):
    u = block_uniforms(plan.seed, PURPOSE_VALUES, t0, c, plan.n)
    return plan.dist.transform(u)


def _samples_for(plan, t0, c):
    u = block_uniforms(plan.seed, PURPOSE_SAMPLES, t0, c, plan.k)
    return plan.dist.transform(u)


def _rule_uniforms_for(plan, t0, c, nwords):
    return block_uniforms(plan.seed, PURPOSE_RULE, t0, c, nwords)


def _finish(out, values, samples, stop_pos, reward):
    """Common bookkeeping: maxima, histogram inputs, stop-at-max flag."""
    realized = values.max(axis=1)
    combined = realized
    if samples is not None and samples.shape[1] > 0:
        combined = np.maximum(realized, samples.max(axis=1))
    stopped = stop_pos > 0
    out["reward"][:] = np.where(stopped, reward, 0.0)
    out["realized_max"][:] = realized
    out["stop_index"][:] = stop_pos
    out["stop_at_max"][:] = stopped & (reward == combined)


def _first_stop(stop_mask):
    """1-based first-stop position per row; 0 when the rule never stops."""
    any_stop = stop_mask.any(axis=1)
    first = stop_mask.argmax(axis=1)
    return np.where(any_stop, first + 1, 0).astype(np.int32)


def _prev_running_max(values, init):
    """Running max of everything strictly before each column."""
    prev = np.empty_like(values)
    prev[:, 0] = init
    if values.shape[1] > 1:
        np.maximum.accumulate(values[:, :-1], axis=1, out=prev[:, 1:])
        np.maximum(prev[:, 1:], init[:, None] if init.ndim else init,
                   out=prev[:, 1:])
    return prev


def _run_chunk(plan, t0, c, out):
    kind = plan.kind
    values = _values_for(plan, t0, c)
    samples = _samples_for(plan, t0, c) if plan.k else None
    out["violation"][:] = 0

    if kind == "secretary":
        init = np.full(c, -np.inf)
        prev = _prev_running_max(values, init)
        positions = np.arange(1, plan.n + 1)
        mask = (positions > plan.cutoff_count)[None, :] & (values > prev)
        stop = _first_stop(mask)
        reward = _gather(values, stop)
        _finish(out, values, samples, stop, reward)

    elif kind == "secretary_samples":
        init = samples.max(axis=1) if plan.k else np.full(c, -np.inf)
        prev = _prev_running_max(values, init)
        positions = plan.k + np.arange(1, plan.n + 1)
        mask = (positions >= plan.eligible_from)[None, :] & (values > prev)
        stop = _first_stop(mask)
        reward = _gather(values, stop)
        _finish(out, values, samples, stop, reward)

    elif kind == "single_threshold":
        thr = samples.max(axis=1) if plan.k else np.full(c, -np.inf)
        mask = values >= thr[:, None]
        mask[:, -1] = True
        stop = _first_stop(mask)
        reward = _gather(values, stop)
        _finish(out, values, samples, stop, reward)

    elif kind == "thresholds":
        if plan.strict:
            mask = values > plan.thresholds[None, :]
        else:
            mask = values >= plan.thresholds[None, :]
        stop = _first_stop(mask)
        reward = _gather(values, stop)
        _finish(out, values, samples, stop, reward)

    elif kind == "constant_alpha":
        ru = _rule_uniforms_for(plan, t0, c, plan.n)
        is_high = values == plan.high_value
        is_mid = values == 1.0
        if plan.high_value == 1.0:
            is_mid[:] = False
        # the j-th middle atom of a trial consumes rule word j
        ordinal = np.cumsum(is_mid, axis=1) - 1
        u_mid = np.take_along_axis(ru, np.maximum(ordinal, 0), axis=1)
        mask = is_high | (is_mid & (u_mid < plan.alpha))
        stop = _first_stop(mask)
        reward = _gather(values, stop)
        _finish(out, values, samples, stop, reward)

    elif kind == "fresh_samples":
        _run_fresh(plan, t0, c, out, values, samples)

    elif kind == "quantile_empirical":
        _run_quantile_empirical(plan, t0, c, out, values, samples)

    else:
        raise AssertionError(f"unhandled kind {kind}")


def _gather(values, stop):
    idx = np.maximum(stop - 1, 0)
    return values[np.arange(len(values)), idx]


def _run_fresh(plan, t0, c, out, values, samples):
    n = plan.n
    ru = _rule_uniforms_for(plan, t0, c, n)
    if n == 1:
        stop = np.ones(c, dtype=np.int32)
        _finish(out, values, samples, stop, values[:, 0])
        return
    pool = samples.copy()
    pool_max = pool.max(axis=1)
    last_thr = np.full(c, np.inf)
    viol = np.zeros(c, dtype=bool)
    alive = np.ones(c, dtype=bool)
    stop = np.zeros(c, dtype=np.int32)
    reward = np.zeros(c)
    rows = np.arange(c)
    for i in range(n):
        xi = values[:, i]
        viol |= alive & (pool_max > last_thr)
        last_thr[alive] = pool_max[alive]
        stopping = alive & (xi >= pool_max)
        stop[stopping] = i + 1
        reward[stopping] = xi[stopping]
        alive &= ~stopping
        if not alive.any():
            break
        # rejected: insert x_i, evict one of the n pool slots uniformly
        j = (ru[:, i] * n).astype(np.int64)
        replace = alive & (j < n - 1)
        r = rows[replace]
        jj = j[replace]
        evicted = pool[r, jj]
        pool[r, jj] = xi[replace]
        need = r[evicted == pool_max[r]]
        if len(need):
            pool_max[need] = pool[need].max(axis=1)
    _finish(out, values, samples, stop, reward)
    out["violation"][:] = viol


def _run_quantile_empirical(plan, t0, c, out, values, samples):
    n = plan.n
    ranks = plan.ranks          # len n+1; -1 skip, 0 unconditional, else 1..m
    needed = sorted({int(r) for r in ranks if r >= 1})
    if needed:
        kth = [r - 1 for r in needed]
        part = np.partition(samples, kth, axis=1)
        col = {r: part[:, r - 1] for r in needed}
    mask = np.zeros((c, n), dtype=bool)
    for i in range(1, n + 1):
        r = int(ranks[i])
        if r == -1:
            continue
        if r == 0:
            mask[:, i - 1] = True
        else:
            mask[:, i - 1] = values[:, i - 1] > col[r]
    stop = _first_stop(mask)
    reward = _gather(values, stop)
    _finish(out, values, samples, stop, reward)
