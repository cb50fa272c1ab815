"""Throughput comparison of the compiled and fallback simulation kernels.

Times `run_block` on a few representative rule/distribution pairs and
prints trials per second for each kernel plus the speedup. Run as
`python3 benchmarks/bench_kernels.py`; use --trials/--repeats to trade
precision for time.
"""

import argparse
import time

from stopsim import _kernel
from stopsim.distributions import Exponential, Uniform01
from stopsim.rules import rule_spec_from_json

CONFIGS = [
    ("secretary, uniform01, n=100", '{"rule": "secretary"}',
     Uniform01(), 100),
    ("secretary_samples g=1, u01, n=100",
     '{"rule": "secretary_samples", "gamma": 1.0}', Uniform01(), 100),
    ("single_threshold, exp(1), n=50", '{"rule": "single_threshold"}',
     Exponential(1.0), 50),
    ("fresh_samples, uniform01, n=50", '{"rule": "fresh_samples"}',
     Uniform01(), 50),
    ("quantile_schedule, u01, n=100", '{"rule": "quantile_schedule"}',
     Uniform01(), 100),
    ("dp, uniform01, n=50", '{"rule": "dp"}', Uniform01(), 50),
]


def _rate(plan, trials, which, repeats):
    out = _kernel.alloc_out(trials)
    _kernel.run_block(plan, 0, trials, out, which)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        _kernel.run_block(plan, 0, trials, out, which)
        best = min(best, time.perf_counter() - t0)
    return trials / best


def main():
    parser = argparse.ArgumentParser(
        description="compare compiled and fallback kernel throughput")
    parser.add_argument("--trials", type=int, default=20_000,
                        help="trials per timed run (default 20000)")
    parser.add_argument("--repeats", type=int, default=3,
                        help="timed runs per cell, best is kept (default 3)")
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    kernels = ["pure"]
    if _kernel.HAVE_COMPILED:
        kernels.append("compiled")
    else:
        print("compiled kernel unavailable, timing the fallback only")

    width = max(len(name) for name, _, _, _ in CONFIGS)
    header = f"{'config':<{width}}" + "".join(
        f"{k + ' trials/s':>20}" for k in kernels)
    if len(kernels) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for name, rule_json, dist, n in CONFIGS:
        plan = _kernel.build_plan(rule_spec_from_json(rule_json), dist, n,
                                  args.seed)
        rates = [_rate(plan, args.trials, k, args.repeats) for k in kernels]
        row = f"{name:<{width}}" + "".join(f"{r:>20,.0f}" for r in rates)
        if len(rates) == 2:
            row += f"{rates[1] / rates[0]:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
