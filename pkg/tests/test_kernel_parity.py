"""Three-way agreement: the reference Rule stepping loop, the numpy
fallback kernel, and the compiled kernel must tell the same story.

The fallback is held bitwise-equal to the reference everywhere. The
compiled kernel is bitwise-equal for uniform01 and discrete specs; for
exponential specs its libc log1p may differ from numpy's by one ulp
per draw, so rewards get a 1e-12 relative tolerance while stop
decisions must still match exactly.
"""

import numpy as np
import pytest

from stopsim import _kernel
from stopsim._kernel import HAVE_COMPILED, build_plan
from stopsim.distributions import (DiscreteWeighted, Exponential, Uniform01,
                                   adversarial_instance)
from stopsim.errors import UsageError
from stopsim.evaluator import EvalConfig, evaluate, run_trial
from stopsim.rules import RuleSpec

TRIALS = 600

CONFIGS = [
    ("secretary-u01", RuleSpec("secretary"), Uniform01(), 17, 3),
    ("secretary-exp", RuleSpec("secretary"), Exponential(0.7), 9, 4),
    ("secretary-cutoff", RuleSpec("secretary", cutoff=0.5), Uniform01(), 8, 5),
    ("secsamp-g1", RuleSpec("secretary_samples", gamma=1.0), Uniform01(), 12, 6),
    ("secsamp-g2", RuleSpec("secretary_samples", gamma=2.0), Exponential(1.0), 8, 7),
    ("single-u01", RuleSpec("single_threshold"), Uniform01(), 10, 8),
    ("single-exp", RuleSpec("single_threshold"), Exponential(1.0), 6, 9),
    ("single-disc", RuleSpec("single_threshold"),
     DiscreteWeighted([0.0, 1.0, 2.0], [0.3, 0.4, 0.3]), 5, 10),
    ("fresh-u01", RuleSpec("fresh_samples"), Uniform01(), 11, 11),
    ("fresh-exp", RuleSpec("fresh_samples"), Exponential(2.0), 7, 12),
    ("fresh-disc", RuleSpec("fresh_samples"),
     DiscreteWeighted([1.0, 3.0], [0.6, 0.4]), 9, 13),
    ("qsched-u01", RuleSpec("quantile_schedule"), Uniform01(), 10, 14),
    ("qsched-exp", RuleSpec("quantile_schedule"), Exponential(1.0), 10, 15),
    ("qsched-emp", RuleSpec("quantile_schedule", source="empirical", m=60),
     Uniform01(), 8, 16),
    ("qsched-emp-exp", RuleSpec("quantile_schedule", source="empirical",
                                m=50), Exponential(1.0), 6, 17),
    ("dp-u01", RuleSpec("dp"), Uniform01(), 12, 18),
    ("dp-disc", RuleSpec("dp"),
     DiscreteWeighted([0.5, 1.5, 4.0], [0.5, 0.3, 0.2]), 6, 19),
    ("alpha-three-point", RuleSpec("constant_alpha", alpha=0.4),
     adversarial_instance("three_point", 16), 16, 20),
    ("alpha-forced-high", RuleSpec("constant_alpha", alpha=0.25,
                                   high_value=1.0),
     DiscreteWeighted([0.0, 1.0], [0.5, 0.5]), 7, 21),
]

IDS = [c[0] for c in CONFIGS]


def kernel_outputs(rule_spec, dist, n, seed, which):
    plan = build_plan(rule_spec, dist, n, seed)
    out = _kernel.alloc_out(TRIALS)
    _kernel.run_block(plan, 0, TRIALS, out, which)
    return out


@pytest.mark.parametrize("name,rule_spec,dist,n,seed", CONFIGS, ids=IDS)
def test_reference_matches_pure(name, rule_spec, dist, n, seed):
    out = kernel_outputs(rule_spec, dist, n, seed, "pure")
    config = EvalConfig(rule=rule_spec, dist=dist, n=n, trials=TRIALS,
                        seed=seed)
    for t in range(TRIALS):
        ref = run_trial(config, t)
        assert out["stop_index"][t] == (ref.stop_index or 0), f"trial {t}"
        assert out["reward"][t] == ref.reward, f"trial {t}"
        assert out["realized_max"][t] == ref.realized_max, f"trial {t}"
        assert bool(out["stop_at_max"][t]) == ref.stop_at_max, f"trial {t}"
        assert bool(out["violation"][t]) == ref.threshold_violation


@pytest.mark.skipif(not HAVE_COMPILED, reason="compiled kernel not built")
@pytest.mark.parametrize("name,rule_spec,dist,n,seed", CONFIGS, ids=IDS)
def test_compiled_matches_pure(name, rule_spec, dist, n, seed):
    pure = kernel_outputs(rule_spec, dist, n, seed, "pure")
    comp = kernel_outputs(rule_spec, dist, n, seed, "compiled")
    assert np.array_equal(pure["stop_index"], comp["stop_index"])
    assert np.array_equal(pure["stop_at_max"], comp["stop_at_max"])
    assert np.array_equal(pure["violation"], comp["violation"])
    if isinstance(dist, Exponential):
        np.testing.assert_allclose(comp["reward"], pure["reward"],
                                   rtol=1e-12, atol=0.0)
        np.testing.assert_allclose(comp["realized_max"],
                                   pure["realized_max"], rtol=1e-12, atol=0.0)
    else:
        assert np.array_equal(pure["reward"], comp["reward"])
        assert np.array_equal(pure["realized_max"], comp["realized_max"])


@pytest.mark.skipif(not HAVE_COMPILED, reason="compiled kernel not built")
def test_evaluate_reports_agree_across_kernels():
    # uniform01 path is bitwise, so whole reports must match
    config = EvalConfig(rule=RuleSpec("fresh_samples"), dist=Uniform01(),
                        n=15, trials=5000, seed=42)
    a = evaluate(config, kernel="pure")
    b = evaluate(config, kernel="compiled")
    assert a.mean_reward == b.mean_reward
    assert a.mean_max == b.mean_max
    assert a.ratio == b.ratio
    assert a.ci_halfwidth == b.ci_halfwidth
    assert a.stop_histogram == b.stop_histogram
    assert a.kernel == "pure" and b.kernel == "compiled"


def test_resolve_kernel_contract():
    assert _kernel.resolve_kernel("pure") == "pure"
    with pytest.raises(UsageError):
        _kernel.resolve_kernel("vulkan")
    if HAVE_COMPILED:
        assert _kernel.resolve_kernel("auto") == "compiled"
        assert _kernel.resolve_kernel("compiled") == "compiled"


def test_pure_env_override(monkeypatch):
    monkeypatch.setenv("STOPSIM_PURE", "1")
    assert _kernel.resolve_kernel("auto") == "pure"


def test_chunked_pure_blocks_are_seamless():
    # force the fallback's internal chunking to split mid-block and
    # compare against one unchunked run
    rule_spec, dist, n, seed = RuleSpec("secretary"), Uniform01(), 31, 77
    plan = build_plan(rule_spec, dist, n, seed)
    whole = _kernel.alloc_out(400)
    _kernel.run_block(plan, 0, 400, whole, "pure")
    pieces = _kernel.alloc_out(400)
    split = _kernel.alloc_out(150)
    _kernel.run_block(plan, 0, 150, split, "pure")
    for key in pieces:
        pieces[key][:150] = split[key]
    split = _kernel.alloc_out(250)
    _kernel.run_block(plan, 150, 400, split, "pure")
    for key in pieces:
        pieces[key][150:] = split[key]
    for key in whole:
        assert np.array_equal(whole[key], pieces[key]), key
