"""Simulation and exact oracles for sample-based stopping rules.

A value sequence of known length n arrives one draw at a time from a
distribution the decision maker may only know through samples; a
stopping rule takes at most one value and scores against the realized
maximum. This package provides the rule families as stepping state
machines, fast batch evaluation of them (compiled kernel with a pure
numpy fallback), closed-form oracles for the quantities the rules
guarantee, and adversarial instances that pin matching upper bounds.
"""

__version__ = "0.1.0"

from ._kernel import HAVE_COMPILED, resolve_kernel
from ._philox import Stream, block_uniforms
from .distributions import (DiscreteWeighted, Exponential, Uniform01,
                            adversarial_instance, exact_expected_max,
                            sample_many)
from .distributions import from_json as distribution_from_json
from .empirical import (EmpiricalCdf, build_empirical, dkw_epsilon,
                        empirical_quantile, quantile_rank, sup_distance)
from .errors import (ComputationError, DomainError, UnsupportedSpecError,
                     UsageError)
from .evaluator import (BLOCK, EvalConfig, EvalReport, MedianReport,
                        TrialOutcome, evaluate, median_experiment,
                        profile_from_report, run_trial, stop_profile)
from .oracles import (ExactValue, b_gamma, dp_threshold_vector, dp_value,
                      expected_max_via_rq, fresh_samples_guarantee, harmonic,
                      single_threshold_exp_value, single_threshold_stop_prob,
                      three_point_best_ratio)
from .rules import (RULE_NAMES, Decision, RuleSpec, advance,
                    constant_alpha_rule, dp_rule, fresh_samples_rule,
                    quantile_schedule_rule, rule_spec_from_json,
                    secretary_rule, secretary_with_samples_rule,
                    single_threshold_rule)
from .schedule import (BETA_DEFAULT, QuantileSchedule, YCurve, calibrate_beta,
                       quantile_schedule, solve_hill_kertz)
