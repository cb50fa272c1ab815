"""Command-line surface: simulate, sweep, schedule, oracle, median-experiment.

Every run writes a stamp line `# seed=.. version=.. config=..` first
(config is a 12-hex digest of the effective settings), then CSV or
JSON. Identical argv produce byte-identical output apart from the
version in that stamp. Floats are rendered with %.12g, never
locale-dependent.

A JSON file passed via --config supplies any flag by its long name
(hyphens or underscores); explicit flags win. Exit codes: 0 on
success, 2 on usage errors (unknown flags, bad or missing settings),
1 on computation failures.
"""

import argparse
import hashlib
import json
import sys

from . import __version__
from . import schedule as _schedule
from .distributions import (Exponential, Uniform01, adversarial_instance,
                            exact_expected_max, from_json as _dist_from_json)
from .errors import ComputationError, DomainError, UsageError
from .evaluator import EvalConfig, evaluate, median_experiment
from .oracles import (b_gamma, dp_value, expected_max_via_rq,
                      fresh_samples_guarantee, harmonic,
                      single_threshold_exp_value, single_threshold_stop_prob,
                      three_point_best_ratio)
from .rules import RuleSpec, rule_spec_from_json

CSV_HEADER = ("rule,dist,n,k,trials,seed,mean_reward,mean_max,ratio,"
              "ci_halfwidth,stop_prob")

_GLOBAL_DEFAULTS = {"seed": 0, "workers": 1, "kernel": "auto"}


def _fmt(x):
    """%.12g, the one float rendering every output uses."""
    return f"{float(x):.12g}"


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--kernel", choices=("auto", "compiled", "pure"))
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--config",
                        help="JSON file supplying flags by name; flags win")

    top = argparse.ArgumentParser(
        prog="stopsim",
        description="Simulate stopping rules against i.i.d. value sequences "
                    "and print exact reference values.")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common],
                       help="evaluate one rule/distribution configuration")
    p.add_argument("--rule", help="rule name or JSON rule spec")
    p.add_argument("--dist", help="distribution shorthand or JSON spec")
    p.add_argument("--n", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--json", action="store_true",
                   help="emit the full report as JSON instead of a CSV row")

    p = sub.add_parser("sweep", parents=[common],
                       help="one CSV row per configuration along an axis")
    p.add_argument("--rule")
    p.add_argument("--dist")
    p.add_argument("--n", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--n-list", help="comma-separated horizons")
    p.add_argument("--gamma-list", help="comma-separated sample ratios")
    p.add_argument("--rule-list", help="comma-separated rule names")

    p = sub.add_parser("schedule", parents=[common],
                       help="emit the acceptance-probability schedule as CSV")
    p.add_argument("--n", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--calibrate", action="store_true",
                   help="calibrate beta instead of passing --beta")
    p.add_argument("--step", type=float)
    p.add_argument("--tol", type=float)

    p = sub.add_parser("oracle", parents=[common],
                       help="print one exact reference value as JSON")
    p.add_argument("--name")
    p.add_argument("--n", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--dist")
    p.add_argument("--grid-size", type=int)
    p.add_argument("--step", type=float)
    p.add_argument("--tol", type=float)

    p = sub.add_parser("median-experiment", parents=[common],
                       help="concentration of the m-sample uniform median")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--trials", type=int)

    return top


def _merge_config(args):
    """Fill unset flags from --config; reject unknown fields."""
    if not args.config:
        return
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file is not valid JSON: {exc}")
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    known = set(vars(args)) - {"command", "config"}
    for key, value in cfg.items():
        attr = key.replace("-", "_")
        if attr not in known:
            raise UsageError(f"unknown config field {key!r}")
        if getattr(args, attr) in (None, False):
            setattr(args, attr, value)


def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            flag = name.replace("_", "-")
            raise UsageError(f"--{flag} is required (flag or config)")


def _apply_defaults(args):
    for name, value in _GLOBAL_DEFAULTS.items():
        if getattr(args, name, None) is None:
            setattr(args, name, value)


def _effective(args):
    """The settings that define this run, for the stamp hash."""
    skip = {"command", "config", "out"}
    eff = {k: v for k, v in sorted(vars(args).items())
           if k not in skip and v is not None}
    eff["command"] = args.command
    return eff


def _stamp(args):
    blob = json.dumps(_effective(args), sort_keys=True,
                      separators=(",", ":"), default=str)
    digest = hashlib.sha256(blob.encode()).hexdigest()[:12]
    return f"# seed={args.seed} version={__version__} config={digest}"


def parse_dist(text, n=None):
    """Distribution from CLI text: shorthand or a JSON object.

    Shorthands: uniform01, exponential, exponential:RATE, and the
    adversarial families secretary_like, three_point (sized by --n),
    rare_bernoulli:EPS.
    """
    text = text.strip()
    if text.startswith("{"):
        try:
            return _dist_from_json(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"--dist JSON is invalid: {exc}")
    name, _, arg = text.partition(":")
    if name == "uniform01":
        return Uniform01()
    if name == "exponential":
        return Exponential(rate=float(arg) if arg else 1.0)
    if name in ("secretary_like", "three_point"):
        if n is None:
            raise UsageError(f"{name} needs --n to size the instance")
        return adversarial_instance(name, n)
    if name == "rare_bernoulli":
        if n is None:
            raise UsageError("rare_bernoulli needs --n")
        if not arg:
            raise UsageError("rare_bernoulli needs an epsilon, "
                             "e.g. rare_bernoulli:0.5")
        return adversarial_instance(name, n, eps=float(arg))
    raise UsageError(f"unknown distribution {text!r}")


def _rule_tag(spec):
    if spec.name == "secretary_samples":
        return f"secretary_samples(gamma={_fmt(spec.gamma)})"
    if spec.name == "quantile_schedule":
        if spec.source == "empirical":
            return f"quantile_schedule(source=empirical;m={spec.m})"
        return "quantile_schedule(source=exact)"
    if spec.name == "constant_alpha":
        return f"constant_alpha(alpha={_fmt(spec.alpha)})"
    return spec.name


def _dist_tag(dist):
    if isinstance(dist, Uniform01):
        return "uniform01"
    if isinstance(dist, Exponential):
        return f"exponential(rate={_fmt(dist.rate)})"
    return f"discrete(atoms={len(dist.values)})"


def _csv_row(rule_spec, dist, report):
    cells = [_rule_tag(rule_spec), _dist_tag(dist), str(report.n),
             str(report.k), str(report.trials), str(report.seed),
             _fmt(report.mean_reward), _fmt(report.mean_max),
             _fmt(report.ratio), _fmt(report.ci_halfwidth),
             _fmt(report.stop_probability)]
    return ",".join(cells)


def _run_eval(rule_spec, dist, n, trials, args):
    return evaluate(EvalConfig(rule=rule_spec, dist=dist, n=n,
                               trials=trials, seed=args.seed,
                               workers=args.workers),
                    kernel=args.kernel)


def _cmd_simulate(args):
    _require(args, "rule", "dist", "n", "trials")
    rule_spec = rule_spec_from_json(args.rule)
    dist = parse_dist(args.dist, args.n)
    report = _run_eval(rule_spec, dist, args.n, args.trials, args)
    if args.json:
        return json.dumps(report.to_json(), indent=2)
    return CSV_HEADER + "\n" + _csv_row(rule_spec, dist, report)


def _intlist(text, flag):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--{flag} must be a comma-separated integer list")


def _floatlist(text, flag):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--{flag} must be a comma-separated float list")


def _cmd_sweep(args):
    _require(args, "dist", "trials")
    axes = [a for a in ("n_list", "gamma_list", "rule_list")
            if getattr(args, a)]
    if len(axes) != 1:
        raise UsageError("sweep needs exactly one of --n-list, "
                         "--gamma-list, --rule-list")
    axis = axes[0]
    rows = [CSV_HEADER]

    if axis == "n_list":
        _require(args, "rule")
        rule_spec = rule_spec_from_json(args.rule)
        for n in _intlist(args.n_list, "n-list"):
            dist = parse_dist(args.dist, n)
            report = _run_eval(rule_spec, dist, n, args.trials, args)
            rows.append(_csv_row(rule_spec, dist, report))
    elif axis == "gamma_list":
        _require(args, "n")
        if args.rule is not None \
                and rule_spec_from_json(args.rule).name != "secretary_samples":
            raise UsageError("--gamma-list sweeps secretary_samples; "
                             "drop --rule or pass that family")
        dist = parse_dist(args.dist, args.n)
        for gamma in _floatlist(args.gamma_list, "gamma-list"):
            rule_spec = RuleSpec("secretary_samples", gamma=gamma)
            report = _run_eval(rule_spec, dist, args.n, args.trials, args)
            rows.append(_csv_row(rule_spec, dist, report))
    else:
        _require(args, "n")
        dist = parse_dist(args.dist, args.n)
        for name in args.rule_list.split(","):
            rule_spec = rule_spec_from_json(name.strip())
            report = _run_eval(rule_spec, dist, args.n, args.trials, args)
            rows.append(_csv_row(rule_spec, dist, report))
    return "\n".join(rows)


def _cmd_schedule(args):
    _require(args, "n")
    step = args.step if args.step is not None else _schedule.DEFAULT_STEP
    tol = args.tol if args.tol is not None else 1e-6
    if args.beta is not None and args.calibrate:
        raise UsageError("pass either --beta or --calibrate, not both")
    beta = args.beta
    if beta is None:
        beta = _schedule.calibrate_beta(tol, step)
    curve = _schedule.solve_hill_kertz(beta, step)
    sched = _schedule.quantile_schedule(args.n, curve)
    rows = ["i,eps_i,threshold_quantile"]
    for i in range(1, args.n + 1):
        eps = sched.eps[i]
        rows.append(f"{i},{_fmt(eps)},{_fmt(1.0 - eps)}")
    return "\n".join(rows)


def _cmd_oracle(args):
    _require(args, "name")
    name = args.name
    params = {}
    extra = {}

    if name in ("harmonic", "single_threshold_stop_prob",
                "single_threshold_exp_value", "fresh_samples_guarantee"):
        _require(args, "n")
        fn = {"harmonic": harmonic,
              "single_threshold_stop_prob": single_threshold_stop_prob,
              "single_threshold_exp_value": single_threshold_exp_value,
              "fresh_samples_guarantee": fresh_samples_guarantee}[name]
        result = fn(args.n)
        params["n"] = args.n
        value, method = result.value, result.method
        if result.exact is not None:
            extra["exact"] = (f"{result.exact.numerator}"
                              f"/{result.exact.denominator}")
        if result.error_bound is not None:
            extra["error_bound"] = result.error_bound
    elif name == "b_gamma":
        _require(args, "gamma")
        result = b_gamma(args.gamma)
        params["gamma"] = args.gamma
        value, method = result.value, result.method
    elif name == "calibrate_beta":
        tol = args.tol if args.tol is not None else 1e-6
        step = args.step if args.step is not None else _schedule.DEFAULT_STEP
        value = _schedule.calibrate_beta(tol, step)
        params.update(tol=tol, step=step)
        method = "bisection"
    elif name == "three_point_best_ratio":
        _require(args, "n")
        grid = args.grid_size if args.grid_size is not None else 10000
        alpha_star, value = three_point_best_ratio(args.n, grid)
        params.update(n=args.n, grid_size=grid)
        extra["alpha_star"] = alpha_star
        method = "grid_search"
    elif name in ("dp_value", "expected_max_via_rq", "exact_expected_max"):
        _require(args, "dist", "n")
        dist, n = parse_dist(args.dist, args.n), args.n
        params.update(n=n, dist=dist.to_json())
        if name == "dp_value":
            result = dp_value(dist, n)
            value, method = result.value, result.method
        elif name == "expected_max_via_rq":
            result = expected_max_via_rq(dist, n)
            value, method = result.value, result.method
            if result.error_bound is not None:
                extra["error_bound"] = result.error_bound
        else:
            value = float(exact_expected_max(dist, n))
            method = "closed_form"
    else:
        raise UsageError(f"unknown oracle {name!r}")

    payload = {"name": name, "params": params, "value": float(value),
               "method": method}
    payload.update(extra)
    return json.dumps(payload, indent=2)


def _cmd_median(args):
    _require(args, "n", "m", "trials")
    report = median_experiment(args.n, args.m, args.trials, args.seed)
    return json.dumps(report.to_json(), indent=2)


_COMMANDS = {
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "schedule": _cmd_schedule,
    "oracle": _cmd_oracle,
    "median-experiment": _cmd_median,
}


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        _merge_config(args)
        _apply_defaults(args)
        body = _COMMANDS[args.command](args)
        text = _stamp(args) + "\n" + body + "\n"
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return 0
    except (UsageError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ComputationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
