"""Command line front end: ``gen``, ``suite``, ``sweep`` and ``norms``.

Exit codes: 0 when every hard check passes, 1 when a hard check fails
(witness instances are written next to the report), 2 on configuration,
parse or input errors.
"""
import argparse
from dataclasses import replace
import json
import os
import sys

from . import io as instance_io
from .cz import NormalizationError, default_lambda
from .field import lp_norm, weak_l1_quasinorm
from .instances import generate
from .operators import square_function_terms
from .report import to_csv
from .seqnorms import column_norm, rc_norm, row_norm, weak_rc_quasinorm
from .suite import ConfigError, SuiteConfig, load_config, run_suite, summary_json, write_witnesses

AXES = {"lambda": "lambda_scale", "J": "J", "a1-cap": "weight"}


def _config(args):
    config = load_config(args.config) if args.config else SuiteConfig().validate()
    if getattr(args, "seed", None) is not None:
        config = replace(config, seed=args.seed)
    return config


def _summary_path(out):
    root, _ = os.path.splitext(out)
    return root + ".summary.json"


def cmd_gen(args):
    config = _config(args)
    seed = config.seed
    inst = generate(config.grid, seed, config.weight)
    inst.lam = default_lambda(inst.field)
    instance_io.dump(inst, args.out)
    print(f"wrote {args.out} (d={config.d}, J={config.J}, m={config.m}, lambda={inst.lam!r})")
    return 0


def _finish(config, reports, out):
    failed = any(r.failed for r in reports)
    if failed:
        witness_dir = config.witness_dir or os.path.join(os.path.dirname(os.path.abspath(out)), "witnesses")
        paths = write_witnesses(config, reports, witness_dir)
        for path in paths:
            print(f"witness: {path}", file=sys.stderr)
    return failed


def cmd_suite(args):
    config = _config(args)
    reports = run_suite(config)
    failed = _finish(config, reports, args.out)
    instance_io.atomic_write(args.out, to_csv(reports))
    instance_io.atomic_write(_summary_path(args.out), summary_json(reports))
    bad = sorted({r.check_id for r in reports if r.failed})
    print(f"{len(reports)} reports, {'FAIL: ' + ', '.join(bad) if bad else 'all hard checks pass'}")
    return 1 if failed else 0


def _axis_config(config, axis, value):
    if axis == "lambda":
        return replace(config, lambda_scale=float(value), lam=None).validate()
    if axis == "J":
        return replace(config, J=int(value)).validate()
    kind = config.weight.partition(":")[0]
    if kind != "random-A1":
        raise ConfigError("the a1-cap axis needs a random-A1 weight")
    return replace(config, weight=f"random-A1:cap={float(value)!r}").validate()


def _sweep_assertions(axis, values, runs):
    """Cross-run assertions; returns a list of messages describing violations."""
    problems = []
    if axis == "lambda":
        # the distribution of |Tf| is non-increasing in the level, per instance
        series = {}
        for value, reports in zip(values, runs):
            for r in reports:
                if r.check_id == "distribution_at_lambda":
                    series.setdefault(r.seed, []).append((float(value), r.lhs))
        for seed, points in series.items():
            points.sort()
            for (_, a), (_, b) in zip(points, points[1:]):
                if b > a * (1 + 1e-12) + 1e-300:
                    problems.append(f"distribution increases with lambda for seed {seed}")
                    break
    if axis == "J":
        series = {}
        for value, reports in zip(values, runs):
            for r in reports:
                if r.check_id == "weak11":
                    series.setdefault(r.seed, []).append((int(value), r.ratio))
        for seed, points in series.items():
            points.sort()
            for (_, a), (_, b) in zip(points, points[1:]):
                hi, lo = max(a, b), min(a, b)
                if hi > 0 and (lo == 0 or hi / lo > 2):
                    problems.append(f"weak (1,1) ratio moves by more than 2x across J for seed {seed}")
                    break
    return problems


def cmd_sweep(args):
    config = _config(args)
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if len(values) < 2:
        raise ConfigError("a sweep needs at least two axis values")
    runs, rows = [], []
    for value in values:
        try:
            cfg = _axis_config(config, args.axis, value)
        except ValueError as exc:
            raise ConfigError(f"bad {args.axis} value {value!r}: {exc}") from exc
        reports = run_suite(cfg)
        runs.append(reports)
        text = to_csv(reports, [("axis", args.axis), ("value", value)])
        lines = text.splitlines(keepends=True)
        rows.extend(lines if not rows else lines[1:])
    failed = any(r.failed for reports in runs for r in reports)
    if failed:
        for value, reports in zip(values, runs):
            _finish(_axis_config(config, args.axis, value), reports, args.out)
    problems = _sweep_assertions(args.axis, values, runs)
    for message in problems:
        print(message, file=sys.stderr)
    instance_io.atomic_write(args.out, "".join(rows))
    trend = {}
    for value, reports in zip(values, runs):
        ratios = [r.ratio for r in reports if r.check_id == "weak11"]
        trend[value] = max(ratios) if ratios else 0.0
    doc = {"axis": args.axis, "values": values, "max_weak11_ratio": trend,
           "passed": not failed and not problems, "problems": problems}
    instance_io.atomic_write(_summary_path(args.out), json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(f"{len(values)} suites, {'FAIL' if failed or problems else 'all hard checks pass'}")
    return 1 if failed or problems else 0


def cmd_norms(args):
    inst = instance_io.load(args.instance)
    f, w = inst.field, inst.weight
    terms = square_function_terms(f)
    doc = {
        "grid": {"d": f.grid.d, "J": f.grid.J, "m": f.grid.m},
        "a1": w.a1,
        "default_lambda": default_lambda(f),
        "norms": {},
    }
    for p in args.p:
        b = rc_norm(terms, p, w)
        doc["norms"][repr(p)] = {
            "field": lp_norm(f, p, w),
            "column": column_norm(terms, p, w),
            "row": row_norm(terms, p, w),
            "rc_lower": b.lower,
            "rc_upper": b.upper,
        }
    weak = weak_rc_quasinorm(terms, w)
    doc["weak_l1"] = weak_l1_quasinorm(f, w)
    doc["weak_rc_lower"], doc["weak_rc_upper"] = weak.lower, weak.upper
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def _p_list(text):
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    if not values or any(not v >= 1 for v in values):
        raise argparse.ArgumentTypeError("exponents must be >= 1")
    return values


def build_parser():
    parser = argparse.ArgumentParser(prog="ncsq", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write a seeded random instance file")
    gen.add_argument("--seed", type=int)
    gen.add_argument("--config")
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_gen)

    suite = sub.add_parser("suite", help="run every check on a batch of instances")
    suite.add_argument("--config")
    suite.add_argument("--seed", type=int)
    suite.add_argument("--out", default="report.csv")
    suite.set_defaults(func=cmd_suite)

    sweep = sub.add_parser("sweep", help="one suite per value of a parameter")
    sweep.add_argument("--config")
    sweep.add_argument("--seed", type=int)
    sweep.add_argument("--axis", choices=sorted(AXES), required=True)
    sweep.add_argument("--values", required=True, help="comma separated axis values")
    sweep.add_argument("--out", default="sweep.csv")
    sweep.set_defaults(func=cmd_sweep)

    norms = sub.add_parser("norms", help="norms of one instance file")
    norms.add_argument("instance")
    norms.add_argument("--p", type=_p_list, default=[1.0, 2.0])
    norms.set_defaults(func=cmd_norms)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, instance_io.InstanceFormatError, NormalizationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
