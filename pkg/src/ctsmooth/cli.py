"""Command-line front end.

Exit codes: 0 on success, 2 for unreadable input or bad usage, 3 when the
measure is undefined for the given table.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from .errors import CtSmoothError, MeasureDomainError
from .estimators import STANDARD_RULES, AlphaRule, estimate
from .measures import MeasureKind, MeasureSpec
from .montecarlo import ExperimentConfig, default_threads, run_experiment
from .posterior import MIN_DRAWS, credible_interval
from .tables import parse_count_table, parse_prob_table

EXIT_USAGE = 2
EXIT_DOMAIN = 3


def _level(text):
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"level must lie strictly between 0 and 1, got {text}")
    return v


def _draws(text):
    v = int(text)
    if v < MIN_DRAWS:
        raise argparse.ArgumentTypeError(f"draws must be at least {MIN_DRAWS}")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _seed(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("seed must be nonnegative")
    return v


def parse_gammas(text: str) -> list[int]:
    """``"1..10"`` (inclusive range) or a comma list such as ``"1,2,5"``."""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            values = list(range(int(lo), int(hi) + 1))
        else:
            values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad gamma list {text!r}") from None
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError(f"gammas must be positive integers, got {text!r}")
    return values


def _rule(text):
    try:
        return AlphaRule.parse(text)
    except CtSmoothError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _rules(text):
    if text.strip() == "all":
        return list(STANDARD_RULES)
    return [_rule(t) for t in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctsmooth",
        description="Dirichlet-smoothed estimates of contingency-table measures.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("table", help="headerless CSV table, or - for stdin")
    common.add_argument("--measure", choices=[k.value for k in MeasureKind], default=MeasureKind.CRAMER_V.value)
    common.add_argument("--lambda", dest="lam", type=float, default=1.0)
    common.add_argument("--alpha-max", type=float, default=None,
                        help="upper clamp for the optimal alpha (default n/(rc))")
    common.add_argument("--format", choices=["json", "csv"], default=None)

    p = sub.add_parser("estimate", parents=[common], help="point estimate of the measure")
    p.add_argument("--rule", type=_rule, default=AlphaRule.optimal())

    p = sub.add_parser("ci", parents=[common], help="posterior credible interval")
    p.add_argument("--rule", type=_rule, default=AlphaRule.optimal())
    p.add_argument("--level", type=_level, default=0.95)
    p.add_argument("--draws", type=_draws, default=10000)
    p.add_argument("--seed", type=_seed, default=0)

    p = sub.add_parser("simulate", parents=[common], help="bias/MSE sweep from a true probability table")
    p.add_argument("--rules", type=_rules, default=list(STANDARD_RULES),
                   help="comma-separated rules, or 'all' (default)")
    p.add_argument("--gammas", type=parse_gammas, default=list(range(1, 11)))
    p.add_argument("--replications", type=_positive_int, default=10000)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--threads", type=_positive_int, default=None)
    p.add_argument("--truth-id", default=None, help="label for the truth_table_id column")
    return parser


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _emit(record: dict, fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(record) + "\n")
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(record.keys())
    w.writerow(record.values())


def cmd_estimate(args, out) -> int:
    t = parse_count_table(_read(args.table))
    spec = MeasureSpec(MeasureKind(args.measure), args.lam)
    res = estimate(spec, t, args.rule, args.alpha_max)
    _emit(res.to_json(spec), args.format or "json", out)
    return 0


def cmd_ci(args, out) -> int:
    t = parse_count_table(_read(args.table))
    spec = MeasureSpec(MeasureKind(args.measure), args.lam)
    ci = credible_interval(spec, t, args.rule, args.level, args.draws, args.seed, args.alpha_max)
    _emit(ci.to_json(), args.format or "json", out)
    return 0


def cmd_simulate(args, out) -> int:
    truth = parse_prob_table(_read(args.table))
    spec = MeasureSpec(MeasureKind(args.measure), args.lam)
    truth_id = args.truth_id
    if truth_id is None:
        truth_id = "stdin" if args.table == "-" else os.path.splitext(os.path.basename(args.table))[0]
    config = ExperimentConfig(
        truth, spec, args.rules, args.gammas, args.replications, args.seed,
        truth_id, args.threads or default_threads(), args.alpha_max,
    )
    result = run_experiment(config)
    if (args.format or "csv") == "csv":
        out.write(result.to_csv())
    else:
        rows = list(csv.DictReader(io.StringIO(result.to_csv())))
        out.write(json.dumps(rows) + "\n")
    return 0


COMMANDS = {"estimate": cmd_estimate, "ci": cmd_ci, "simulate": cmd_simulate}


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out)
    except MeasureDomainError as exc:
        print(f"ctsmooth: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (CtSmoothError, OSError) as exc:
        print(f"ctsmooth: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
