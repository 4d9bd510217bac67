"""Command-line front end: run experiments, exact checks, closed-form bounds."""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys

from . import config as config_mod
from . import exact, experiments, sampler, stats


def _load_config(args):
    cfg = config_mod.parse_config_file(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(
            cfg, schedule=dataclasses.replace(cfg.schedule, base_seed=args.seed))
    if args.out is not None:
        cfg = dataclasses.replace(cfg, out_dir=args.out)
    return cfg


def cmd_run(args):
    cfg = _load_config(args)
    result = experiments.run_experiment(
        cfg, deterministic_headers=args.deterministic_headers == "on")
    for v in result.verdicts:
        print(f"beta={v.beta!r} {v.check}: {v.lhs_name}={v.lhs!r} "
              f"{v.rhs_name}={v.rhs!r} -> {v.verdict}")
    print(f"data: {result.data_path}")
    print(f"verdicts: {result.verdict_path}")
    return result.exit_code


def cmd_exact(args):
    cfg = _load_config(args)
    verdicts = experiments.run_exact_checks(cfg)
    failed = False
    for v in verdicts:
        status = "pass" if v.verdict == stats.HOLDS else "FAIL"
        failed |= v.verdict != stats.HOLDS
        print(f"beta={v.beta!r} {v.check}: {v.lhs_name}={v.lhs!r} "
              f"{v.rhs_name}={v.rhs!r} [{status}]")
    return 1 if failed else 0


def cmd_bound(args):
    beta = args.beta
    p = sampler.p_from_beta(beta)
    x = math.exp(-2.0 * beta)
    print(f"beta = {beta!r}")
    print(f"p = 1 - exp(-2 beta) = {p!r}")
    print(f"x = 1 - p = {x!r}")
    if args.m is not None:
        m = args.m
        print(f"M (given) = {m!r}")
    elif args.d == 2:
        m = exact.onsager_magnetization(beta)
        print(f"M (exact, d=2) = {m!r}")
    else:
        m = 1.0
        print("M defaulted to 1 (no closed form for d != 2); pass --m to override")
    print(f"gap bound exponent 2d(3^d-1) = {exact.gap_bound_exponent(args.d)}")
    print(f"percolation-magnetization gap bound = "
          f"{exact.theorem_gap_bound(args.d, p, m)!r}")
    degree = 2 * args.d
    pred = exact.low_temp_predictions(x, degree=degree) if 0 < x < 1 else None
    if pred is not None:
        print(f"low-temperature 1-M ~ 2x^{degree} = {pred.one_minus_m!r}")
        print(f"low-temperature 1-R ~ x^{degree} = {pred.one_minus_r!r}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fkslab",
        description="Ising / random-cluster laboratory on boxes and slab graphs")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a sampling experiment config")
    run.add_argument("config")
    run.add_argument("--seed", type=int, default=None,
                     help="override schedule.base_seed")
    run.add_argument("--out", default=None, help="override output.dir")
    run.add_argument("--deterministic-headers", choices=("on", "off"),
                     default="on",
                     help="'off' adds a timestamp line to CSV headers")
    run.set_defaults(fn=cmd_run)

    ex = sub.add_parser("exact", help="run exact-enumeration checks of a config")
    ex.add_argument("config")
    ex.add_argument("--seed", type=int, default=None)
    ex.add_argument("--out", default=None)
    ex.set_defaults(fn=cmd_exact)

    bound = sub.add_parser("bound", help="print closed-form reference values")
    bound.add_argument("--d", type=int, default=2)
    bound.add_argument("--beta", type=float, required=True)
    bound.add_argument("--m", type=float, default=None,
                       help="magnetization to plug into the gap bound")
    bound.set_defaults(fn=cmd_bound)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (config_mod.ConfigError, exact.EnumerationBudgetError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
