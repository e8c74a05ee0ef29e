"""Command-line front end for the bundled sweep experiments.

Exit codes: 0 on success, 1 for configuration problems (unreadable or
invalid config, unknown experiment), 2 for numerical failures (quadrature
that cannot certify its tolerance, an unreachable power budget, non-finite
statistics).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .experiments import (
    EXPERIMENT_TITLES,
    GROUP_AXIS,
    default_spec,
    grid_points,
    load_spec,
    run_experiment,
    write_csv,
)
from .policies import InfeasibleTargetError, ThresholdSolverError
from .simulator import ConfigError, NumericsError
from .stochastic import QuadratureError

_NUMERICAL_FAILURES = (
    InfeasibleTargetError,
    ThresholdSolverError,
    NumericsError,
    QuadratureError,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ehnet",
        description="Sweep experiments for battery-powered links fed by "
                    "harvested energy.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a sweep config and write a CSV")
    run.add_argument("--config", required=True, help="JSON sweep config")
    run.add_argument("--out", required=True, help="output CSV path")
    run.add_argument("--seed", type=int, help="override the master seed")
    run.add_argument("--trials", type=int, help="override trials per point")
    run.add_argument("--jobs", type=int, default=1,
                     help="worker processes (default 1)")

    sub.add_parser("list-experiments", help="show the bundled experiments")

    val = sub.add_parser("validate", help="check a config without running it")
    val.add_argument("--config", required=True, help="JSON sweep config")
    return parser


def _cmd_run(args) -> int:
    spec = load_spec(args.config)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    if args.trials is not None:
        spec = replace(spec, trials=args.trials)
    rows = run_experiment(spec, jobs=args.jobs)
    write_csv(rows, args.out)
    print(f"{spec.experiment}: {len(rows)} rows -> {args.out}")
    return 0


def _cmd_list() -> int:
    for name in sorted(EXPERIMENT_TITLES):
        spec = default_spec(name)
        print(f"{name}  {EXPERIMENT_TITLES[name]}")
        print(
            f"      grid: {len(spec.p_in_db)} power points x "
            f"n={list(spec.n_slots)} x ratio={list(spec.b_max_ratio)} x "
            f"group={list(spec.group_size)} ({GROUP_AXIS[name]}), "
            f"{spec.trials} trials"
        )
    return 0


def _cmd_validate(args) -> int:
    spec = load_spec(args.config)
    points = grid_points(spec)
    print(
        f"{spec.experiment}: ok, {len(points)} grid points, "
        f"{3 * len(points)} csv rows, {spec.trials} trials per point"
    )
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "list-experiments":
            return _cmd_list()
        if args.command == "validate":
            return _cmd_validate(args)
        raise AssertionError(f"unhandled command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except _NUMERICAL_FAILURES as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
