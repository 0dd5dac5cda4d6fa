#!/usr/bin/env python3
"""
DKPP - Certified solver for fractional diffusion with drift and nonlocal growth
Config → Certify → Picard solve → Artifacts

Usage:
    python dkpp.py certify --config run.json [--out DIR] [--seed N]
    python dkpp.py solve   --config run.json [--verify] [--allow-uncertified]
    python dkpp.py march   --config run.json --total-time 10
    python dkpp.py study   --config run.json --mode dt|N|picard|contraction
    python dkpp.py emit-plot --out RUN_DIR --mode field|norms|residuals
"""

import argparse
import logging
import sys

from config import LOG_LEVEL, validate_config
from runner.artifacts import PLOT_KINDS
from runner.commands import (
    EXIT_VALIDATION,
    cmd_certify,
    cmd_emit_plot,
    cmd_march,
    cmd_solve,
    cmd_study,
    exit_code_for,
)
from runner.run_config import describe_failure, load_run_config
from runner.studies import STUDY_MODES

COMMANDS = ("certify", "solve", "march", "study", "emit-plot")


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; usage errors are validation errors here."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"❌ {message}", flush=True)
        sys.exit(EXIT_VALIDATION)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dkpp", description="Certified pseudospectral solver")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="JSON run config (schema dkpp-run/1)")
    parser.add_argument("--out", help="Run directory (overrides output_dir in the config)")
    parser.add_argument("--seed", type=int, help="Seed for verification sweeps and random guesses")
    parser.add_argument("--verify", action="store_true", help="Add residual, ratio, energy and oracle checks")
    parser.add_argument("--allow-uncertified", action="store_true", help="Iterate even when C >= 1")
    parser.add_argument("--total-time", type=float, help="End time for march")
    parser.add_argument("--mode", help=f"Study mode {STUDY_MODES} or plot data {PLOT_KINDS}")
    return parser


def _check_args(args) -> list:
    problems = []
    if args.command != "emit-plot" and not args.config:
        problems.append(f"--config is required for {args.command}")
    if args.command == "march" and (args.total_time is None or not args.total_time > 0):
        problems.append("--total-time must be a positive number for march")
    if args.command == "study" and args.mode not in STUDY_MODES:
        problems.append(f"--mode must be one of {STUDY_MODES} for study")
    if args.command == "emit-plot":
        if not args.out:
            problems.append("--out RUN_DIR is required for emit-plot")
        if args.mode not in PLOT_KINDS:
            problems.append(f"--mode must be one of {PLOT_KINDS} for emit-plot")
    if args.seed is not None and not 0 <= args.seed < 2 ** 64:
        problems.append("--seed must fit in an unsigned 64-bit integer")
    return problems


def run(args) -> int:
    if args.command == "emit-plot":
        return cmd_emit_plot(args.out, args.mode)

    run_config = load_run_config(args.config).with_overrides(seed=args.seed, output_dir=args.out)
    print(f"[CONFIG] {args.config} → {run_config.output_dir}", flush=True)
    if args.command == "certify":
        return cmd_certify(run_config)
    if args.command == "solve":
        return cmd_solve(run_config, verify=args.verify, allow_uncertified=args.allow_uncertified)
    if args.command == "march":
        return cmd_march(run_config, args.total_time, allow_uncertified=args.allow_uncertified)
    return cmd_study(run_config, args.mode, allow_uncertified=args.allow_uncertified)


def main(argv=None) -> int:
    """Entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)

    try:
        validate_config()
    except ValueError as e:
        print(f"❌ Configuration error: {e}", flush=True)
        return EXIT_VALIDATION
    logging.basicConfig(level=LOG_LEVEL, format="%(levelname)s %(name)s: %(message)s")

    problems = _check_args(args)
    if problems:
        print("❌ " + "\n   ".join(problems), flush=True)
        return EXIT_VALIDATION

    try:
        return run(args)
    except Exception as e:
        code = exit_code_for(e)
        print(f"❌ {describe_failure(e)}", flush=True)
        return code


if __name__ == "__main__":
    sys.exit(main())
