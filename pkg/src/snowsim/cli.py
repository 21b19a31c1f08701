"""Command-line experiment runner.

    snowsim --list
    snowsim run <scenario> [--config FILE] [--seed N] [--out DIR] [--set k=v ...]

Exit codes: 0 success, 1 runtime failure, 2 unknown scenario, 3 invalid config.
Outputs land in the --out directory: metrics.csv, trace.log, summary.txt, and
per-figure plot CSVs named after the figure each reproduces.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from .scenarios import SCENARIOS, SCENARIO_NAMES, ScenarioSpec
from .simconfig import apply_overrides, default_config, load_config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snowsim",
        description="Scenario-driven SNOW LPWAN experiments (D-OFDM PHY, CSMA/CA MAC)")
    parser.add_argument("--list", action="store_true", help="list scenarios and exit")
    sub = parser.add_subparsers(dest="command")
    run = sub.add_parser("run", help="run a named scenario")
    run.add_argument("scenario", help="scenario name (see --list)")
    run.add_argument("--config", default=None, help="JSON config file")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    run.add_argument("--out", default=".", help="output directory")
    run.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="KEY=VALUE", help="dotted config override (repeatable)")
    return parser


def list_scenarios(stream=sys.stdout):
    stream.write("available scenarios:\n")
    for name in SCENARIO_NAMES:
        stream.write(f"  {name}\n")


def run_scenario(spec: ScenarioSpec) -> int:
    if spec.name not in SCENARIOS:
        sys.stderr.write(f"unknown scenario: {spec.name!r}\n")
        list_scenarios(sys.stderr)
        return 2
    try:
        cfg = load_config(spec.config_path) if spec.config_path else default_config()
        if spec.overrides:
            cfg = apply_overrides(cfg, spec.overrides)
        if spec.seed is not None:
            cfg = replace(cfg, seed=spec.seed)
    except (OSError, KeyError, TypeError, ValueError) as exc:
        sys.stderr.write(f"invalid config: {exc}\n")
        return 3
    try:
        os.makedirs(spec.output_dir, exist_ok=True)
        SCENARIOS[spec.name](cfg, spec.output_dir)
    except Exception as exc:   # runtime failure contract
        sys.stderr.write(f"scenario failed: {exc}\n")
        return 1
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list:
        list_scenarios()
        return 0
    if args.command != "run":
        parser.print_usage()
        return 2
    overrides = {}
    for item in args.overrides:
        key, sep, value = item.partition("=")
        if not sep:
            sys.stderr.write(f"--set expects KEY=VALUE, got {item!r}\n")
            return 3
        overrides[key] = value
    spec = ScenarioSpec(name=args.scenario, config_path=args.config,
                        output_dir=args.out, seed=args.seed, overrides=overrides)
    return run_scenario(spec)


if __name__ == "__main__":
    sys.exit(main())
