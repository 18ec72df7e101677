"""Command-line front end: run experiments, sweep horizons, verify the build.

Grammar:

    sea-oco <run|sweep|verify> [--config PATH] [--out DIR] [--worst-case]
            [--set key=value]... [--criteria N,M,...]

Exit codes are stable: 0 success, 1 trial or verification failure, 2 bad
configuration or usage (unknown key, missing config file). The environment
variable SEA_OCO_SEED rebases the seed list of the loaded config.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .acceptance import CRITERIA, run_acceptance
from .errors import ConfigurationError, ContractViolationError
from .harness import apply_overrides, parse_config_file, run_experiment

EXIT_OK = 0
EXIT_TRIAL_FAILURE = 1
EXIT_CONFIG_ERROR = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sea-oco",
        description="Regret experiments for online convex optimization against "
        "stochastically extended adversaries.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "execute one experiment config"),
        ("sweep", "execute the config over a log-spaced horizon grid"),
        ("verify", "run the acceptance suite and print a per-criterion table"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None, help="path to an INI config file")
        p.add_argument("--out", default=None, help="output directory for CSV/JSON")
        p.add_argument(
            "--worst-case",
            action="store_true",
            help="tune OFTRL with nu = 2DG (deterministic safety)",
        )
        p.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="SECTION.KEY=VALUE",
            help="override a config key (repeatable, last wins)",
        )
        if name == "verify":
            p.add_argument(
                "--criteria",
                default=None,
                help="comma-separated criterion numbers to run (default: all)",
            )
    return parser


def _load_config(args):
    if args.config is None:
        raise ConfigurationError("--config is required for this command")
    cfg = parse_config_file(args.config)
    cfg.worst_case = bool(args.worst_case)
    if args.out is not None:
        cfg.out_dir = args.out
    if args.set:
        cfg = apply_overrides(cfg, args.set)
        if args.out is not None:
            cfg.out_dir = args.out
    return cfg


def _sweep_horizons(cfg):
    extra = cfg.run_extra
    lo = int(extra.get("sweep_min", cfg.horizons[0]))
    hi = int(extra.get("sweep_max", cfg.horizons[-1]))
    points = int(extra.get("sweep_points", max(len(cfg.horizons), 4)))
    if lo <= 0 or hi <= lo or points < 2:
        raise ConfigurationError(
            f"bad sweep grid: sweep_min={lo}, sweep_max={hi}, sweep_points={points}"
        )
    grid = np.unique(np.geomspace(lo, hi, points).round().astype(int))
    cfg.horizons = [int(t) for t in grid]
    return cfg


def _print_aggregates(result) -> None:
    cols = ("T", "regret_mean", "regret_stderr", "sigma_bar", "Sigma_bar", "bound_thm1")
    print("  ".join(f"{c:>14}" for c in cols))
    for agg in result.aggregates:
        print("  ".join(f"{agg[c]:>14.6g}" for c in cols))
    if any(s is not None for s in result.slopes.values()):
        print(f"slopes (largest horizons): {result.slopes}")
    print(f"checks: {result.checks}")
    if result.csv_path:
        print(f"wrote {result.csv_path} and {result.json_path}")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            numbers = None
            if args.criteria:
                numbers = [int(n) for n in args.criteria.split(",")]
                unknown = [n for n in numbers if n not in CRITERIA]
                if unknown:
                    raise ConfigurationError(f"unknown criteria {unknown}")
            results = run_acceptance(numbers)
            failed = [r for r in results if not r.passed]
            print(
                f"\n{len(results) - len(failed)}/{len(results)} criteria passed"
                + (f"; FAILED: {[r.number for r in failed]}" if failed else "")
            )
            return EXIT_TRIAL_FAILURE if failed else EXIT_OK

        cfg = _load_config(args)
        if args.command == "sweep":
            cfg = _sweep_horizons(cfg)
        result = run_experiment(cfg)
        _print_aggregates(result)
        return EXIT_OK
    except (ConfigurationError, ContractViolationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except RuntimeError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_TRIAL_FAILURE


if __name__ == "__main__":
    sys.exit(main())
