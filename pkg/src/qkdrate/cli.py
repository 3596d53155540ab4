"""Batch command-line tool.

Subcommands: ``scan`` (distance sweep to CSV), ``optimize`` (sweep with
per-distance parameter search), ``compare`` (loose-vs-precise summary),
``verify`` (oracle invariant suite).  Exit codes: 0 success, 1
validation error, 2 oracle failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .config import ConfigError, load_config
from .scan import compare_summary, run_scan, write_csv
from .verify import run_all

__all__ = ["main"]


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="qkdrate",
        description="Key-rate scans for phase-postselected QKD, comparing the "
                    "plain window-averaged phase-error bound with its "
                    "sinc-tightened version.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("scan", "compute a distance sweep and write CSV"),
        ("optimize", "distance sweep with per-distance parameter search"),
        ("compare", "report crossover distance and max-distance extension"),
        ("verify", "run the brute-force oracle invariant suite"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=(name != "verify"),
                       help="path to the JSON run configuration")
        p.add_argument("--out", help="output path (CSV for scans, JSON for compare)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--jobs", type=int, default=1,
                       help="accepted for interface compatibility; rows are "
                            "computed in deterministic distance order")
        if name == "verify":
            p.add_argument("--quick", action="store_true",
                           help="smaller grids for a fast smoke run")
    return parser


def _load(args):
    config = load_config(args.config)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    if args.jobs is not None and args.jobs < 1:
        raise ConfigError("--jobs must be at least 1")
    return config


def _cmd_scan(args, optimize: bool) -> int:
    config = _load(args)
    if optimize:
        config = dataclasses.replace(config, optimize=True)
    rows = run_scan(config)
    out = args.out or config.output
    if out:
        write_csv(rows, config, out)
        print(f"wrote {len(rows)} rows to {out}")
    else:
        write_csv(rows, config, sys.stdout)
    return 0


def _cmd_compare(args) -> int:
    config = _load(args)
    summary = compare_summary(config)
    text = json.dumps(summary, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def _cmd_verify(args) -> int:
    seed = args.seed if args.seed is not None else 0
    results = run_all(seed=seed, quick=args.quick)
    failed = False
    for res in results:
        print(res.line())
        failed = failed or not res.passed
    return 2 if failed else 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "scan":
            return _cmd_scan(args, optimize=False)
        if args.command == "optimize":
            return _cmd_scan(args, optimize=True)
        if args.command == "compare":
            return _cmd_compare(args)
        return _cmd_verify(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
