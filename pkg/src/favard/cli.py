"""Command-line entry point: ``favard {analyze,favard,riesz,slv,report}``."""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .exceptions import ConfigError, FavardError
from .experiments import (TASKS, ExperimentConfig, records_to_text, render_report, run_analyze,
                          run_favard, run_report, run_riesz, run_slv)

DEFAULT_CONFIG = """
digits = [[0, 3], [0, 3]]
L = 4
"""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="favard", description=__doc__)
    parser.add_argument("--version", action="version", version=f"favard {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in TASKS:
        p = sub.add_parser(name, help=f"run the {name} task")
        p.add_argument("--config", metavar="PATH", help="flat TOML config (default: four-corner set)")
        p.add_argument("--seed", type=int, help="seed for all randomness")
        p.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
        p.add_argument("--budget", type=int, metavar="CELLS", help="maximum number of cells")
        p.add_argument("--samples", type=int, metavar="N", help="number of random directions")
        p.add_argument("--format", choices=("csv", "json-lines"), help="table format")
        p.add_argument("--timing", action="store_true", default=None,
                       help="fill the seconds column (output is then not byte-reproducible)")
    return parser


def _load(args) -> ExperimentConfig:
    overrides = dict(task=args.command, seed=args.seed, out=args.out, budget=args.budget,
                     samples=args.samples, format=args.format, timing=args.timing)
    if args.config:
        return ExperimentConfig.from_file(args.config, **overrides)
    return ExperimentConfig.from_toml(DEFAULT_CONFIG, **overrides)


def run(config: ExperimentConfig) -> str:
    if config.task == "analyze":
        return render_report(run_analyze(config))
    if config.task == "report":
        return render_report(run_report(config))
    if config.task == "favard":
        series = run_favard(config)
        return series.to_csv() if config.format == "csv" else series.to_json_lines()
    records = run_riesz(config) if config.task == "riesz" else run_slv(config)
    return records_to_text(records, config.format)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _load(args)
        text = run(config)
    except ConfigError as exc:
        print(f"favard: configuration error: {exc}", file=sys.stderr)
        return 2
    except FavardError as exc:
        print(f"favard: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if config.out:
        with open(config.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
