"""Command-line front end: ``nads sweep|optimize|validate --config FILE``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ConfigError
from .sweep import load_config, run_optimize, run_sweep, run_validate

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nads", description="Sweep, validate and design the two-tier abnormality detector.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("sweep", "evaluate closed-form curves over a parameter grid"),
                            ("optimize", "find the minimum sensor concentration"),
                            ("validate", "compare closed forms with Monte Carlo")):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, type=Path, help="sweep configuration file")
        cmd.add_argument("--out", type=Path, default=None, help="output CSV (default: stdout)")
        if name == "optimize":
            cmd.add_argument("--m-max", type=int, default=None,
                             help="search cap for M (default: m_range stop)")
        if name == "validate":
            cmd.add_argument("--trials", type=int, default=None)
            cmd.add_argument("--seed", type=int, default=None)
    return parser


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, newline="\n")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.command == "sweep":
            _emit(run_sweep(config), args.out)
            return EXIT_OK
        if args.command == "optimize":
            report = run_optimize(config, m_max=args.m_max)
            _emit(report.text, args.out)
            return EXIT_OK if report.ok else EXIT_INFEASIBLE
        report = run_validate(config, trials=args.trials, seed=args.seed)
        _emit(report.text, args.out)
        return EXIT_OK if report.ok else EXIT_VALIDATION
    except ConfigError as exc:
        print(f"nads: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
