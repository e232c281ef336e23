"""
CLI entrypoint for bellcp.

Usage:
    python -m bellcp.cli quantum --angles 0,90deg,45deg,135deg --out tsirelson.json [--settings uniform] [--convention spin]
    python -m bellcp.cli simulate tsirelson.json --n 100000 --seed 7 --out trials.csv [--workers 4] [--inject A:0.1]
    python -m bellcp.cli analyze trials.csv [--out report.json]
    python -m bellcp.cli jpd tsirelson.json --model kh --out tsirelson.jpd.json
    python -m bellcp.cli jpd tsirelson.json --model bchsh-fine
    python -m bellcp.cli signaling tsirelson.json [--tol 1e-9]
    python -m bellcp.cli chsh tsirelson.json

Every subcommand accepts --exact (overrides BELLCP_MODE). Exit codes:
0 success, 2 usage, 3 validation, 4 I/O, 5 empty context.
"""

import argparse
import logging
import sys

from dotenv import load_dotenv

from bellcp.config import settings
from bellcp.scripts.common import guarded

load_dotenv()


def build_parser() -> argparse.ArgumentParser:
    from bellcp.scripts import analyze, chsh, jpd, quantum, signaling, simulate

    parser = argparse.ArgumentParser(
        description="bellcp: Bell/CHSH probability models, simulation and analysis",
        prog="python -m bellcp.cli",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    commands = [
        ("quantum", quantum, "Write the singlet dataset for four analyzer angles"),
        ("simulate", simulate, "Simulate a trial-log CSV from a dataset"),
        ("analyze", analyze, "Statistical report for a trial log"),
        ("jpd", jpd, "Joint distribution of a dataset (kh or bchsh-fine)"),
        ("signaling", signaling, "Signaling report and its six-variable diagnosis"),
        ("chsh", chsh, "CHSH value, its 8 variants, B-tilde and the unconditional combination"),
    ]
    for name, module, help_text in commands:
        sub = subparsers.add_parser(name, help=help_text)
        module.add_arguments(sub)
        sub.set_defaults(func=module.run)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=settings.log_level, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return guarded(args.func, args)


if __name__ == "__main__":
    sys.exit(main())
