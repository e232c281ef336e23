"""
Signaling report of a dataset: marginal deltas per side, plus the
six-variable diagnosis of their cause (dependent generators, or outcomes
depending on the far generator).

Usage:
    python -m bellcp.scripts.signaling data.json
    python -m bellcp.cli signaling data.json --tol 1e-6 --out signaling.json
"""

import argparse
import sys

from dotenv import load_dotenv

from bellcp.io import dump_report, load_dataset, signaling_document
from bellcp.kh import build_jpd, signaling_diagnosis
from bellcp.numeric import to_probability
from bellcp.observational import signaling_report
from bellcp.scripts.common import add_mode_flag, emit, number_text, resolve_mode, script_main

load_dotenv()


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("dataset", help="Dataset JSON")
    parser.add_argument("--tol", type=number_text, default=None, help="Delta tolerance (default 0 exact, BELLCP_SIGNALING_TOLERANCE double)")
    parser.add_argument("--out", default=None, help="Report JSON (default: stdout)")
    add_mode_flag(parser)


def run(args: argparse.Namespace) -> int:
    mode = resolve_mode(args)
    ds = load_dataset(args.dataset, mode)
    tol = None if args.tol is None else to_probability(args.tol, ds.mode)
    report = signaling_report(ds, tol)
    diagnosis = signaling_diagnosis(build_jpd(ds), report.tol)
    emit(dump_report(signaling_document(report, diagnosis)), args.out)
    return 0


def main(argv: list[str] | None = None) -> int:
    return script_main("Signaling report of a dataset", add_arguments, run, argv)


if __name__ == "__main__":
    sys.exit(main())
