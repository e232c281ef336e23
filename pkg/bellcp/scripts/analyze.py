"""
Analyze a trial-log CSV: empirical dataset, CHSH with standard error, the 8
CHSH variants, B-tilde, Fine verdict and signaling z-tests.

The report is JSON with a top-level "schema": "bellcp/1", keys sorted.

Usage:
    python -m bellcp.scripts.analyze trials.csv
    python -m bellcp.scripts.analyze trials.csv --out report.json
    python -m bellcp.cli analyze trials.csv --exact
"""

import argparse
import sys

from dotenv import load_dotenv

from bellcp.analysis import analyze_log
from bellcp.io import dump_report, read_trial_log, report_document
from bellcp.scripts.common import add_mode_flag, emit, resolve_mode, script_main

load_dotenv()


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("log", help="Trial-log CSV")
    parser.add_argument("--out", default=None, help="Report JSON (default: stdout)")
    add_mode_flag(parser)


def run(args: argparse.Namespace) -> int:
    log = read_trial_log(args.log)
    report = analyze_log(log, resolve_mode(args))
    emit(dump_report(report_document(report)), args.out)
    if args.out is not None:
        print(
            f"chsh: {report.chsh.value} +- {report.chsh.standard_error}; "
            f"signaling_detected={report.signaling_detected}; wrote {args.out}"
        )
    return 0


def main(argv: list[str] | None = None) -> int:
    return script_main("Statistical report for a trial log", add_arguments, run, argv)


if __name__ == "__main__":
    sys.exit(main())
