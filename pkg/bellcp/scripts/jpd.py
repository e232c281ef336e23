"""
Construct a joint distribution for a dataset.

--model kh          six-variable jpd with setting generators; always exists.
                    Writes the 16-record jpd JSON to --out and prints matching
                    verdict and B-tilde.
--model bchsh-fine  four-variable jpd via Fine feasibility. Prints the verdict
                    (with witness when feasible) and writes it to --out.

Usage:
    python -m bellcp.scripts.jpd prbox.json --model kh --out prbox.jpd.json
    python -m bellcp.scripts.jpd prbox.json --model bchsh-fine
    python -m bellcp.cli jpd data.json --model bchsh-fine --out verdict.json --exact
"""

import argparse
import sys

from dotenv import load_dotenv

from bellcp.bchsh import fine_feasibility
from bellcp.io import dump_jpd, dump_report, fine_document, load_dataset
from bellcp.kh import build_jpd, chsh_tilde, matching_violations
from bellcp.models import KhJpdSummary
from bellcp.numeric import to_json_number
from bellcp.scripts.common import add_mode_flag, emit, resolve_mode, script_main

load_dotenv()

MODELS = ("kh", "bchsh-fine")


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("dataset", help="Dataset JSON")
    parser.add_argument("--model", choices=MODELS, default="kh", help="Joint-distribution model")
    parser.add_argument("--out", default=None, help="jpd JSON (kh) or verdict JSON (bchsh-fine)")
    add_mode_flag(parser)


def run(args: argparse.Namespace) -> int:
    ds = load_dataset(args.dataset, resolve_mode(args))
    if args.model == "kh":
        jpd = build_jpd(ds)
        if args.out is not None:
            dump_jpd(jpd, args.out)
        violations = matching_violations(jpd)
        summary = KhJpdSummary(
            records=len(jpd.records()),
            matching=not violations,
            violations=violations,
            chsh_tilde=to_json_number(chsh_tilde(jpd).chsh_tilde),
        )
        emit(dump_report(summary), None)
        return 0

    text = dump_report(fine_document(fine_feasibility(ds)))
    emit(text, None)
    if args.out is not None:
        emit(text, args.out)
    return 0


def main(argv: list[str] | None = None) -> int:
    return script_main("Joint distribution of a dataset", add_arguments, run, argv)


if __name__ == "__main__":
    sys.exit(main())
