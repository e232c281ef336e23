"""
CHSH quantities of a dataset: <11> - <12> + <21> + <22>, all 8 sign
variants, and the same combination over the conditional (B-tilde) and
unconditional correlations of its six-variable jpd.

Usage:
    python -m bellcp.scripts.chsh data.json
    python -m bellcp.cli chsh data.json --exact
"""

import argparse
import sys

from dotenv import load_dotenv

from bellcp.io import dump_report, load_dataset
from bellcp.kh import build_jpd, chsh_tilde, unconditional_chsh
from bellcp.models import ChshDocument
from bellcp.numeric import to_json_number
from bellcp.observational import chsh_variants, max_chsh_variant, observational_chsh
from bellcp.scripts.common import add_mode_flag, emit, resolve_mode, script_main

load_dotenv()


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("dataset", help="Dataset JSON")
    parser.add_argument("--out", default=None, help="Report JSON (default: stdout)")
    add_mode_flag(parser)


def run(args: argparse.Namespace) -> int:
    ds = load_dataset(args.dataset, resolve_mode(args))
    jpd = build_jpd(ds)
    document = ChshDocument(
        chsh=to_json_number(observational_chsh(ds)),
        chsh_variants={k: to_json_number(v) for k, v in chsh_variants(ds).items()},
        max_variant=max_chsh_variant(ds)[0],
        chsh_tilde=to_json_number(chsh_tilde(jpd).chsh_tilde),
        unconditional_chsh=to_json_number(unconditional_chsh(jpd)),
    )
    emit(dump_report(document), args.out)
    return 0


def main(argv: list[str] | None = None) -> int:
    return script_main("CHSH quantities of a dataset", add_arguments, run, argv)


if __name__ == "__main__":
    sys.exit(main())
