"""
Simulate trials from a dataset file and write the trial-log CSV.

The CSV has header trial_id,ra,rb,a1,a2,b1,b2; a sidecar <out>.meta.json
records {seed, n, source}. Identical dataset, n and seed give byte-identical
files regardless of --workers.

Usage:
    python -m bellcp.scripts.simulate tsirelson.json --n 100000 --seed 7 --out trials.csv
    python -m bellcp.scripts.simulate uniform.json --n 100000 --inject A:0.1 --out signaling.csv
    python -m bellcp.cli simulate tsirelson.json --n 1000000 --seed 7 --workers 4 --out trials.csv
"""

import argparse
import sys
from pathlib import Path

from dotenv import load_dotenv

from bellcp.config import settings
from bellcp.io import load_dataset, write_trial_log
from bellcp.observational import Side
from bellcp.scripts.common import add_mode_flag, positive_int, resolve_mode, script_main, seed_int
from bellcp.simulator import inject_signaling, simulate

load_dotenv()


def injection(text: str) -> tuple[Side, str]:
    """SIDE:EPSILON, e.g. A:0.1."""
    side, sep, eps = text.partition(":")
    if not sep or side.strip().upper() not in ("A", "B"):
        raise argparse.ArgumentTypeError(f"expected SIDE:EPSILON with SIDE in A, B; got {text!r}")
    try:
        float(eps)
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed epsilon {eps!r}") from None
    return Side(side.strip().upper()), eps.strip()


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("dataset", help="Dataset JSON")
    parser.add_argument("--n", type=positive_int, required=True, help="Number of trials")
    parser.add_argument("--seed", type=seed_int, default=None, help="64-bit seed (default BELLCP_DEFAULT_SEED)")
    parser.add_argument("--out", required=True, help="Trial-log CSV to write")
    parser.add_argument("--workers", type=positive_int, default=None, help="Threads for partitioned generation")
    parser.add_argument("--inject", type=injection, default=None, help="Shift a marginal first: SIDE:EPSILON")
    add_mode_flag(parser)


def run(args: argparse.Namespace) -> int:
    ds = load_dataset(args.dataset, resolve_mode(args))
    if args.inject is not None:
        ds = inject_signaling(ds, *args.inject)
    seed = settings.default_seed if args.seed is None else args.seed
    log = simulate(ds, args.n, seed, source=Path(args.dataset).name, workers=args.workers)
    write_trial_log(log, args.out)
    print(f"wrote {log.n} trials to {args.out} (seed={seed})")
    return 0


def main(argv: list[str] | None = None) -> int:
    return script_main("Simulate a trial log from a dataset", add_arguments, run, argv)


if __name__ == "__main__":
    sys.exit(main())
