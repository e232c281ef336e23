"""
Write the singlet-state prediction for four analyzer angles as a dataset file.

Angles are radians unless suffixed with "deg". Prints the CHSH value and the
largest marginal delta of the written dataset.

Usage:
    python -m bellcp.scripts.quantum --angles 0,90deg,45deg,135deg --out tsirelson.json
    python -m bellcp.scripts.quantum --angles 0,0,0,0 --settings 0.4,0.1,0.1,0.4 --out equal.json
    python -m bellcp.cli quantum --angles 0,1.5707963267948966,0.7853981633974483,2.356194490192345 --out d.json --exact
"""

import argparse
import sys

from dotenv import load_dotenv

from bellcp.io import dump_dataset
from bellcp.numeric import to_json_number
from bellcp.observational import observational_chsh, signaling_report
from bellcp.quantum import AngleConfig, Convention, singlet_dataset
from bellcp.scripts.common import (
    add_mode_flag,
    angle_list,
    resolve_mode,
    script_main,
    setting_distribution,
    settings_spec,
)

load_dotenv()


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--angles", type=angle_list, required=True, help="a1,a2,b1,b2 in radians or with 'deg' suffix")
    parser.add_argument("--settings", type=settings_spec, default=None, help="'uniform' (default) or p11,p12,p21,p22")
    parser.add_argument("--convention", choices=[c.value for c in Convention], default=Convention.SPIN.value,
                        help="spin: E = -cos(d); photon: E = -cos(2d)")
    parser.add_argument("--out", required=True, help="Dataset JSON to write")
    add_mode_flag(parser)


def run(args: argparse.Namespace) -> int:
    mode = resolve_mode(args)
    cfg = AngleConfig.from_angles(args.angles, setting_distribution(args.settings, mode))
    ds = singlet_dataset(cfg, mode, Convention(args.convention))
    dump_dataset(ds, args.out)

    report = signaling_report(ds)
    print(f"chsh: {to_json_number(observational_chsh(ds))}")
    print(f"max_delta: {to_json_number(report.max_delta)} (no_signaling={report.no_signaling})")
    print(f"wrote {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    return script_main("Singlet-state dataset for four analyzer angles", add_arguments, run, argv)


if __name__ == "__main__":
    sys.exit(main())
