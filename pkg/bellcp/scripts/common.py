"""Argument types and plumbing shared by the subcommands."""

import argparse
import math
import sys
from collections.abc import Callable
from pathlib import Path

from bellcp.errors import EXIT_IO, BellcpError
from bellcp.numeric import ArithmeticMode, to_probability
from bellcp.observational import CONTEXTS, SettingDistribution

_DEG = "deg"


def parse_angle(text: str) -> float:
    """Radians, or degrees with an explicit ``deg`` suffix."""
    raw = text.strip()
    try:
        if raw.lower().endswith(_DEG):
            value = math.radians(float(raw[: -len(_DEG)]))
        else:
            value = float(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed angle {text!r} (radians, or degrees as e.g. '45deg')") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"angle {text!r} is not finite")
    return value


def angle_list(text: str) -> tuple[float, float, float, float]:
    """Four comma-separated angles a1,a2,b1,b2."""
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(f"expected 4 comma-separated angles a1,a2,b1,b2, got {len(parts)}")
    return tuple(parse_angle(p) for p in parts)


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def seed_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an unsigned 64-bit seed, got {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed {value} outside [0, 2**64)")
    return value


def settings_spec(text: str) -> tuple[str, ...] | None:
    """``uniform`` or four comma-separated probabilities p11,p12,p21,p22 (kept as text until the mode is known)."""
    if text.strip().lower() == "uniform":
        return None
    parts = tuple(p.strip() for p in text.split(","))
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(f"expected 'uniform' or 4 comma-separated probabilities, got {text!r}")
    for p in parts:
        try:
            to_probability(p, ArithmeticMode.EXACT)
        except (ValueError, ZeroDivisionError):
            raise argparse.ArgumentTypeError(f"malformed probability {p!r}") from None
    return parts


def setting_distribution(spec: tuple[str, ...] | None, mode: ArithmeticMode) -> SettingDistribution:
    if spec is None:
        return SettingDistribution.uniform(mode)
    return SettingDistribution({ctx: to_probability(p, mode) for ctx, p in zip(CONTEXTS, spec)})


def add_mode_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--exact", action="store_true",
        help="Exact rational arithmetic (overrides BELLCP_MODE)",
    )


def resolve_mode(args: argparse.Namespace) -> ArithmeticMode:
    return ArithmeticMode.EXACT if getattr(args, "exact", False) else ArithmeticMode.default()


def emit(text: str, out: str | Path | None) -> None:
    """Write ``text`` to ``out``, or to stdout when no path is given."""
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def guarded(run: Callable[[argparse.Namespace], int], args: argparse.Namespace) -> int:
    """Run a subcommand and turn library failures into exit codes."""
    try:
        return run(args)
    except BellcpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def script_main(description: str, add_arguments, run, argv: list[str] | None = None) -> int:
    """Standalone entry point for a single subcommand module."""
    parser = argparse.ArgumentParser(description=description)
    add_arguments(parser)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return guarded(run, args)


def number_text(text: str) -> str:
    """A number kept as text so it can be read exactly later."""
    try:
        to_probability(text, ArithmeticMode.EXACT)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"malformed number {text!r}") from None
    return text
