"""
Arithmetic modes.

Probabilities are either exact rationals (``fractions.Fraction``) or IEEE
doubles. A mode is chosen when data is loaded or constructed; operations
then stay inside that representation, since Fraction arithmetic is closed
under +, x and / and float arithmetic stays float.
"""

import math
from collections.abc import Iterable
from enum import Enum
from fractions import Fraction
from numbers import Rational

from bellcp.config import settings

Probability = Fraction | float


class ArithmeticMode(str, Enum):
    EXACT = "exact"
    DOUBLE = "double"

    @classmethod
    def default(cls) -> "ArithmeticMode":
        return cls(settings.mode)


def to_probability(value, mode: ArithmeticMode) -> Probability:
    """Coerce a number or numeric string into the representation of ``mode``.

    Strings are parsed as exact rationals ("0.25", "1/3", "1e-3") before any
    conversion, so decimal input stays exact in exact mode.
    """
    if isinstance(value, str):
        value = Fraction(value.strip())
    if mode is ArithmeticMode.EXACT:
        if isinstance(value, float):
            if not math.isfinite(value):
                raise ValueError(f"non-finite probability {value!r}")
            return Fraction(value)
        return Fraction(value)
    return float(value)


def mode_of(values: Iterable) -> ArithmeticMode:
    """EXACT when every value is rational, DOUBLE as soon as one float appears."""
    for v in values:
        if not isinstance(v, Rational):
            return ArithmeticMode.DOUBLE
    return ArithmeticMode.EXACT


def total(values: Iterable[Probability]) -> Probability:
    values = list(values)
    if mode_of(values) is ArithmeticMode.EXACT:
        return sum(values, Fraction(0))
    return math.fsum(values)


def zero(mode: ArithmeticMode) -> Probability:
    return Fraction(0) if mode is ArithmeticMode.EXACT else 0.0


def sum_tolerance(mode: ArithmeticMode) -> Probability:
    return Fraction(0) if mode is ArithmeticMode.EXACT else settings.sum_tolerance


def independence_tolerance(mode: ArithmeticMode) -> Probability:
    return Fraction(0) if mode is ArithmeticMode.EXACT else settings.independence_tolerance


def signaling_tolerance(mode: ArithmeticMode) -> Probability:
    return Fraction(0) if mode is ArithmeticMode.EXACT else settings.signaling_tolerance


def is_terminating(value: Fraction) -> bool:
    d = value.denominator
    for p in (2, 5):
        while d % p == 0:
            d //= p
    return d == 1


def format_exact(value: Fraction) -> str:
    """Decimal string when the expansion terminates, ``"p/q"`` otherwise."""
    if value.denominator == 1:
        return str(value.numerator)
    if not is_terminating(value):
        return f"{value.numerator}/{value.denominator}"
    digits = _decimal_places(value.denominator)
    scaled = value.numerator * 10**digits // value.denominator
    sign = "-" if scaled < 0 else ""
    scaled = abs(scaled)
    whole, frac = divmod(scaled, 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}".rstrip("0").rstrip(".")


def _decimal_places(denominator: int) -> int:
    twos = fives = 0
    while denominator % 2 == 0:
        denominator //= 2
        twos += 1
    while denominator % 5 == 0:
        denominator //= 5
        fives += 1
    return max(twos, fives)


def to_json_number(value: Probability) -> str | float:
    """JSON representation: exact values as strings, doubles as numbers."""
    if isinstance(value, Rational):
        return format_exact(Fraction(value))
    return float(value)
