"""
Finite probability spaces, random variables, conditioning and independence.

The event algebra is the full power set of the atoms, so events are given
as atom predicates. Everything here is immutable and pure.
"""

import itertools
import logging
from collections import defaultdict
from collections.abc import Callable, Hashable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field

from bellcp.errors import InvalidDistribution, ZeroConditioningEvent
from bellcp.numeric import (
    ArithmeticMode,
    Probability,
    independence_tolerance,
    mode_of,
    sum_tolerance,
    to_probability,
    total,
)

logger = logging.getLogger(__name__)

Atom = Hashable
Predicate = Callable[[Atom], bool]


# ---------------------------------------------------------------------------
# Spaces and random variables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FiniteSpace:
    """Atoms with their probability weights; the sigma-algebra is the power set."""

    atoms: tuple[Atom, ...]
    weights: tuple[Probability, ...]
    mode: ArithmeticMode = field(init=False)

    def __post_init__(self) -> None:
        if len(self.atoms) != len(self.weights):
            raise InvalidDistribution(f"{len(self.atoms)} atoms but {len(self.weights)} weights")
        if not self.atoms:
            raise InvalidDistribution("a probability space needs at least one atom")
        if len(set(self.atoms)) != len(self.atoms):
            raise InvalidDistribution("atom labels must be distinct")
        mode = mode_of(self.weights)
        object.__setattr__(self, "mode", mode)
        for atom, w in zip(self.atoms, self.weights):
            if w < 0 or w > 1:
                raise InvalidDistribution(f"weight {w} of atom {atom!r} outside [0, 1]")
        s = total(self.weights)
        if abs(s - 1) > sum_tolerance(mode):
            raise InvalidDistribution(f"weights sum to {s}, not 1")

    @classmethod
    def from_mapping(
        cls,
        weights: Mapping[Atom, object],
        mode: ArithmeticMode | None = None,
    ) -> "FiniteSpace":
        """Build a space from ``{atom: weight}``; ``mode`` coerces the weights."""
        atoms = tuple(weights)
        values = tuple(weights.values())
        if mode is not None:
            values = tuple(to_probability(v, mode) for v in values)
        return cls(atoms, values)

    def items(self) -> Iterable[tuple[Atom, Probability]]:
        return zip(self.atoms, self.weights)

    def weight(self, atom: Atom) -> Probability:
        return dict(self.items())[atom]


@dataclass(frozen=True)
class RandomVariable:
    """A named total map from atoms to integers."""

    name: str
    assignment: Mapping[Atom, int] = field(compare=False)

    @classmethod
    def from_function(cls, name: str, space: FiniteSpace, fn: Callable[[Atom], int]) -> "RandomVariable":
        return cls(name, {atom: int(fn(atom)) for atom in space.atoms})

    @classmethod
    def coordinate(cls, name: str, space: FiniteSpace, index: int) -> "RandomVariable":
        """The projection of tuple-valued atoms onto one coordinate."""
        return cls.from_function(name, space, lambda atom: atom[index])

    def __call__(self, atom: Atom) -> int:
        return self.assignment[atom]

    def is_defined_on(self, space: FiniteSpace) -> bool:
        return all(atom in self.assignment for atom in space.atoms)


def _require_defined(space: FiniteSpace, variables: Iterable[RandomVariable]) -> None:
    for rv in variables:
        if not rv.is_defined_on(space):
            raise ValueError(f"random variable {rv.name!r} is not defined on every atom")


# ---------------------------------------------------------------------------
# Events and conditioning
# ---------------------------------------------------------------------------

def event_probability(space: FiniteSpace, predicate: Predicate) -> Probability:
    """P(E) for the event E = {atom : predicate(atom)}."""
    return total(w for atom, w in space.items() if predicate(atom))


def conditional_probability(space: FiniteSpace, target: Predicate, given: Predicate) -> Probability:
    """P(target | given) = P(target and given) / P(given).

    Raises ZeroConditioningEvent when P(given) = 0; the ratio is undefined
    there and is never replaced by a default.
    """
    denominator = event_probability(space, given)
    if denominator == 0:
        raise ZeroConditioningEvent("conditioning event has probability zero")
    numerator = event_probability(space, lambda atom: given(atom) and target(atom))
    return numerator / denominator


def distribution_of(space: FiniteSpace, variables: Sequence[RandomVariable]) -> dict[tuple[int, ...], Probability]:
    """Joint law of a vector of random variables, keyed by value tuples."""
    _require_defined(space, variables)
    grouped: dict[tuple[int, ...], list[Probability]] = defaultdict(list)
    for atom, w in space.items():
        grouped[tuple(rv(atom) for rv in variables)].append(w)
    return {value: total(ws) for value, ws in grouped.items()}


# ---------------------------------------------------------------------------
# Independence
# ---------------------------------------------------------------------------

def are_independent(
    space: FiniteSpace,
    X: Sequence[RandomVariable],
    Y: Sequence[RandomVariable],
    tol: Probability | None = None,
) -> bool:
    """True iff |P(X=x, Y=y) - P(X=x)P(Y=y)| <= tol for every joint value.

    X and Y are vectors of random variables, so groupings such as the pair
    (a_i, r_a) against r_b are tested as a single factorization.
    """
    if tol is None:
        tol = independence_tolerance(space.mode)
    X, Y = list(X), list(Y)
    joint = distribution_of(space, X + Y)
    px = distribution_of(space, X)
    py = distribution_of(space, Y)
    for x, y in itertools.product(px, py):
        p_xy = joint.get(x + y, 0)
        if abs(p_xy - px[x] * py[y]) > tol:
            logger.debug("dependence at %s=%s, %s=%s", [v.name for v in X], x, [v.name for v in Y], y)
            return False
    return True


@dataclass(frozen=True)
class LemmaVerdict:
    conditionals_flat: bool
    independent: bool

    @property
    def implication_holds(self) -> bool:
        """Flat conditionals imply independence."""
        return self.independent or not self.conditionals_flat


def check_appendix_lemma(
    space: FiniteSpace,
    X: RandomVariable,
    Y: RandomVariable,
    tol: Probability | None = None,
    values: tuple[int, int] = (1, 2),
) -> LemmaVerdict:
    """Compare P(X=x | Y=y1) with P(X=x | Y=y2) and test X independent of Y.

    For a dichotomous Y with both values of positive mass, flat conditionals
    imply independence; the verdict pair lets callers check the implication.
    """
    if tol is None:
        tol = independence_tolerance(space.mode)
    _require_defined(space, (X, Y))
    y1, y2 = values
    if any(w > 0 and Y(atom) not in values for atom, w in space.items()):
        raise ValueError(f"{Y.name} takes values outside {values}")
    for y in values:
        if event_probability(space, lambda a, y=y: Y(a) == y) == 0:
            raise ZeroConditioningEvent(f"{Y.name}={y} has probability zero")
    flat = True
    for x in sorted({X(atom) for atom in space.atoms}):
        p1 = conditional_probability(space, lambda a, x=x: X(a) == x, lambda a: Y(a) == y1)
        p2 = conditional_probability(space, lambda a, x=x: X(a) == x, lambda a: Y(a) == y2)
        if abs(p1 - p2) > tol:
            flat = False
            break
    return LemmaVerdict(conditionals_flat=flat, independent=are_independent(space, [X], [Y], tol))
