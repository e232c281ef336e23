"""
Observational data model of a Bohm-Bell experiment.

Four pairwise outcome distributions p_{AiBj}, one per setting pair, plus
the distribution of the setting generators p_{RARB}. This is the face of
the experiment that data and quantum predictions are given in; the
hidden-variable models in ``bchsh`` and ``kh`` are checked against it.
"""

import logging
from collections.abc import Mapping
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from bellcp.errors import InvalidDataset
from bellcp.numeric import (
    ArithmeticMode,
    Probability,
    mode_of,
    signaling_tolerance,
    sum_tolerance,
    to_probability,
    total,
)

logger = logging.getLogger(__name__)

OUTCOMES: tuple[int, int] = (-1, 1)
SETTINGS: tuple[int, int] = (1, 2)
CONTEXTS: tuple[tuple[int, int], ...] = ((1, 1), (1, 2), (2, 1), (2, 2))
# lexicographic cell order, shared by sampling and serialization
CELLS: tuple[tuple[int, int], ...] = ((-1, -1), (-1, 1), (1, -1), (1, 1))


class Side(str, Enum):
    A = "A"
    B = "B"


# ---------------------------------------------------------------------------
# Distributions
# ---------------------------------------------------------------------------

def _check_simplex(entries: Mapping, what: str, strictly_positive: bool = False) -> ArithmeticMode:
    mode = mode_of(entries.values())
    for key, p in entries.items():
        if p < 0 or p > 1:
            raise InvalidDataset(f"{what}{key} = {p} outside [0, 1]")
        if strictly_positive and p == 0:
            raise InvalidDataset(f"{what}{key} = 0; every setting pair needs positive probability")
    s = total(entries.values())
    if abs(s - 1) > sum_tolerance(mode):
        raise InvalidDataset(f"{what} entries sum to {s}, not 1")
    return mode


@dataclass(frozen=True)
class PairDistribution:
    """p_{AiBj}(alpha, beta) over the four +-1 outcome pairs."""

    entries: Mapping[tuple[int, int], Probability]
    mode: ArithmeticMode = field(init=False, compare=False)

    def __post_init__(self) -> None:
        if set(self.entries) != set(CELLS):
            raise InvalidDataset(f"pair distribution must have exactly the cells {CELLS}")
        object.__setattr__(self, "entries", {cell: self.entries[cell] for cell in CELLS})
        object.__setattr__(self, "mode", _check_simplex(self.entries, "p"))

    @classmethod
    def from_cells(cls, pp, pm, mp, mm, mode: ArithmeticMode | None = None) -> "PairDistribution":
        """Build from p(+,+), p(+,-), p(-,+), p(-,-)."""
        raw = {(1, 1): pp, (1, -1): pm, (-1, 1): mp, (-1, -1): mm}
        if mode is not None:
            raw = {cell: to_probability(v, mode) for cell, v in raw.items()}
        return cls(raw)

    def __getitem__(self, cell: tuple[int, int]) -> Probability:
        return self.entries[cell]

    def correlation(self) -> Probability:
        return total(a * b * p for (a, b), p in self.entries.items())

    def marginal(self, side: Side, value: int) -> Probability:
        index = 0 if side is Side.A else 1
        return total(p for cell, p in self.entries.items() if cell[index] == value)

    def to_mode(self, mode: ArithmeticMode) -> "PairDistribution":
        return PairDistribution({cell: to_probability(p, mode) for cell, p in self.entries.items()})


@dataclass(frozen=True)
class SettingDistribution:
    """p_{RARB}(i, j); every entry strictly positive."""

    entries: Mapping[tuple[int, int], Probability]
    mode: ArithmeticMode = field(init=False, compare=False)

    def __post_init__(self) -> None:
        if set(self.entries) != set(CONTEXTS):
            raise InvalidDataset(f"setting distribution must have exactly the pairs {CONTEXTS}")
        object.__setattr__(self, "entries", {ctx: self.entries[ctx] for ctx in CONTEXTS})
        object.__setattr__(self, "mode", _check_simplex(self.entries, "p_RARB", strictly_positive=True))

    @classmethod
    def uniform(cls, mode: ArithmeticMode | None = None) -> "SettingDistribution":
        mode = mode or ArithmeticMode.default()
        return cls({ctx: to_probability(Fraction(1, 4), mode) for ctx in CONTEXTS})

    @classmethod
    def product(cls, q: tuple, s: tuple, mode: ArithmeticMode | None = None) -> "SettingDistribution":
        """Independent generators: p(i, j) = q_i * s_j."""
        mode = mode or ArithmeticMode.default()
        q = [to_probability(v, mode) for v in q]
        s = [to_probability(v, mode) for v in s]
        return cls({(i, j): q[i - 1] * s[j - 1] for i, j in CONTEXTS})

    def __getitem__(self, ctx: tuple[int, int]) -> Probability:
        return self.entries[ctx]

    def to_mode(self, mode: ArithmeticMode) -> "SettingDistribution":
        return SettingDistribution({ctx: to_probability(p, mode) for ctx, p in self.entries.items()})


@dataclass(frozen=True)
class ObservationalDataset:
    pairs: Mapping[tuple[int, int], PairDistribution]
    settings: SettingDistribution
    mode: ArithmeticMode = field(init=False, compare=False)

    def __post_init__(self) -> None:
        if set(self.pairs) != set(CONTEXTS):
            missing = sorted(set(CONTEXTS) - set(self.pairs))
            raise InvalidDataset(f"dataset needs all four pair distributions; missing {missing}")
        object.__setattr__(self, "pairs", {ctx: self.pairs[ctx] for ctx in CONTEXTS})
        modes = {pd.mode for pd in self.pairs.values()} | {self.settings.mode}
        mode = ArithmeticMode.EXACT if modes == {ArithmeticMode.EXACT} else ArithmeticMode.DOUBLE
        object.__setattr__(self, "mode", mode)

    def pair(self, i: int, j: int) -> PairDistribution:
        return self.pairs[(i, j)]

    def to_mode(self, mode: ArithmeticMode) -> "ObservationalDataset":
        return ObservationalDataset(
            {ctx: pd.to_mode(mode) for ctx, pd in self.pairs.items()},
            self.settings.to_mode(mode),
        )

    def max_cell_difference(self, other: "ObservationalDataset") -> Probability:
        """Largest absolute difference over all pair cells and setting entries."""
        diffs = [
            abs(self.pairs[ctx][cell] - other.pairs[ctx][cell])
            for ctx in CONTEXTS
            for cell in CELLS
        ]
        diffs += [abs(self.settings[ctx] - other.settings[ctx]) for ctx in CONTEXTS]
        return max(diffs)


def uniform_dataset(mode: ArithmeticMode | None = None) -> ObservationalDataset:
    """All pair cells 1/4, uniform settings."""
    mode = mode or ArithmeticMode.default()
    quarter = to_probability(Fraction(1, 4), mode)
    pair = PairDistribution({cell: quarter for cell in CELLS})
    return ObservationalDataset({ctx: pair for ctx in CONTEXTS}, SettingDistribution.uniform(mode))


# ---------------------------------------------------------------------------
# Correlations and CHSH
# ---------------------------------------------------------------------------

def observational_correlation(ds: ObservationalDataset, i: int, j: int) -> Probability:
    """<A_i B_j> = sum over alpha, beta of alpha * beta * p_{AiBj}(alpha, beta)."""
    return ds.pair(i, j).correlation()


def chsh_from_correlations(correlations: Mapping[tuple[int, int], Probability]) -> Probability:
    """<11> - <12> + <21> + <22>: the minus sits on the (1,2) term."""
    c = correlations
    return c[(1, 1)] - c[(1, 2)] + c[(2, 1)] + c[(2, 2)]


def chsh_variants_from_correlations(correlations: Mapping[tuple[int, int], Probability]) -> dict[str, Probability]:
    """The 8 sign-symmetric CHSH expressions.

    Keys are ``"+S<ij>"`` for the sum with the minus on the (i, j) term and
    ``"-S<ij>"`` for its negation; ``"+S12"`` is the primary expression.
    """
    plain = sum(correlations[ctx] for ctx in CONTEXTS)
    variants: dict[str, Probability] = {}
    for i, j in CONTEXTS:
        value = plain - 2 * correlations[(i, j)]
        variants[f"+S{i}{j}"] = value
        variants[f"-S{i}{j}"] = -value
    return variants


def correlations(ds: ObservationalDataset) -> dict[tuple[int, int], Probability]:
    return {(i, j): observational_correlation(ds, i, j) for i, j in CONTEXTS}


def observational_chsh(ds: ObservationalDataset) -> Probability:
    return chsh_from_correlations(correlations(ds))


def chsh_variants(ds: ObservationalDataset) -> dict[str, Probability]:
    return chsh_variants_from_correlations(correlations(ds))


def max_chsh_variant(ds: ObservationalDataset) -> tuple[str, Probability]:
    variants = chsh_variants(ds)
    key = max(variants, key=lambda k: (variants[k], k))
    return key, variants[key]


# ---------------------------------------------------------------------------
# Marginals and signaling
# ---------------------------------------------------------------------------

def marginal_M(ds: ObservationalDataset, side: Side, i: int, other: int, alpha: int) -> Probability:
    """M_{i,other}(alpha): the side's own marginal in the context with the other side at ``other``."""
    side = Side(side)
    if side is Side.A:
        return ds.pair(i, other).marginal(Side.A, alpha)
    return ds.pair(other, i).marginal(Side.B, alpha)


@dataclass(frozen=True)
class SignalingReport:
    a_side_deltas: dict[tuple[int, int], Probability]
    b_side_deltas: dict[tuple[int, int], Probability]
    max_delta: Probability
    no_signaling: bool
    tol: Probability

    def deltas(self, side: Side) -> dict[tuple[int, int], Probability]:
        return self.a_side_deltas if Side(side) is Side.A else self.b_side_deltas

    def side_flat(self, side: Side) -> bool:
        """No signaling into ``side``: its marginals ignore the other side's setting."""
        return all(d <= self.tol for d in self.deltas(side).values())


def signaling_report(ds: ObservationalDataset, tol: Probability | None = None) -> SignalingReport:
    """Deltas |M_{i1}(alpha) - M_{i2}(alpha)| for both sides and every (i, alpha)."""
    if tol is None:
        tol = signaling_tolerance(ds.mode)
    per_side = {}
    for side in Side:
        per_side[side] = {
            (i, alpha): abs(marginal_M(ds, side, i, 1, alpha) - marginal_M(ds, side, i, 2, alpha))
            for i in SETTINGS
            for alpha in OUTCOMES
        }
    max_delta = max(max(d.values()) for d in per_side.values())
    report = SignalingReport(
        a_side_deltas=per_side[Side.A],
        b_side_deltas=per_side[Side.B],
        max_delta=max_delta,
        no_signaling=max_delta <= tol,
        tol=tol,
    )
    logger.debug("signaling report: max_delta=%s tol=%s", max_delta, tol)
    return report


# ---------------------------------------------------------------------------
# Canonical witnesses
# ---------------------------------------------------------------------------

def construct_pr_box(mode: ArithmeticMode | None = None) -> ObservationalDataset:
    """The PR box: perfect correlation in (1,1), (2,1), (2,2), anticorrelation in (1,2).

    Marginals are all 1/2 and the primary CHSH expression equals 4.
    """
    mode = mode or ArithmeticMode.default()
    half, nothing = to_probability(Fraction(1, 2), mode), to_probability(0, mode)
    correlated = PairDistribution.from_cells(half, nothing, nothing, half)
    anticorrelated = PairDistribution.from_cells(nothing, half, half, nothing)
    pairs = {ctx: correlated for ctx in CONTEXTS}
    pairs[(1, 2)] = anticorrelated
    return ObservationalDataset(pairs, SettingDistribution.uniform(mode))
