"""
The six-random-variable model with setting generators.

Outcome variables a1, a2, b1, b2 take values in {-1, 0, +1}; r_a, r_b in
{1, 2} model the generators that select which observable is measured.
An outcome variable is 0 exactly when its setting was not selected, which
leaves 16 atoms of positive weight. Observational probabilities are the
conditionals given (r_a, r_b) = (i, j), and the jpd is fixed by them.

Signaling becomes a statement about random variables here: B->A
signaling means either the generators are dependent or the pair
(a_i, r_a) depends on r_b.
"""

import itertools
import logging
from collections.abc import Mapping
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import NamedTuple

from bellcp.errors import InvalidDataset, InvalidDistribution, ZeroConditioningEvent
from bellcp.numeric import (
    ArithmeticMode,
    Probability,
    independence_tolerance,
    mode_of,
    sum_tolerance,
    total,
)
from bellcp.observational import (
    CELLS,
    CONTEXTS,
    OUTCOMES,
    SETTINGS,
    ObservationalDataset,
    PairDistribution,
    SettingDistribution,
    Side,
    chsh_from_correlations,
    signaling_report,
)
from bellcp.probability import FiniteSpace, RandomVariable, are_independent

logger = logging.getLogger(__name__)

VARIABLES: tuple[str, ...] = ("a1", "a2", "b1", "b2", "ra", "rb")


class SixAtom(NamedTuple):
    a1: int
    a2: int
    b1: int
    b2: int
    ra: int
    rb: int

    def outcome(self, side: Side, index: int) -> int:
        if Side(side) is Side.A:
            return self.a1 if index == 1 else self.a2
        return self.b1 if index == 1 else self.b2

    def setting(self, side: Side) -> int:
        return self.ra if Side(side) is Side.A else self.rb

    @property
    def matches(self) -> bool:
        """Outcome variables are nonzero exactly for the selected settings."""
        return all(
            (self.outcome(side, k) != 0) == (self.setting(side) == k)
            for side in Side
            for k in SETTINGS
        )


def support_atom(i: int, j: int, alpha: int, beta: int) -> SixAtom:
    """The atom with r_a = i, r_b = j, a_i = alpha, b_j = beta and zeros elsewhere."""
    a = [0, 0]
    b = [0, 0]
    a[i - 1] = alpha
    b[j - 1] = beta
    return SixAtom(a[0], a[1], b[0], b[1], i, j)


SUPPORT: tuple[SixAtom, ...] = tuple(
    sorted(support_atom(i, j, alpha, beta) for (i, j) in CONTEXTS for (alpha, beta) in CELLS)
)


# ---------------------------------------------------------------------------
# SixVarJpd
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SixVarJpd:
    """Joint law of (a1, a2, b1, b2, r_a, r_b), stored sparsely.

    Any atom of {-1,0,1}^4 x {1,2}^2 is accepted so that malformed jpds can
    be represented and diagnosed by ``verify_matching``; ``build_jpd`` only
    ever places mass on the 16 support atoms.
    """

    weights: Mapping[SixAtom, Probability]
    mode: ArithmeticMode = field(init=False, compare=False)

    def __post_init__(self) -> None:
        normalized: dict[SixAtom, Probability] = {}
        for atom, w in self.weights.items():
            atom = SixAtom(*atom)
            if any(v not in (-1, 0, 1) for v in atom[:4]) or atom.ra not in SETTINGS or atom.rb not in SETTINGS:
                raise InvalidDistribution(f"atom {tuple(atom)} outside {{-1,0,1}}^4 x {{1,2}}^2")
            if w < 0 or w > 1:
                raise InvalidDistribution(f"weight {w} of atom {tuple(atom)} outside [0, 1]")
            if atom in normalized:
                raise InvalidDistribution(f"atom {tuple(atom)} listed twice")
            normalized[atom] = w
        mode = mode_of(normalized.values())
        s = total(normalized.values())
        if abs(s - 1) > sum_tolerance(mode):
            raise InvalidDistribution(f"six-variable jpd weights sum to {s}, not 1")
        object.__setattr__(self, "weights", dict(sorted(normalized.items())))
        object.__setattr__(self, "mode", mode)

    def weight(self, atom: SixAtom) -> Probability:
        return self.weights.get(SixAtom(*atom), Fraction(0) if self.mode is ArithmeticMode.EXACT else 0.0)

    def records(self) -> list[tuple[SixAtom, Probability]]:
        """Support atoms in lexicographic order, followed by any off-support mass."""
        rows = [(atom, self.weight(atom)) for atom in SUPPORT]
        rows += [(atom, w) for atom, w in self.weights.items() if atom not in SUPPORT and w != 0]
        return rows

    def probability(self, predicate) -> Probability:
        return total(w for atom, w in self.weights.items() if predicate(atom))


def jpd_space(jpd: SixVarJpd) -> tuple[FiniteSpace, dict[str, RandomVariable]]:
    """The jpd as a probability space with its six coordinate random variables."""
    space = FiniteSpace(tuple(jpd.weights), tuple(jpd.weights.values()))
    variables = {name: RandomVariable.coordinate(name, space, k) for k, name in enumerate(VARIABLES)}
    return space, variables


# ---------------------------------------------------------------------------
# Construction and correspondence
# ---------------------------------------------------------------------------

def build_jpd(ds: ObservationalDataset) -> SixVarJpd:
    """P(..., i, j) = p_{AiBj}(alpha, beta) * p_{RARB}(i, j) on the 16 support atoms."""
    if not isinstance(ds, ObservationalDataset):
        raise InvalidDataset(f"expected an ObservationalDataset, got {type(ds).__name__}")
    weights = {
        support_atom(i, j, alpha, beta): ds.pair(i, j)[(alpha, beta)] * ds.settings[(i, j)]
        for (i, j) in CONTEXTS
        for (alpha, beta) in CELLS
    }
    if ds.mode is ArithmeticMode.DOUBLE:
        # each factor may be off by the sum tolerance, so the products can drift by twice that
        mass = total(weights.values())
        weights = {atom: w / mass for atom, w in weights.items()}
    try:
        return SixVarJpd(weights)
    except InvalidDistribution as exc:
        raise InvalidDataset(str(exc)) from exc


def setting_mass(jpd: SixVarJpd, i: int, j: int) -> Probability:
    return jpd.probability(lambda atom: atom.ra == i and atom.rb == j)


def _conditional_pair(jpd: SixVarJpd, i: int, j: int, alpha: int, beta: int) -> Probability:
    """P(a_i = alpha, b_j = beta | r_a = i, r_b = j)."""
    given = setting_mass(jpd, i, j)
    if given == 0:
        raise ZeroConditioningEvent(f"P(r_a={i}, r_b={j}) = 0")
    joint = jpd.probability(
        lambda atom: atom.ra == i and atom.rb == j
        and atom.outcome(Side.A, i) == alpha and atom.outcome(Side.B, j) == beta
    )
    return joint / given


def extract_observational(jpd: SixVarJpd) -> ObservationalDataset:
    """Pair distributions as conditionals given the settings; settings as the generator law."""
    for i, j in CONTEXTS:
        if setting_mass(jpd, i, j) == 0:
            raise ZeroConditioningEvent(f"P(r_a={i}, r_b={j}) = 0")
    pairs = {
        (i, j): PairDistribution({(alpha, beta): _conditional_pair(jpd, i, j, alpha, beta) for alpha, beta in CELLS})
        for i, j in CONTEXTS
    }
    settings_dist = SettingDistribution({(i, j): setting_mass(jpd, i, j) for i, j in CONTEXTS})
    return ObservationalDataset(pairs, settings_dist)


# ---------------------------------------------------------------------------
# Matching conditions
# ---------------------------------------------------------------------------

def matching_violations(jpd: SixVarJpd, tol: Probability | None = None) -> list[str]:
    """Every failed matching identity, described; empty when all hold.

    Checked per side s with outcome variables x1, x2 and generator r:
      P(x_k = +-1, r = m) = 0 for k != m
      P(x_k = 0, r = m) = P(r = m) for k != m
      P(x_k = 0, r = k) = 0 and P(x_k = -1, r = k) + P(x_k = +1, r = k) = P(r = k)
    """
    if tol is None:
        tol = sum_tolerance(jpd.mode)
    problems: list[str] = []
    for side in Side:
        x = "a" if side is Side.A else "b"
        r = "r_a" if side is Side.A else "r_b"
        for k, m in itertools.product(SETTINGS, SETTINGS):
            p_r = jpd.probability(lambda atom, m=m: atom.setting(side) == m)
            by_value = {
                v: jpd.probability(lambda atom, v=v, m=m: atom.setting(side) == m and atom.outcome(side, k) == v)
                for v in (-1, 0, 1)
            }
            if k != m:
                for v in OUTCOMES:
                    if abs(by_value[v]) > tol:
                        problems.append(f"P({x}{k}={v:+d}, {r}={m}) = {by_value[v]} != 0")
                if abs(by_value[0] - p_r) > tol:
                    problems.append(f"P({x}{k}=0, {r}={m}) = {by_value[0]} != P({r}={m}) = {p_r}")
            else:
                if abs(by_value[0]) > tol:
                    problems.append(f"P({x}{k}=0, {r}={k}) = {by_value[0]} != 0")
                if abs(by_value[-1] + by_value[1] - p_r) > tol:
                    problems.append(f"P({x}{k}=+-1, {r}={k}) = {by_value[-1] + by_value[1]} != P({r}={k}) = {p_r}")
    return problems


def verify_matching(jpd: SixVarJpd, tol: Probability | None = None) -> bool:
    problems = matching_violations(jpd, tol)
    for problem in problems:
        logger.debug("matching violation: %s", problem)
    return not problems


# ---------------------------------------------------------------------------
# Correlations and the conditional CHSH quantity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionalCorrelations:
    values: dict[tuple[int, int], Probability]
    chsh_tilde: Probability


def conditional_correlation(jpd: SixVarJpd, i: int, j: int) -> Probability:
    """E(a_i b_j | r_a = i, r_b = j)."""
    return total(
        alpha * beta * _conditional_pair(jpd, i, j, alpha, beta)
        for alpha, beta in CELLS
    )


def chsh_tilde(jpd: SixVarJpd) -> ConditionalCorrelations:
    """CHSH combination of the conditional correlations, bounded by 4 in modulus.

    Signs follow the unconditioned expression: minus on the (1,2) term,
    plus on (1,1), (2,1) and (2,2).
    """
    values = {(i, j): conditional_correlation(jpd, i, j) for i, j in CONTEXTS}
    return ConditionalCorrelations(values=values, chsh_tilde=chsh_from_correlations(values))


def unconditional_correlation(jpd: SixVarJpd, i: int, j: int) -> Probability:
    """E(a_i b_j) over the whole jpd, zeros included."""
    return total(atom.outcome(Side.A, i) * atom.outcome(Side.B, j) * w for atom, w in jpd.weights.items())


def unconditional_chsh(jpd: SixVarJpd) -> Probability:
    return chsh_from_correlations({(i, j): unconditional_correlation(jpd, i, j) for i, j in CONTEXTS})


# ---------------------------------------------------------------------------
# Signaling as dependence of random variables
# ---------------------------------------------------------------------------

def conditional_marginal(jpd: SixVarJpd, side: Side, i: int, j: int, value: int) -> Probability:
    """m_ij(value): the side's outcome marginal given (r_a, r_b) = (i, j).

    For side B the roles swap: ``i`` is the B setting and ``j`` the A setting.
    """
    side = Side(side)
    a_setting, b_setting = (i, j) if side is Side.A else (j, i)
    given = setting_mass(jpd, a_setting, b_setting)
    if given == 0:
        raise ZeroConditioningEvent(f"P(r_a={a_setting}, r_b={b_setting}) = 0")
    joint = jpd.probability(
        lambda atom: atom.ra == a_setting and atom.rb == b_setting and atom.outcome(side, i) == value
    )
    return joint / given


def own_setting_marginal(jpd: SixVarJpd, side: Side, i: int, value: int) -> Probability:
    """P(x_i = value | own generator = i)."""
    side = Side(side)
    given = jpd.probability(lambda atom: atom.setting(side) == i)
    if given == 0:
        raise ZeroConditioningEvent(f"own generator never selects {i} on side {side.value}")
    joint = jpd.probability(lambda atom: atom.setting(side) == i and atom.outcome(side, i) == value)
    return joint / given


def generators_independent(jpd: SixVarJpd, tol: Probability | None = None) -> bool:
    space, rv = jpd_space(jpd)
    return are_independent(space, [rv["ra"]], [rv["rb"]], tol)


def independence_conditions(jpd: SixVarJpd, tol: Probability | None = None) -> dict[str, bool]:
    """I_a1, I_a2: (a_i, r_a) independent of r_b; I_b1, I_b2: (b_j, r_b) independent of r_a."""
    space, rv = jpd_space(jpd)
    verdicts = {}
    for k in SETTINGS:
        verdicts[f"I_a{k}"] = are_independent(space, [rv[f"a{k}"], rv["ra"]], [rv["rb"]], tol)
    for k in SETTINGS:
        verdicts[f"I_b{k}"] = are_independent(space, [rv[f"b{k}"], rv["rb"]], [rv["ra"]], tol)
    return verdicts


class SignalingCause(str, Enum):
    NONE = "none"
    GENERATOR_DEPENDENCE = "generator-dependence"
    OUTCOME_DEPENDENCE = "outcome-dependence"


@dataclass(frozen=True)
class SignalingDiagnosis:
    """Per direction ("B->A", "A->B"): observed flatness and its cause."""

    flat: dict[str, bool]
    generators_independent: bool
    conditions: dict[str, bool]
    causes: dict[str, SignalingCause]


def signaling_diagnosis(jpd: SixVarJpd, tol: Probability | None = None) -> SignalingDiagnosis:
    """Attribute observed signaling to generator dependence or outcome dependence.

    A direction that shows signaling while the generators are independent
    can only come from the receiving side's outcomes depending on the
    sender's generator.
    """
    if tol is None:
        tol = independence_tolerance(jpd.mode)
    report = signaling_report(extract_observational(jpd), tol)
    gen_indep = generators_independent(jpd, tol)
    conditions = independence_conditions(jpd, tol)
    flat = {"B->A": report.side_flat(Side.A), "A->B": report.side_flat(Side.B)}
    causes = {}
    for direction in flat:
        if flat[direction]:
            causes[direction] = SignalingCause.NONE
        elif not gen_indep:
            causes[direction] = SignalingCause.GENERATOR_DEPENDENCE
        else:
            causes[direction] = SignalingCause.OUTCOME_DEPENDENCE
    return SignalingDiagnosis(flat=flat, generators_independent=gen_indep, conditions=conditions, causes=causes)


@dataclass(frozen=True)
class LiftedEquivalence:
    """Observational flatness against the independence conditions, per direction."""

    flat: dict[str, bool]
    independent: dict[str, bool]

    @property
    def holds(self) -> bool:
        return all(self.flat[d] == self.independent[d] for d in self.flat)


def lifted_equivalence(jpd: SixVarJpd, tol: Probability | None = None) -> LiftedEquivalence | None:
    """With independent generators, flat marginals on a side iff its I-conditions hold.

    Returns None when the generators are dependent, where the equivalence
    does not apply.
    """
    diagnosis = signaling_diagnosis(jpd, tol)
    if not diagnosis.generators_independent:
        return None
    c = diagnosis.conditions
    independent = {
        "B->A": c["I_a1"] and c["I_a2"],
        "A->B": c["I_b1"] and c["I_b2"],
    }
    return LiftedEquivalence(flat=diagnosis.flat, independent=independent)
