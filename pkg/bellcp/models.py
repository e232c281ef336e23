"""JSON document models.

Probabilities travel as JSON numbers in double mode and as strings in exact
mode (terminating decimals, otherwise "p/q"). Readers accept both.
"""

from fractions import Fraction
from typing import Literal

from pydantic import BaseModel, Field, field_validator

from bellcp.numeric import ArithmeticMode, Probability, to_json_number, to_probability
from bellcp.observational import CELLS, CONTEXTS, ObservationalDataset, PairDistribution, SettingDistribution

SCHEMA = "bellcp/1"

Number = float | str

CONTEXT_KEYS: dict[tuple[int, int], str] = {ctx: f"{ctx[0]}{ctx[1]}" for ctx in CONTEXTS}
CELL_KEYS: dict[tuple[int, int], str] = {
    cell: "".join("+" if v == 1 else "-" for v in cell) for cell in CELLS
}


def parse_number(value: Number, mode: ArithmeticMode) -> Probability:
    """JSON number or string into ``mode``; doubles go through their shortest repr in exact mode."""
    if isinstance(value, float) and mode is ArithmeticMode.EXACT:
        value = repr(value)
    return to_probability(value, mode)


def _check_number(value: Number) -> Number:
    if isinstance(value, str):
        try:
            Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a number: {value!r}") from exc
    return value


# ---------------------------------------------------------------------------
# Dataset
# ---------------------------------------------------------------------------

class DatasetDocument(BaseModel):
    """Four pair distributions keyed "11".."22" plus the setting distribution."""

    pairs: dict[str, dict[str, Number]] = Field(..., description='Context "ij" -> cell "++", "+-", "-+", "--" -> p')
    settings: dict[str, Number] = Field(..., description='Context "ij" -> p_RARB(i, j)')

    model_config = {"extra": "ignore"}

    @field_validator("pairs")
    @classmethod
    def _pair_keys(cls, value: dict[str, dict[str, Number]]) -> dict[str, dict[str, Number]]:
        if set(value) != set(CONTEXT_KEYS.values()):
            raise ValueError(f"pairs must have exactly the keys {sorted(CONTEXT_KEYS.values())}")
        for key, cells in value.items():
            if set(cells) != set(CELL_KEYS.values()):
                raise ValueError(f"pairs[{key!r}] must have exactly the keys {sorted(CELL_KEYS.values())}")
            for v in cells.values():
                _check_number(v)
        return value

    @field_validator("settings")
    @classmethod
    def _setting_keys(cls, value: dict[str, Number]) -> dict[str, Number]:
        if set(value) != set(CONTEXT_KEYS.values()):
            raise ValueError(f"settings must have exactly the keys {sorted(CONTEXT_KEYS.values())}")
        for v in value.values():
            _check_number(v)
        return value

    def to_dataset(self, mode: ArithmeticMode) -> ObservationalDataset:
        pairs = {
            ctx: PairDistribution({
                cell: parse_number(self.pairs[CONTEXT_KEYS[ctx]][CELL_KEYS[cell]], mode) for cell in CELLS
            })
            for ctx in CONTEXTS
        }
        settings_dist = SettingDistribution({ctx: parse_number(self.settings[CONTEXT_KEYS[ctx]], mode) for ctx in CONTEXTS})
        return ObservationalDataset(pairs, settings_dist)

    @classmethod
    def from_dataset(cls, ds: ObservationalDataset) -> "DatasetDocument":
        return cls(
            pairs={
                CONTEXT_KEYS[ctx]: {CELL_KEYS[cell]: to_json_number(p) for cell, p in ds.pairs[ctx].entries.items()}
                for ctx in CONTEXTS
            },
            settings={CONTEXT_KEYS[ctx]: to_json_number(ds.settings[ctx]) for ctx in CONTEXTS},
        )


# ---------------------------------------------------------------------------
# Joint distributions
# ---------------------------------------------------------------------------

class JpdRecord(BaseModel):
    """One atom of the six-variable jpd."""

    a1: Literal[-1, 0, 1]
    a2: Literal[-1, 0, 1]
    b1: Literal[-1, 0, 1]
    b2: Literal[-1, 0, 1]
    ra: Literal[1, 2]
    rb: Literal[1, 2]
    p: Number = Field(..., description="Atom weight")

    @field_validator("p")
    @classmethod
    def _weight(cls, value: Number) -> Number:
        return _check_number(value)


class QuadRecord(BaseModel):
    """One atom of the four-variable jpd, ordered (a1, a2, b1, b2)."""

    a1: Literal[-1, 1]
    a2: Literal[-1, 1]
    b1: Literal[-1, 1]
    b2: Literal[-1, 1]
    p: Number


# ---------------------------------------------------------------------------
# Verdicts and reports
# ---------------------------------------------------------------------------

class FineVerdictDocument(BaseModel):
    """Fine feasibility of a dataset under the four-variable model."""

    schema_: str = Field(SCHEMA, alias="schema")
    feasible: bool
    witness: list[QuadRecord] | None = Field(None, description="Quadruple jpd reproducing the pairs, when feasible")
    violated_inequality: str | None = Field(None, description="CHSH variant id exceeding 2, when infeasible")
    chsh_variants: dict[str, Number] = Field(..., description='"+Sij" / "-Sij" -> value')
    max_variant: str
    lp_feasible: bool
    chsh_feasible: bool
    methods_agree: bool

    model_config = {"populate_by_name": True}


class KhJpdSummary(BaseModel):
    """Verdicts printed next to an exported six-variable jpd."""

    schema_: str = Field(SCHEMA, alias="schema")
    records: int = Field(..., description="Number of exported jpd records")
    matching: bool = Field(..., description="Matching conditions hold")
    violations: list[str] = Field(default_factory=list)
    chsh_tilde: Number = Field(..., description="CHSH of the conditional correlations")

    model_config = {"populate_by_name": True}


class SignalingDocument(BaseModel):
    """Marginal deltas |M_i1(alpha) - M_i2(alpha)| per side, keyed "<i><sign of alpha>"."""

    schema_: str = Field(SCHEMA, alias="schema")
    a_side_deltas: dict[str, Number]
    b_side_deltas: dict[str, Number]
    max_delta: Number
    no_signaling: bool
    tol: Number
    generators_independent: bool | None = None
    independence_conditions: dict[str, bool] | None = Field(None, description="I_a1, I_a2, I_b1, I_b2")
    causes: dict[str, str] | None = Field(None, description='"B->A" / "A->B" -> cause of signaling')

    model_config = {"populate_by_name": True}


class ChshDocument(BaseModel):
    schema_: str = Field(SCHEMA, alias="schema")
    chsh: Number = Field(..., description="<11> - <12> + <21> + <22>")
    chsh_variants: dict[str, Number]
    max_variant: str
    chsh_tilde: Number = Field(..., description="Same combination of conditional correlations")
    unconditional_chsh: Number = Field(..., description="Same combination of unconditional correlations")

    model_config = {"populate_by_name": True}


class ChshEstimateDocument(BaseModel):
    value: float
    standard_error: float = Field(..., ge=0)


class SignalingTestDocument(BaseModel):
    """Pooled two-proportion z-test of one marginal comparison."""

    side: Literal["A", "B"]
    i: Literal[1, 2]
    alpha: Literal[-1, 1]
    successes: list[int]
    trials: list[int]
    delta: float
    z: float
    p_value: float = Field(..., ge=0, le=1)
    p_value_bonferroni: float = Field(..., ge=0, le=1)


class AnalysisReportDocument(BaseModel):
    """Everything ``analyze`` derives from a trial log."""

    schema_: str = Field(SCHEMA, alias="schema")
    n: int
    n_per_context: dict[str, int]
    counts: dict[str, dict[str, int]] = Field(..., description='Context "ij" -> cell -> count')
    empirical_dataset: DatasetDocument
    chsh: ChshEstimateDocument
    chsh_all_variants: dict[str, Number]
    chsh_tilde: Number
    matching: bool
    fine: FineVerdictDocument | None = None
    fine_error: str | None = Field(None, description="Why the Fine check could not run")
    signaling: SignalingDocument
    signaling_tests: list[SignalingTestDocument]
    signaling_detected: bool
    significance_level: float

    model_config = {"populate_by_name": True}


class TrialLogMeta(BaseModel):
    """Sidecar of a trial-log CSV."""

    seed: int | None = Field(None, ge=0, lt=2**64, description="Simulator seed; null for external data")
    n: int = Field(..., ge=0, description="Number of records")
    source: str = Field("", description="Dataset identifier the trials were drawn from")
