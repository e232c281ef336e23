"""
Seeded Monte Carlo trials and frequency estimation.

Each trial draws a setting pair from p_{RARB}, then an outcome pair from
p_{AiBj}, and records zeros for the two unselected outcome variables
(zero means "not selected", never "not detected").

Randomness comes from the Philox4x64-10 counter-based generator keyed by
the seed. Trial t consumes words 2t and 2t+1 of that stream, turned into
doubles as (word >> 11) * 2**-53, and maps them to cells by inverse CDF in
lexicographic cell order. Any even-aligned partition of trial ids can
therefore be generated independently and the concatenation is
bit-identical to a sequential run.
"""

import logging
from collections.abc import Iterator, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from bellcp.config import settings
from bellcp.errors import EmptyContext, OutOfRange
from bellcp.numeric import ArithmeticMode, to_probability
from bellcp.observational import (
    CELLS,
    CONTEXTS,
    ObservationalDataset,
    PairDistribution,
    SettingDistribution,
    Side,
)

logger = logging.getLogger(__name__)

COLUMNS: tuple[str, ...] = ("trial_id", "ra", "rb", "a1", "a2", "b1", "b2")
_UNIT = 2.0**-53


class TrialRecord(NamedTuple):
    trial_id: int
    ra: int
    rb: int
    a1: int
    a2: int
    b1: int
    b2: int


@dataclass(frozen=True, eq=False)
class TrialLog:
    """Trial records stored column-wise; ``records()`` yields them one by one."""

    trial_id: np.ndarray
    ra: np.ndarray
    rb: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    seed: int | None = None
    source: str = ""
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_table(cls, table: np.ndarray, seed: int | None = None, source: str = "") -> "TrialLog":
        table = np.asarray(table, dtype=np.int64).reshape(-1, len(COLUMNS))
        return cls(*(table[:, k].copy() for k in range(len(COLUMNS))), seed=seed, source=source)

    @property
    def n(self) -> int:
        return int(self.trial_id.shape[0])

    def table(self) -> np.ndarray:
        return np.column_stack([getattr(self, name) for name in COLUMNS]).astype(np.int64)

    def records(self) -> Iterator[TrialRecord]:
        for row in self.table():
            yield TrialRecord(*(int(v) for v in row))

    def first_invalid(self) -> tuple[int, str] | None:
        """Index and reason of the first record breaking the log invariants."""
        if self.n == 0:
            return None
        expected_ids = self.trial_id[0] == 0 and np.all(np.diff(self.trial_id) > 0)
        if not expected_ids:
            bad = 0 if self.trial_id[0] != 0 else int(np.argmax(np.diff(self.trial_id) <= 0)) + 1
            return bad, "trial_id must start at 0 and strictly increase"
        for side, (x1, x2, r) in ((Side.A, (self.a1, self.a2, self.ra)), (Side.B, (self.b1, self.b2, self.rb))):
            bad_setting = ~np.isin(r, (1, 2))
            ok = (
                np.where(r == 1, np.isin(x1, (-1, 1)) & (x2 == 0), np.isin(x2, (-1, 1)) & (x1 == 0))
                & ~bad_setting
            )
            if not ok.all():
                k = int(np.argmin(ok))
                return k, f"side {side.value}: exactly the selected outcome must be +-1, the other 0"
        return None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TrialLog):
            return NotImplemented
        return np.array_equal(self.table(), other.table()) and self.seed == other.seed and self.source == other.source


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def _cdf(probabilities: Sequence[float]) -> np.ndarray:
    """Cumulative sums with the tail pinned to 1 from the last positive cell on."""
    p = np.asarray(probabilities, dtype=float)
    c = np.cumsum(p)
    last = int(np.nonzero(p > 0)[0][-1])
    c[last:] = 1.0
    return c


def _uniforms(seed: int, start: int, count: int) -> np.ndarray:
    """2*count doubles for trials start .. start+count-1 (start even)."""
    bitgen = np.random.Philox(key=seed, counter=start // 2)
    words = bitgen.random_raw(2 * count)
    return (words >> np.uint64(11)).astype(np.float64) * _UNIT


def _simulate_range(ds: ObservationalDataset, seed: int, start: int, stop: int) -> np.ndarray:
    u = _uniforms(seed, start, stop - start)
    u_setting, u_outcome = u[0::2], u[1::2]

    setting_cdf = _cdf([float(ds.settings[ctx]) for ctx in CONTEXTS])
    ctx_index = np.searchsorted(setting_cdf, u_setting, side="right")

    cell_index = np.empty_like(ctx_index)
    for k, ctx in enumerate(CONTEXTS):
        mask = ctx_index == k
        cdf = _cdf([float(ds.pairs[ctx][cell]) for cell in CELLS])
        cell_index[mask] = np.searchsorted(cdf, u_outcome[mask], side="right")

    contexts = np.array(CONTEXTS, dtype=np.int64)[ctx_index]
    cells = np.array(CELLS, dtype=np.int64)[cell_index]
    i, j = contexts[:, 0], contexts[:, 1]
    alpha, beta = cells[:, 0], cells[:, 1]
    table = np.column_stack([
        np.arange(start, stop, dtype=np.int64),
        i,
        j,
        np.where(i == 1, alpha, 0),
        np.where(i == 2, alpha, 0),
        np.where(j == 1, beta, 0),
        np.where(j == 2, beta, 0),
    ])
    return table


def simulate(
    ds: ObservationalDataset,
    n: int,
    seed: int,
    source: str = "",
    chunk_size: int | None = None,
    workers: int | None = None,
) -> TrialLog:
    """Generate ``n`` trials; identical (ds, n, seed) give identical logs."""
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    chunk_size = chunk_size or settings.simulation_chunk_size
    chunk_size += chunk_size % 2
    workers = workers or settings.simulation_workers

    ranges = [(start, min(start + chunk_size, n)) for start in range(0, n, chunk_size)]
    if workers > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda r: _simulate_range(ds, seed, *r), ranges))
    else:
        parts = [_simulate_range(ds, seed, *r) for r in ranges]
    logger.debug("simulated %d trials in %d partitions (seed=%d)", n, len(parts), seed)
    return merge_logs([TrialLog.from_table(p) for p in parts], seed=seed, source=source)


def merge_logs(parts: Sequence[TrialLog], seed: int | None = None, source: str = "") -> TrialLog:
    """Concatenate partitions ordered by their first trial_id."""
    ordered = sorted((p for p in parts if p.n), key=lambda p: int(p.trial_id[0]))
    if not ordered:
        return TrialLog.from_table(np.empty((0, len(COLUMNS)), dtype=np.int64), seed=seed, source=source)
    return TrialLog.from_table(np.vstack([p.table() for p in ordered]), seed=seed, source=source)


# ---------------------------------------------------------------------------
# Estimation
# ---------------------------------------------------------------------------

def context_counts(log: TrialLog) -> np.ndarray:
    """4x4 counts: rows in CONTEXTS order, columns in CELLS order."""
    ctx = (log.ra - 1) * 2 + (log.rb - 1)
    alpha = np.where(log.ra == 1, log.a1, log.a2)
    beta = np.where(log.rb == 1, log.b1, log.b2)
    cell = ((alpha + 1) // 2) * 2 + (beta + 1) // 2
    return np.bincount(ctx * 4 + cell, minlength=16).reshape(4, 4)


@dataclass(frozen=True)
class Estimate:
    dataset: ObservationalDataset
    counts: dict[tuple[int, int], dict[tuple[int, int], int]]

    def n_context(self, i: int, j: int) -> int:
        return sum(self.counts[(i, j)].values())

    @property
    def n(self) -> int:
        return sum(self.n_context(i, j) for i, j in CONTEXTS)


def estimate_observational(log: TrialLog, mode: ArithmeticMode | None = None) -> Estimate:
    """Relative frequencies per context and of the contexts themselves."""
    mode = mode or ArithmeticMode.default()
    table = context_counts(log)
    per_context = table.sum(axis=1)
    for k, ctx in enumerate(CONTEXTS):
        if per_context[k] == 0:
            raise EmptyContext(*ctx)
    n = int(per_context.sum())

    def ratio(a: int, b: int):
        return Fraction(int(a), int(b)) if mode is ArithmeticMode.EXACT else int(a) / int(b)

    pairs = {
        ctx: PairDistribution({cell: ratio(table[k, c], per_context[k]) for c, cell in enumerate(CELLS)})
        for k, ctx in enumerate(CONTEXTS)
    }
    settings_dist = SettingDistribution({ctx: ratio(per_context[k], n) for k, ctx in enumerate(CONTEXTS)})
    counts = {ctx: {cell: int(table[k, c]) for c, cell in enumerate(CELLS)} for k, ctx in enumerate(CONTEXTS)}
    return Estimate(dataset=ObservationalDataset(pairs, settings_dist), counts=counts)


# ---------------------------------------------------------------------------
# Fault injection
# ---------------------------------------------------------------------------

def inject_signaling(ds: ObservationalDataset, side: Side, epsilon) -> ObservationalDataset:
    """Shift one side's +1 marginal by ``epsilon`` in the contexts where the other side uses setting 1.

    Half of epsilon is added to each +1 cell of that side and taken from
    each -1 cell, so every pair stays normalized and the other side's
    marginals are untouched.
    """
    side = Side(side)
    eps = to_probability(epsilon, ds.mode)
    half = eps / 2
    pairs = dict(ds.pairs)
    index = 0 if side is Side.A else 1
    for ctx in CONTEXTS:
        other_setting = ctx[1] if side is Side.A else ctx[0]
        if other_setting != 1:
            continue
        shifted = {}
        for cell, p in ds.pairs[ctx].entries.items():
            q = p + half if cell[index] == 1 else p - half
            if q < 0 or q > 1:
                raise OutOfRange(f"context {ctx}, cell {cell}: {p} shifted to {q} leaves [0, 1]")
            shifted[cell] = q
        pairs[ctx] = PairDistribution(shifted)
    return ObservationalDataset(pairs, ds.settings)
