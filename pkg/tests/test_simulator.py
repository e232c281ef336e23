import math
from fractions import Fraction

import numpy as np
import pytest

from bellcp.errors import EmptyContext, OutOfRange
from bellcp.observational import (
    CELLS,
    CONTEXTS,
    ObservationalDataset,
    PairDistribution,
    Side,
    marginal_M,
    signaling_report,
    uniform_dataset,
)
from bellcp.simulator import (
    COLUMNS,
    TrialLog,
    context_counts,
    estimate_observational,
    inject_signaling,
    merge_logs,
    simulate,
)

from conftest import DOUBLE, EXACT

FOUR_RECORDS = np.array([
    [0, 1, 1, 1, 0, 1, 0],
    [1, 1, 2, 1, 0, 0, -1],
    [2, 2, 1, 0, -1, 1, 0],
    [3, 2, 2, 0, 1, 0, 1],
])


def point_mass_dataset(cell=(1, -1)) -> ObservationalDataset:
    pair = PairDistribution({c: Fraction(int(c == cell)) for c in CELLS})
    return ObservationalDataset({ctx: pair for ctx in CONTEXTS}, uniform_dataset(EXACT).settings)


class TestSimulate:
    def test_single_trial_is_forced(self):
        log = simulate(point_mass_dataset(), 1, seed=7)
        (record,) = list(log.records())
        assert record.trial_id == 0
        assert (record.a1 if record.ra == 1 else record.a2) == 1
        assert (record.b1 if record.rb == 1 else record.b2) == -1
        assert log.first_invalid() is None

    def test_deterministic(self, tsirelson_double):
        first = simulate(tsirelson_double, 5_000, seed=42)
        second = simulate(tsirelson_double, 5_000, seed=42)
        assert first == second

    def test_seed_changes_the_log(self, tsirelson_double):
        assert simulate(tsirelson_double, 1_000, seed=1) != simulate(tsirelson_double, 1_000, seed=2)

    @pytest.mark.parametrize("chunk_size, workers", [(2, 1), (64, 1), (1_000, 4), (333, 3)])
    def test_partitioning_does_not_change_the_log(self, tsirelson_double, chunk_size, workers):
        reference = simulate(tsirelson_double, 3_001, seed=11, chunk_size=10_000, workers=1)
        assert simulate(tsirelson_double, 3_001, seed=11, chunk_size=chunk_size, workers=workers) == reference

    def test_zero_value_convention(self, tsirelson_double):
        log = simulate(tsirelson_double, 20_000, seed=3)
        assert log.first_invalid() is None
        assert np.array_equal(log.trial_id, np.arange(20_000))
        assert np.all((log.ra == 1) == (log.a2 == 0))
        assert np.all((log.rb == 2) == (log.b1 == 0))

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError, match="at least 1"):
            simulate(uniform_dataset(), 0, seed=1)
        with pytest.raises(ValueError, match="64-bit"):
            simulate(uniform_dataset(), 10, seed=-1)

    def test_zero_cells_never_sampled(self):
        ds = point_mass_dataset((-1, -1))
        counts = context_counts(simulate(ds, 4_000, seed=5))
        assert counts[:, 0].sum() == 4_000


class TestTrialLog:
    def test_first_invalid_flags_both_outcomes(self):
        table = FOUR_RECORDS.copy()
        table[2, 3] = 1
        assert TrialLog.from_table(table).first_invalid()[0] == 2

    def test_first_invalid_flags_ids(self):
        table = FOUR_RECORDS.copy()
        table[3, 0] = 2
        assert TrialLog.from_table(table).first_invalid() == (3, "trial_id must start at 0 and strictly increase")

    def test_records_follow_columns(self):
        log = TrialLog.from_table(FOUR_RECORDS)
        assert list(next(log.records())._fields) == list(COLUMNS)
        assert log.n == 4


class TestMergeAndCounts:
    def test_merge_orders_by_first_id(self):
        log = TrialLog.from_table(FOUR_RECORDS, seed=9, source="x")
        parts = [TrialLog.from_table(FOUR_RECORDS[2:]), TrialLog.from_table(FOUR_RECORDS[:2])]
        assert merge_logs(parts, seed=9, source="x") == log

    def test_merge_of_nothing(self):
        assert merge_logs([]).n == 0

    def test_context_counts(self):
        counts = context_counts(TrialLog.from_table(FOUR_RECORDS))
        assert counts.sum() == 4
        assert counts[0, 3] == 1  # (1,1): (+1,+1)
        assert counts[1, 2] == 1  # (1,2): (+1,-1)
        assert counts[2, 1] == 1  # (2,1): (-1,+1)
        assert counts[3, 3] == 1  # (2,2): (+1,+1)


class TestEstimate:
    def test_four_records(self):
        estimate = estimate_observational(TrialLog.from_table(FOUR_RECORDS), EXACT)
        ds = estimate.dataset
        assert ds.pair(1, 1)[(1, 1)] == 1
        assert ds.pair(2, 1)[(-1, 1)] == 1
        assert all(ds.settings[ctx] == Fraction(1, 4) for ctx in CONTEXTS)
        assert estimate.n == 4 and estimate.n_context(1, 2) == 1

    def test_empty_context(self):
        with pytest.raises(EmptyContext) as info:
            estimate_observational(TrialLog.from_table(FOUR_RECORDS[:3]))
        assert (info.value.i, info.value.j) == (2, 2)
        assert info.value.exit_code == 5

    @pytest.mark.parametrize("n", [10_000, 100_000, pytest.param(1_000_000, marks=pytest.mark.slow)])
    def test_consistency(self, tsirelson_double, n):
        estimate = estimate_observational(simulate(tsirelson_double, n, seed=2024), DOUBLE)
        bound = 4 * math.sqrt(math.log(n) / n)
        assert estimate.dataset.max_cell_difference(tsirelson_double) <= bound

    @pytest.mark.slow
    def test_uniform_at_a_million(self):
        counts = context_counts(simulate(uniform_dataset(DOUBLE), 1_000_000, seed=99))
        assert np.all(np.abs(counts / 1_000_000 - 1 / 16) <= 0.002)


class TestInjectSignaling:
    def test_shifts_one_side(self):
        ds = inject_signaling(uniform_dataset(EXACT), Side.A, "0.1")
        assert marginal_M(ds, Side.A, 1, 1, 1) == Fraction(3, 5)
        assert marginal_M(ds, Side.A, 1, 2, 1) == Fraction(1, 2)
        report = signaling_report(ds)
        assert report.max_delta == Fraction(1, 10)
        assert report.side_flat(Side.B)

    def test_out_of_range(self):
        with pytest.raises(OutOfRange):
            inject_signaling(uniform_dataset(EXACT), Side.B, "0.8")

    def test_zero_epsilon_is_identity(self, tsirelson_exact):
        assert inject_signaling(tsirelson_exact, "A", 0) == tsirelson_exact
