import math
from fractions import Fraction

import pytest
from hypothesis import given

from bellcp.errors import InvalidDataset
from bellcp.observational import (
    CONTEXTS,
    ObservationalDataset,
    PairDistribution,
    SettingDistribution,
    Side,
    chsh_from_correlations,
    chsh_variants,
    construct_pr_box,
    correlations,
    marginal_M,
    max_chsh_variant,
    observational_chsh,
    observational_correlation,
    signaling_report,
    uniform_dataset,
)
from bellcp.quantum import AngleConfig, singlet_dataset

from conftest import DOUBLE, EXACT, SQRT2, exact_datasets

HALF = Fraction(1, 2)
QUARTER = Fraction(1, 4)


def with_pair(ds: ObservationalDataset, ctx, pair: PairDistribution) -> ObservationalDataset:
    pairs = dict(ds.pairs)
    pairs[ctx] = pair
    return ObservationalDataset(pairs, ds.settings)


class TestValidation:
    def test_pair_must_normalize(self):
        with pytest.raises(InvalidDataset, match="sum"):
            PairDistribution.from_cells(HALF, HALF, QUARTER, 0)

    def test_pair_entries_in_unit_interval(self):
        with pytest.raises(InvalidDataset, match="outside"):
            PairDistribution.from_cells(Fraction(3, 2), Fraction(-1, 2), 0, 0)

    def test_zero_setting_rejected(self):
        with pytest.raises(InvalidDataset, match="positive"):
            SettingDistribution({(1, 1): 1, (1, 2): 0, (2, 1): 0, (2, 2): 0})

    def test_near_degenerate_settings_allowed(self):
        s = SettingDistribution({(1, 1): 0.97, (1, 2): 0.01, (2, 1): 0.01, (2, 2): 0.01})
        assert s[(1, 1)] == 0.97

    def test_missing_pair(self):
        ds = uniform_dataset(EXACT)
        pairs = {ctx: pd for ctx, pd in ds.pairs.items() if ctx != (2, 2)}
        with pytest.raises(InvalidDataset, match="missing"):
            ObservationalDataset(pairs, ds.settings)

    def test_mode_is_exact_only_when_everything_is(self):
        assert uniform_dataset(EXACT).mode is EXACT
        mixed = ObservationalDataset(uniform_dataset(EXACT).pairs, SettingDistribution.uniform(DOUBLE))
        assert mixed.mode is DOUBLE


class TestCorrelations:
    def test_uniform_pair(self):
        assert observational_correlation(uniform_dataset(EXACT), 1, 1) == 0

    def test_perfectly_correlated(self):
        ds = with_pair(uniform_dataset(EXACT), (1, 1), PairDistribution.from_cells(HALF, 0, 0, HALF))
        assert observational_correlation(ds, 1, 1) == 1

    def test_singlet_at_quarter_pi(self):
        ds = singlet_dataset(AngleConfig.from_angles((0.0, 0.0, math.pi / 4, 0.0)), DOUBLE)
        assert observational_correlation(ds, 1, 1) == pytest.approx(-SQRT2 / 2, abs=1e-15)

    def test_uniform_chsh(self):
        assert observational_chsh(uniform_dataset(EXACT)) == 0

    def test_tsirelson_chsh(self, tsirelson_double):
        assert observational_chsh(tsirelson_double) == pytest.approx(-2 * SQRT2, abs=1e-12)

    def test_pr_box(self):
        pr = construct_pr_box(EXACT)
        assert observational_correlation(pr, 1, 1) == 1
        assert observational_correlation(pr, 1, 2) == -1
        assert observational_chsh(pr) == 4

    def test_minus_sits_on_one_two(self):
        corr = {(1, 1): 0, (1, 2): 1, (2, 1): 0, (2, 2): 0}
        assert chsh_from_correlations(corr) == -1


class TestVariants:
    def test_eight_keys(self):
        variants = chsh_variants(uniform_dataset(EXACT))
        assert sorted(variants) == sorted(f"{sign}S{i}{j}" for sign in "+-" for i, j in CONTEXTS)

    def test_primary_variant_is_observational_chsh(self, tsirelson_exact):
        assert chsh_variants(tsirelson_exact)["+S12"] == observational_chsh(tsirelson_exact)

    def test_pr_box_maximum(self):
        key, value = max_chsh_variant(construct_pr_box(EXACT))
        assert (key, value) == ("+S12", 4)

    def test_tsirelson_maximum(self, tsirelson_double):
        key, value = max_chsh_variant(tsirelson_double)
        assert key == "-S12"
        assert value == pytest.approx(2 * SQRT2, abs=1e-12)


class TestMarginals:
    def test_uniform(self):
        assert marginal_M(uniform_dataset(EXACT), Side.A, 1, 2, 1) == HALF

    def test_singlet_flat(self, tsirelson_exact):
        for side in Side:
            for i, other in CONTEXTS:
                for alpha in (-1, 1):
                    assert marginal_M(tsirelson_exact, side, i, other, alpha) == HALF

    def test_direct_sum(self):
        pair = PairDistribution.from_cells(Fraction(3, 5), 0, 0, Fraction(2, 5))
        ds = with_pair(uniform_dataset(EXACT), (1, 1), pair)
        assert marginal_M(ds, Side.A, 1, 1, 1) == Fraction(3, 5)

    def test_b_side_uses_other_as_a_setting(self):
        pair = PairDistribution.from_cells(Fraction(1, 5), Fraction(1, 5), Fraction(1, 2), Fraction(1, 10))
        ds = with_pair(uniform_dataset(EXACT), (2, 1), pair)
        assert marginal_M(ds, Side.B, 1, 2, 1) == Fraction(7, 10)


class TestSignalingReport:
    def test_singlet(self, tsirelson_exact):
        report = signaling_report(tsirelson_exact)
        assert report.max_delta == 0
        assert report.no_signaling

    def test_pr_box(self):
        report = signaling_report(construct_pr_box(EXACT))
        assert report.max_delta == 0 and report.no_signaling

    def test_constructed_delta(self):
        pair = PairDistribution.from_cells(Fraction(3, 5), 0, 0, Fraction(2, 5))
        ds = with_pair(uniform_dataset(EXACT), (1, 1), pair)
        report = signaling_report(ds)
        assert report.max_delta == Fraction(1, 10)
        assert not report.no_signaling
        assert report.a_side_deltas[(1, 1)] == Fraction(1, 10)
        assert not report.side_flat(Side.A)
        assert not report.side_flat(Side.B)

    def test_double_tolerance(self):
        report = signaling_report(uniform_dataset(DOUBLE))
        assert report.tol == pytest.approx(1e-9)


@pytest.mark.property
class TestObservationalProperties:
    @given(exact_datasets())
    def test_bounds(self, ds):
        assert all(abs(c) <= 1 for c in correlations(ds).values())
        assert abs(observational_chsh(ds)) <= 4

    @given(exact_datasets())
    def test_report_consistent(self, ds):
        report = signaling_report(ds)
        assert all(d >= 0 for side in Side for d in report.deltas(side).values())
        assert report.no_signaling == (report.max_delta <= report.tol)

    @given(exact_datasets())
    def test_variants_are_sign_symmetric(self, ds):
        variants = chsh_variants(ds)
        for i, j in CONTEXTS:
            assert variants[f"+S{i}{j}"] == -variants[f"-S{i}{j}"]
