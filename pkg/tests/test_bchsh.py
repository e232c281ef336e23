from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings

from bellcp.bchsh import (
    QUAD_ATOMS,
    FineVerdict,
    QuadJpd,
    chsh_of_jpd,
    dataset_from_jpd,
    fine_feasibility,
    pairwise_marginal,
)
from bellcp.errors import InconsistentMarginals, InvalidDistribution
from bellcp.observational import (
    CELLS,
    CONTEXTS,
    PairDistribution,
    construct_pr_box,
    uniform_dataset,
)
from bellcp.simulator import inject_signaling

from conftest import DOUBLE, EXACT, exact_quad_jpds, random_non_signaling, random_quad_jpd, simplex_batch

HALF = Fraction(1, 2)


def chsh_signs() -> np.ndarray:
    """a1 b1 - a1 b2 + a2 b1 + a2 b2 at every atom."""
    return np.array([a1 * b1 - a1 * b2 + a2 * b1 + a2 * b2 for a1, a2, b1, b2 in QUAD_ATOMS], dtype=float)


def assert_reproduces(verdict: FineVerdict, ds, tol=0) -> None:
    for i, j in CONTEXTS:
        pair = pairwise_marginal(verdict.witness, i, j)
        for cell in CELLS:
            assert abs(pair[cell] - ds.pairs[(i, j)][cell]) <= tol


class TestQuadJpd:
    def test_missing_atoms_are_zero(self):
        jpd = QuadJpd({(1, 1, 1, 1): Fraction(1)})
        assert jpd.weights[(-1, -1, -1, -1)] == 0

    def test_rejects_foreign_atoms(self):
        with pytest.raises(InvalidDistribution, match="outside"):
            QuadJpd({(1, 1, 1, 0): Fraction(1)})

    def test_rejects_unnormalized(self):
        with pytest.raises(InvalidDistribution, match="sum"):
            QuadJpd.from_vector([Fraction(1, 17)] * 16)


class TestPairwiseMarginal:
    def test_uniform(self):
        pair = pairwise_marginal(QuadJpd.uniform(EXACT), 1, 1)
        assert all(pair[cell] == Fraction(1, 4) for cell in CELLS)

    def test_point_mass(self):
        assert pairwise_marginal(QuadJpd.point_mass((1, 1, 1, 1), EXACT), 2, 1)[(1, 1)] == 1

    def test_a1_equals_b1(self):
        jpd = QuadJpd({atom: Fraction(1, 8) for atom in QUAD_ATOMS if atom[0] == atom[2]})
        pair = pairwise_marginal(jpd, 1, 1)
        assert pair[(1, 1)] == HALF and pair[(-1, -1)] == HALF


class TestChshOfJpd:
    def test_uniform(self):
        assert chsh_of_jpd(QuadJpd.uniform(EXACT)) == 0

    def test_all_plus(self):
        assert chsh_of_jpd(QuadJpd.point_mass((1, 1, 1, 1), EXACT)) == 2

    def test_sign_bookkeeping(self):
        assert chsh_of_jpd(QuadJpd.point_mass((1, 1, -1, -1), EXACT)) == -2

    def test_deterministic_jpds_attain_two(self):
        values = {chsh_of_jpd(QuadJpd.point_mass(atom, EXACT)) for atom in QUAD_ATOMS}
        assert values == {2, -2}


class TestFineFeasibility:
    def test_uniform_exact_witness(self):
        ds = uniform_dataset(EXACT)
        verdict = fine_feasibility(ds)
        assert verdict.feasible and verdict.methods_agree
        assert verdict.violated_inequality is None
        assert_reproduces(verdict, ds)
        assert all(w == Fraction(1, 16) for w in verdict.witness.vector())

    def test_pr_box_infeasible(self):
        verdict = fine_feasibility(construct_pr_box(EXACT))
        assert not verdict.feasible
        assert verdict.witness is None
        assert verdict.violated_inequality == "+S12"
        assert verdict.chsh_variants["+S12"] == 4

    def test_tsirelson_infeasible(self, tsirelson_double):
        verdict = fine_feasibility(tsirelson_double)
        assert not verdict.feasible and verdict.methods_agree
        assert verdict.violated_inequality == "-S12"

    def test_tsirelson_exact_infeasible(self, tsirelson_exact):
        assert not fine_feasibility(tsirelson_exact).feasible

    def test_signaling_data_raises(self):
        ds = inject_signaling(uniform_dataset(EXACT), "A", "0.1")
        with pytest.raises(InconsistentMarginals):
            fine_feasibility(ds)

    def test_deterministic_dataset(self):
        jpd = QuadJpd.point_mass((1, -1, 1, 1), EXACT)
        verdict = fine_feasibility(dataset_from_jpd(jpd))
        assert verdict.feasible
        assert verdict.witness == jpd

    def test_double_witness_is_canonical(self):
        ds = uniform_dataset(DOUBLE)
        first = fine_feasibility(ds).witness.vector()
        second = fine_feasibility(ds).witness.vector()
        assert first == second
        assert np.allclose(first, 1 / 16, atol=1e-9)

    def test_exact_witness_matches_double(self):
        rng = np.random.default_rng(40)
        for _ in range(40):
            counts = rng.integers(0, 6, size=16)
            counts[rng.integers(16)] += 1
            jpd = QuadJpd.from_vector([Fraction(int(c), int(counts.sum())) for c in counts])
            ds = dataset_from_jpd(jpd)
            exact = fine_feasibility(ds).witness.vector()
            double = fine_feasibility(ds.to_mode(DOUBLE)).witness.vector()
            assert max(abs(float(e) - d) for e, d in zip(exact, double)) < 1e-7
            assert sum(w * w for w in exact) <= sum(w * w for w in jpd.vector())

    def test_boundary_of_local_polytope(self):
        # mixture of the PR box and uniform noise at visibility 1/2 sits exactly on |B| = 2
        pr, noise = construct_pr_box(EXACT), uniform_dataset(EXACT)
        pairs = {
            ctx: PairDistribution({cell: (pr.pairs[ctx][cell] + noise.pairs[ctx][cell]) / 2 for cell in CELLS})
            for ctx in CONTEXTS
        }
        ds = type(pr)(pairs, pr.settings)
        verdict = fine_feasibility(ds)
        assert verdict.chsh_variants["+S12"] == 2
        assert verdict.feasible
        assert_reproduces(verdict, ds)


@pytest.mark.property
class TestBchshProperties:
    def test_classical_bound_over_random_jpds(self, rng):
        weights = simplex_batch(rng, 10_000, 16)
        expected = weights @ chsh_signs()
        for w, v in zip(weights, expected):
            value = chsh_of_jpd(QuadJpd.from_vector(w.tolist()))
            assert abs(value) <= 2 + 1e-12
            assert abs(value - v) <= 1e-12

    @given(exact_quad_jpds())
    @settings(max_examples=50, deadline=None)
    def test_extracted_dataset_is_feasible_exactly(self, jpd):
        ds = dataset_from_jpd(jpd)
        assert abs(chsh_of_jpd(jpd)) <= 2
        verdict = fine_feasibility(ds)
        assert verdict.feasible and verdict.methods_agree
        assert_reproduces(verdict, ds)

    def test_extracted_datasets_feasible(self, rng):
        for _ in range(300):
            ds = dataset_from_jpd(random_quad_jpd(rng))
            verdict = fine_feasibility(ds)
            assert verdict.feasible
            assert_reproduces(verdict, ds, tol=1e-9)

    def test_lp_agrees_with_chsh_family(self, rng):
        infeasible = 0
        for _ in range(1_000):
            verdict = fine_feasibility(random_non_signaling(rng))
            assert verdict.methods_agree
            assert verdict.feasible == (verdict.chsh_variants[verdict.max_variant] <= 2)
            infeasible += not verdict.feasible
        assert 0 < infeasible < 1_000

