"""Shared strategies, fixtures and random batches."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import strategies as st

from bellcp.bchsh import QuadJpd, dataset_from_jpd
from bellcp.numeric import ArithmeticMode
from bellcp.observational import (
    CELLS,
    CONTEXTS,
    ObservationalDataset,
    PairDistribution,
    SettingDistribution,
    construct_pr_box,
)
from bellcp.quantum import AngleConfig, singlet_dataset, tsirelson_angles

EXACT = ArithmeticMode.EXACT
DOUBLE = ArithmeticMode.DOUBLE
SQRT2 = math.sqrt(2)


# ---------------------------------------------------------------------------
# Hypothesis strategies
# ---------------------------------------------------------------------------

@st.composite
def rational_simplex(draw, size, positive=False):
    """Exact probability vector of ``size`` entries summing to 1."""
    low = 1 if positive else 0
    counts = draw(st.lists(st.integers(min_value=low, max_value=12), min_size=size, max_size=size))
    if sum(counts) == 0:
        counts[draw(st.integers(min_value=0, max_value=size - 1))] = 1
    n = sum(counts)
    return [Fraction(c, n) for c in counts]


@st.composite
def exact_datasets(draw):
    pairs = {ctx: PairDistribution(dict(zip(CELLS, draw(rational_simplex(4))))) for ctx in CONTEXTS}
    settings_dist = SettingDistribution(dict(zip(CONTEXTS, draw(rational_simplex(4, positive=True)))))
    return ObservationalDataset(pairs, settings_dist)


@st.composite
def exact_quad_jpds(draw):
    return QuadJpd.from_vector(draw(rational_simplex(16)))


angles = st.floats(min_value=0.0, max_value=2 * math.pi, allow_nan=False, allow_infinity=False)


# ---------------------------------------------------------------------------
# numpy batches for the large-count properties
# ---------------------------------------------------------------------------

def simplex_batch(rng: np.random.Generator, count: int, size: int) -> np.ndarray:
    return rng.dirichlet(np.ones(size), size=count)


def random_dataset(rng: np.random.Generator) -> ObservationalDataset:
    pairs = {ctx: PairDistribution(dict(zip(CELLS, rng.dirichlet(np.ones(4)).tolist()))) for ctx in CONTEXTS}
    return ObservationalDataset(pairs, SettingDistribution(dict(zip(CONTEXTS, rng.dirichlet(np.ones(4)).tolist()))))


def random_quad_jpd(rng: np.random.Generator) -> QuadJpd:
    return QuadJpd.from_vector(rng.dirichlet(np.ones(16)).tolist())


def mixture(parts: list[tuple[float, ObservationalDataset]]) -> ObservationalDataset:
    """Convex combination of datasets cell by cell, uniform settings."""
    pairs = {
        ctx: PairDistribution({cell: math.fsum(w * float(ds.pairs[ctx][cell]) for w, ds in parts) for cell in CELLS})
        for ctx in CONTEXTS
    }
    return ObservationalDataset(pairs, SettingDistribution.uniform(DOUBLE))


def random_non_signaling(rng: np.random.Generator) -> ObservationalDataset:
    """Mix of a local dataset, a singlet dataset at random angles and the PR box."""
    local = dataset_from_jpd(random_quad_jpd(rng))
    quantum = singlet_dataset(AngleConfig.from_angles(rng.uniform(0, 2 * math.pi, 4)), DOUBLE)
    weights = rng.dirichlet(np.ones(3))
    return mixture(list(zip(weights.tolist(), (local, quantum, construct_pr_box(DOUBLE)))))


# ---------------------------------------------------------------------------
# Fixtures
# ---------------------------------------------------------------------------

@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240917)


@pytest.fixture
def tsirelson_exact() -> ObservationalDataset:
    return singlet_dataset(tsirelson_angles(), EXACT)


@pytest.fixture
def tsirelson_double() -> ObservationalDataset:
    return singlet_dataset(tsirelson_angles(), DOUBLE)
