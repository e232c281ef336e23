"""
Statistics over trial logs.

The empirical dataset comes from relative frequencies. Its CHSH value
gets a standard error from per-context binomial variance: the product
alpha*beta in context (i, j) is +-1 with mean E_ij, so its variance is
1 - E_ij**2 and the context contributes (1 - E_ij**2) / n_ij.

Marginal differences M_i1(alpha) vs M_i2(alpha) are tested with the
pooled two-proportion z-test, 8 comparisons in all, with Bonferroni
correction reported next to the raw p-values.
"""

import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from statsmodels.stats.multitest import multipletests
from statsmodels.stats.proportion import proportions_ztest

from bellcp.bchsh import FineVerdict, fine_feasibility
from bellcp.config import settings
from bellcp.errors import BellcpError
from bellcp.kh import build_jpd, chsh_tilde, verify_matching
from bellcp.numeric import ArithmeticMode, Probability
from bellcp.observational import (
    CONTEXTS,
    OUTCOMES,
    SETTINGS,
    ObservationalDataset,
    Side,
    SignalingReport,
    chsh_variants,
    correlations,
    observational_chsh,
    signaling_report,
)
from bellcp.simulator import Estimate, TrialLog, estimate_observational

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ChshEstimate:
    value: float
    standard_error: float


@dataclass(frozen=True)
class SignalingTest:
    """One marginal comparison: side's setting ``i``, outcome ``alpha``, other side at 1 vs 2."""

    side: Side
    i: int
    alpha: int
    successes: tuple[int, int]
    trials: tuple[int, int]
    delta: float
    z: float
    p_value: float
    p_value_bonferroni: float = 1.0


@dataclass(frozen=True)
class AnalysisReport:
    estimate: Estimate
    chsh: ChshEstimate
    chsh_variants: dict[str, Probability]
    chsh_tilde: Probability
    matching: bool
    fine: FineVerdict | None
    fine_error: str | None
    signaling: SignalingReport
    tests: list[SignalingTest]
    signaling_detected: bool
    significance_level: float

    @property
    def dataset(self) -> ObservationalDataset:
        return self.estimate.dataset

    @property
    def n_per_context(self) -> dict[tuple[int, int], int]:
        return {ctx: self.estimate.n_context(*ctx) for ctx in CONTEXTS}


def chsh_standard_error(estimate: Estimate) -> ChshEstimate:
    ds = estimate.dataset.to_mode(ArithmeticMode.DOUBLE)
    corr = correlations(ds)
    variance = math.fsum(max(0.0, 1.0 - corr[ctx] ** 2) / estimate.n_context(*ctx) for ctx in CONTEXTS)
    return ChshEstimate(value=float(observational_chsh(ds)), standard_error=math.sqrt(variance))


def _marginal_counts(estimate: Estimate, side: Side, i: int, other: int, alpha: int) -> tuple[int, int]:
    ctx = (i, other) if side is Side.A else (other, i)
    index = 0 if side is Side.A else 1
    cells = estimate.counts[ctx]
    return sum(c for cell, c in cells.items() if cell[index] == alpha), sum(cells.values())


def two_proportion_test(x1: int, n1: int, x2: int, n2: int) -> tuple[float, float]:
    """Pooled two-sided z-test; a degenerate pooled proportion gives (0, 1)."""
    pooled = (x1 + x2) / (n1 + n2)
    if pooled in (0.0, 1.0):
        return 0.0, 1.0
    z, p = proportions_ztest(np.array([x1, x2]), np.array([n1, n2]), alternative="two-sided")
    return float(z), float(p)


def signaling_tests(estimate: Estimate) -> list[SignalingTest]:
    raw = []
    for side in Side:
        for i in SETTINGS:
            for alpha in OUTCOMES:
                x1, n1 = _marginal_counts(estimate, side, i, 1, alpha)
                x2, n2 = _marginal_counts(estimate, side, i, 2, alpha)
                z, p = two_proportion_test(x1, n1, x2, n2)
                raw.append(SignalingTest(
                    side=side, i=i, alpha=alpha,
                    successes=(x1, x2), trials=(n1, n2),
                    delta=abs(x1 / n1 - x2 / n2), z=z, p_value=p,
                ))
    corrected = multipletests([t.p_value for t in raw], method="bonferroni")[1]
    return [
        replace(t, p_value_bonferroni=float(min(1.0, c)))
        for t, c in zip(raw, corrected)
    ]


def empirical_fine(ds: ObservationalDataset, max_delta: Probability) -> FineVerdict:
    """Fine verdict on frequencies, with the LP slack widened to the observed marginal noise."""
    tol = max(settings.fine_tolerance, float(max_delta))
    return fine_feasibility(ds.to_mode(ArithmeticMode.DOUBLE), tol=tol)


def analyze_log(log: TrialLog, mode: ArithmeticMode | None = None) -> AnalysisReport:
    estimate = estimate_observational(log, mode)
    ds = estimate.dataset
    report = signaling_report(ds)
    tests = signaling_tests(estimate)

    fine: FineVerdict | None = None
    fine_error: str | None = None
    try:
        fine = empirical_fine(ds, report.max_delta)
    except BellcpError as exc:
        fine_error = str(exc)
        logger.warning("empirical Fine check skipped: %s", exc)

    jpd = build_jpd(ds)
    level = settings.significance_level
    result = AnalysisReport(
        estimate=estimate,
        chsh=chsh_standard_error(estimate),
        chsh_variants=chsh_variants(ds),
        chsh_tilde=chsh_tilde(jpd).chsh_tilde,
        matching=verify_matching(jpd),
        fine=fine,
        fine_error=fine_error,
        signaling=report,
        tests=tests,
        signaling_detected=any(t.p_value_bonferroni < level for t in tests),
        significance_level=level,
    )
    logger.info(
        "analyzed %d trials: chsh=%.6f se=%.6f", estimate.n, result.chsh.value, result.chsh.standard_error
    )
    return result
