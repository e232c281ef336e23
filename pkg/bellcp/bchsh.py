"""
The four-random-variable model: one jpd over (a1, a2, b1, b2) in {+-1}^4.

Fine feasibility asks whether some such jpd reproduces the four observed
pair distributions as its marginals. It is decided by a linear program
over the 16 atom weights and cross-checked against the family of 8
sign-symmetric CHSH inequalities. Fine's theorem makes the two
equivalent for non-signaling data, and disagreement is logged.
"""

import itertools
import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog, nnls

from bellcp.config import settings
from bellcp.errors import InconsistentMarginals, InvalidDistribution
from bellcp.numeric import ArithmeticMode, Probability, mode_of, sum_tolerance, to_probability, total
from bellcp.observational import (
    CELLS,
    CONTEXTS,
    OUTCOMES,
    ObservationalDataset,
    PairDistribution,
    SettingDistribution,
    chsh_from_correlations,
    chsh_variants,
    signaling_report,
)

logger = logging.getLogger(__name__)

QuadAtom = tuple[int, int, int, int]
QUAD_ATOMS: tuple[QuadAtom, ...] = tuple(itertools.product(OUTCOMES, repeat=4))

CLASSICAL_BOUND = 2
_SUPPORT_CUTOFF = 1e-12


# ---------------------------------------------------------------------------
# QuadJpd
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadJpd:
    """P_{a1 a2 b1 b2}(alpha1, alpha2, beta1, beta2) on the 16 atoms."""

    weights: Mapping[QuadAtom, Probability]
    mode: ArithmeticMode = field(init=False, compare=False)

    def __post_init__(self) -> None:
        extra = set(self.weights) - set(QUAD_ATOMS)
        if extra:
            raise InvalidDistribution(f"atoms outside {{-1,+1}}^4: {sorted(extra)}")
        mode = mode_of(self.weights.values())
        nothing = Fraction(0) if mode is ArithmeticMode.EXACT else 0.0
        full = {atom: self.weights.get(atom, nothing) for atom in QUAD_ATOMS}
        for atom, w in full.items():
            if w < 0 or w > 1:
                raise InvalidDistribution(f"weight {w} of atom {atom} outside [0, 1]")
        s = total(full.values())
        if abs(s - 1) > sum_tolerance(mode):
            raise InvalidDistribution(f"quad jpd weights sum to {s}, not 1")
        object.__setattr__(self, "weights", full)
        object.__setattr__(self, "mode", mode)

    @classmethod
    def point_mass(cls, atom: QuadAtom, mode: ArithmeticMode | None = None) -> "QuadJpd":
        mode = mode or ArithmeticMode.default()
        return cls({a: to_probability(1 if a == atom else 0, mode) for a in QUAD_ATOMS})

    @classmethod
    def uniform(cls, mode: ArithmeticMode | None = None) -> "QuadJpd":
        mode = mode or ArithmeticMode.default()
        return cls({a: to_probability(Fraction(1, 16), mode) for a in QUAD_ATOMS})

    @classmethod
    def from_vector(cls, vector: Sequence, mode: ArithmeticMode | None = None) -> "QuadJpd":
        """Weights listed in ``QUAD_ATOMS`` order."""
        values = list(vector)
        if mode is not None:
            values = [to_probability(v, mode) for v in values]
        return cls(dict(zip(QUAD_ATOMS, values)))

    def vector(self) -> list[Probability]:
        return [self.weights[a] for a in QUAD_ATOMS]


def pairwise_marginal(jpd: QuadJpd, i: int, j: int) -> PairDistribution:
    """Sum the four atoms with a_i = alpha and b_j = beta, for each (alpha, beta)."""
    entries = {
        (alpha, beta): total(
            w for atom, w in jpd.weights.items() if atom[i - 1] == alpha and atom[1 + j] == beta
        )
        for alpha, beta in CELLS
    }
    return PairDistribution(entries)


def jpd_correlations(jpd: QuadJpd) -> dict[tuple[int, int], Probability]:
    return {(i, j): pairwise_marginal(jpd, i, j).correlation() for i, j in CONTEXTS}


def chsh_of_jpd(jpd: QuadJpd) -> Probability:
    return chsh_from_correlations(jpd_correlations(jpd))


def dataset_from_jpd(jpd: QuadJpd, settings_dist: SettingDistribution | None = None) -> ObservationalDataset:
    """The observational probabilities a quadruple jpd assigns (BCHSH correspondence)."""
    if settings_dist is None:
        settings_dist = SettingDistribution.uniform(jpd.mode)
    return ObservationalDataset({(i, j): pairwise_marginal(jpd, i, j) for i, j in CONTEXTS}, settings_dist)


# ---------------------------------------------------------------------------
# Linear-algebra helpers
# ---------------------------------------------------------------------------

@lru_cache(maxsize=1)
def _marginal_matrix() -> np.ndarray:
    """Rows (context, cell) in CONTEXTS x CELLS order, columns QUAD_ATOMS."""
    rows = []
    for i, j in CONTEXTS:
        for alpha, beta in CELLS:
            rows.append([1 if atom[i - 1] == alpha and atom[1 + j] == beta else 0 for atom in QUAD_ATOMS])
    return np.array(rows, dtype=np.int64)


def _data_vector(ds: ObservationalDataset) -> list[Probability]:
    return [ds.pair(i, j)[cell] for i, j in CONTEXTS for cell in CELLS]


def _rref(rows: list[list[Fraction]], n_cols: int) -> list[int]:
    """Reduce ``rows`` in place over the first ``n_cols`` columns; returns the pivot columns."""
    pivots: list[int] = []
    r = 0
    for c in range(n_cols):
        pivot = next((k for k in range(r, len(rows)) if rows[k][c] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        lead = rows[r][c]
        rows[r] = [v / lead for v in rows[r]]
        for k in range(len(rows)):
            if k != r and rows[k][c] != 0:
                factor = rows[k][c]
                rows[k] = [a - factor * b for a, b in zip(rows[k], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return pivots


def _solve_rational(matrix: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> list[Fraction] | None:
    """Gauss-Jordan elimination over the rationals.

    Returns one solution with free variables set to zero, or None when the
    system is inconsistent.
    """
    n_cols = len(matrix[0]) if matrix else 0
    aug = [[Fraction(v) for v in row] + [Fraction(b)] for row, b in zip(matrix, rhs)]
    pivots = _rref(aug, n_cols)
    if any(aug[k][-1] != 0 for k in range(len(pivots), len(aug))):
        return None
    solution = [Fraction(0)] * n_cols
    for row, c in enumerate(pivots):
        solution[c] = aug[row][-1]
    return solution


def _rational_null_space(matrix: Sequence[Sequence[Fraction]], n_cols: int) -> list[list[Fraction]]:
    """Basis of {x : matrix x = 0}, one vector per free column."""
    rows = [[Fraction(v) for v in row] for row in matrix]
    pivots = _rref(rows, n_cols)
    basis = []
    for free in (c for c in range(n_cols) if c not in pivots):
        x = [Fraction(0)] * n_cols
        x[free] = Fraction(1)
        for row, c in enumerate(pivots):
            x[c] = -rows[row][free]
        basis.append(x)
    return basis


@lru_cache(maxsize=1)
def _marginal_rank() -> int:
    return int(np.linalg.matrix_rank(_marginal_matrix()))


def _reproduction_error(weights: Sequence[Probability], p: Sequence[Probability]) -> Probability:
    A = _marginal_matrix()
    return max(abs(total(int(A[r, c]) * weights[c] for c in range(16) if A[r, c]) - p[r]) for r in range(16))


# ---------------------------------------------------------------------------
# Double-precision solvers
# ---------------------------------------------------------------------------

def _lp_feasible_point(p: np.ndarray, tol: float):
    """HiGHS feasibility LP: w >= 0, sum w = 1, |A w - p| <= tol componentwise."""
    A = _marginal_matrix().astype(float)
    A_ub = np.vstack([A, -A])
    b_ub = np.concatenate([p + tol, -(p - tol)])
    result = linprog(
        np.zeros(16),
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=np.ones((1, 16)),
        b_eq=np.ones(1),
        bounds=(0, 1),
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    logger.debug("fine LP status=%s message=%s", result.status, result.message)
    return result


def _least_norm_point(p: np.ndarray) -> np.ndarray | None:
    """Minimum-norm jpd reproducing ``p``, or None if the projection is infeasible.

    Every feasible w is w0 + N z with w0 the least-norm solution of A w = p
    and N an orthonormal null-space basis, so ||w||^2 = ||w0||^2 + ||z||^2.
    Minimizing ||z|| subject to w0 + N z >= 0 is a least-distance program,
    solved through its NNLS dual (Lawson-Hanson).
    """
    A = _marginal_matrix().astype(float)
    w0 = np.linalg.lstsq(A, p, rcond=None)[0]
    N = null_space(A)
    E = np.vstack([N.T, -w0[np.newaxis, :]])
    f = np.zeros(E.shape[0])
    f[-1] = 1.0
    u, _ = nnls(E, f)
    r = E @ u - f
    if np.linalg.norm(r) < 1e-14 or abs(r[-1]) < 1e-14:
        return None
    z = -r[:-1] / r[-1]
    w = w0 + N @ z
    if w.min() < -1e-9:
        return None
    w = np.clip(w, 0.0, None)
    return w / w.sum()


# ---------------------------------------------------------------------------
# Exact solvers
# ---------------------------------------------------------------------------

def _dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def _dual_feasible(y0: Sequence[Fraction], cols: Sequence[int]) -> bool:
    """Whether some y with A_S^T y = A_S^T y0 has (A^T y)_c <= 0 off the support.

    The duals form the affine set y0 + null(A_S^T). A float LP maximizes the
    smallest off-support margin over that set; constraints it leaves near
    zero are then met exactly by a least-norm rational correction, and the
    corrected point is checked in exact arithmetic.
    """
    A = _marginal_matrix()
    columns = [[Fraction(int(A[r, c])) for r in range(16)] for c in range(16)]
    off = [c for c in range(16) if c not in cols]
    d = [_dot(columns[c], y0) for c in off]
    if all(v <= 0 for v in d):
        return True
    basis = _rational_null_space([columns[c] for c in cols], 16)
    if not basis:
        return False
    B = [[_dot(columns[c], n) for n in basis] for c in off]
    k = len(basis)
    result = linprog(
        np.concatenate([np.zeros(k), [-1.0]]),
        A_ub=np.hstack([np.array(B, dtype=float), np.ones((len(off), 1))]),
        b_ub=-np.array(d, dtype=float),
        bounds=[(None, None)] * k + [(None, 1.0)],
        method="highs",
    )
    if result.status != 0 or result.x[-1] < -1e-9:
        return False
    z = [Fraction(v).limit_denominator(10**9) for v in result.x[:k]]
    values = [_dot(row, z) + dc for row, dc in zip(B, d)]
    active = [idx for idx, v in enumerate(values) if v > -Fraction(1, 10**7)]
    if active:
        rows = [B[idx] for idx in active]
        gram = [[_dot(r1, r2) for r2 in rows] for r1 in rows]
        u = _solve_rational(gram, [-values[idx] for idx in active])
        if u is None:
            return False
        z = [zk + _dot(u, [row[kk] for row in rows]) for kk, zk in enumerate(z)]
    return all(_dot(row, z) + dc <= 0 for row, dc in zip(B, d))


def _exact_least_norm(p: Sequence[Fraction], support: Sequence[int]) -> list[Fraction] | None:
    """Exact minimum-norm weights on ``support``, verified by the KKT conditions."""
    A = _marginal_matrix()
    cols = list(support)
    if not cols:
        return None
    # w_S = A_S^T y with (A_S A_S^T) y = p
    gram = [[Fraction(int(sum(A[r, c] * A[s, c] for c in cols))) for s in range(16)] for r in range(16)]
    y = _solve_rational(gram, p)
    if y is None:
        return None
    weights = [Fraction(0)] * 16
    for c in cols:
        weights[c] = sum((int(A[r, c]) * y[r] for r in range(16)), Fraction(0))
    if any(w < 0 for w in weights):
        return None
    if _reproduction_error(weights, p) != 0:
        return None
    if not _dual_feasible(y, cols):
        logger.debug("exact least-norm candidate on %s fails dual feasibility", cols)
        return None
    return weights


def _exact_on_support(p: Sequence[Fraction], support: Sequence[int]) -> list[Fraction] | None:
    """Solve A_S w_S = p exactly; accept a nonnegative solution."""
    A = _marginal_matrix()
    cols = list(support)
    if not cols:
        return None
    sub = [[Fraction(int(A[r, c])) for c in cols] for r in range(16)]
    solution = _solve_rational(sub, p)
    if solution is None or any(v < 0 for v in solution):
        return None
    weights = [Fraction(0)] * 16
    for c, v in zip(cols, solution):
        weights[c] = v
    if _reproduction_error(weights, p) != 0:
        return None
    return weights


def _exact_vertex_enumeration(p: Sequence[Fraction]) -> list[Fraction] | None:
    """Try every basis of the marginal system for a nonnegative exact solution."""
    rank = _marginal_rank()
    A = _marginal_matrix()
    for cols in itertools.combinations(range(16), rank):
        if np.linalg.matrix_rank(A[:, cols]) < rank:
            continue
        weights = _exact_on_support(p, cols)
        if weights is not None:
            return weights
    return None


def _support(vector: np.ndarray) -> list[int]:
    return [k for k in range(16) if vector[k] > _SUPPORT_CUTOFF]


# ---------------------------------------------------------------------------
# Fine feasibility
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FineVerdict:
    feasible: bool
    witness: QuadJpd | None
    violated_inequality: str | None
    chsh_variants: dict[str, Probability]
    max_variant: str
    lp_feasible: bool
    chsh_feasible: bool
    methods_agree: bool


def fine_feasibility(ds: ObservationalDataset, tol: Probability | None = None) -> FineVerdict:
    """Decide whether a quadruple jpd reproduces the four pair distributions.

    The LP verdict is authoritative in double mode; in exact mode the
    verdict is whether an exact rational witness exists. Either way the
    8-inequality CHSH family is evaluated and disagreement is logged.
    Raises InconsistentMarginals for signaling data. In exact mode the
    marginal check and the reproduction are exact and ``tol`` is unused.
    """
    exact = ds.mode is ArithmeticMode.EXACT
    if tol is None or exact:
        tol = Fraction(0) if exact else settings.fine_tolerance
    report = signaling_report(ds, tol=tol)
    if not report.no_signaling:
        raise InconsistentMarginals(report.max_delta, tol)

    variants = chsh_variants(ds)
    max_id = max(variants, key=lambda k: (variants[k], k))
    max_value = variants[max_id]
    chsh_feasible = max_value <= CLASSICAL_BOUND if exact else max_value <= CLASSICAL_BOUND + 16 * tol

    p = _data_vector(ds)
    p_float = np.array([float(v) for v in p])
    lp = _lp_feasible_point(p_float, float(tol))
    lp_feasible = lp.status == 0

    witness: QuadJpd | None = None
    if exact:
        if lp_feasible or chsh_feasible:
            witness = _exact_witness(p, p_float, lp.x if lp_feasible else None)
        feasible = witness is not None
        agree = feasible == chsh_feasible
    else:
        feasible = lp_feasible
        if feasible:
            witness = _double_witness(p_float, lp.x, float(tol))
        agree = lp_feasible == chsh_feasible
    if not agree:
        logger.warning(
            "Fine check disagreement: LP feasible=%s, CHSH family max %s=%s",
            feasible, max_id, max_value,
        )
    return FineVerdict(
        feasible=feasible,
        witness=witness,
        violated_inequality=None if feasible else max_id,
        chsh_variants=variants,
        max_variant=max_id,
        lp_feasible=lp_feasible,
        chsh_feasible=chsh_feasible,
        methods_agree=agree,
    )


def _double_witness(p: np.ndarray, lp_point: np.ndarray, tol: float) -> QuadJpd:
    canonical = _least_norm_point(p)
    if canonical is not None and _reproduction_error(list(canonical), list(p)) <= tol + 1e-12:
        logger.debug("fine witness: least-norm point")
        return QuadJpd.from_vector(canonical.tolist())
    logger.debug("fine witness: LP vertex")
    w = np.clip(lp_point, 0.0, None)
    return QuadJpd.from_vector((w / w.sum()).tolist())


def _exact_witness(p: Sequence[Fraction], p_float: np.ndarray, lp_point: np.ndarray | None) -> QuadJpd | None:
    canonical = _least_norm_point(p_float)
    if canonical is not None:
        weights = _exact_least_norm(p, _support(canonical))
        if weights is not None:
            logger.debug("exact fine witness: least-norm point")
            return QuadJpd.from_vector(weights)
    if lp_point is not None:
        weights = _exact_on_support(p, _support(lp_point))
        if weights is not None:
            logger.debug("exact fine witness: rationalized LP vertex")
            return QuadJpd.from_vector(weights)
    logger.warning("exact fine witness: falling back to basis enumeration")
    weights = _exact_vertex_enumeration(p)
    return QuadJpd.from_vector(weights) if weights is not None else None
