"""
Born-rule predictions for the spin singlet.

For analyzer angles theta_a, theta_b the singlet gives
p(alpha, beta) = (1 - alpha * beta * cos(theta_a - theta_b)) / 4, so the
correlation is -cos of the angle difference and both single-side marginals
are 1/2. The photon-polarization convention doubles the angle.

Angles are radians throughout; unit parsing belongs to the CLI.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize

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

_SNAP = 1e-15


class Convention(str, Enum):
    SPIN = "spin"
    PHOTON = "photon"

    @property
    def angle_factor(self) -> int:
        return 1 if self is Convention.SPIN else 2


@dataclass(frozen=True)
class AngleConfig:
    theta_a1: float
    theta_a2: float
    theta_b1: float
    theta_b2: float
    settings: SettingDistribution

    def __post_init__(self) -> None:
        for name in ("theta_a1", "theta_a2", "theta_b1", "theta_b2"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")

    @classmethod
    def from_angles(cls, angles, settings: SettingDistribution | None = None) -> "AngleConfig":
        """Angles in the order a1, a2, b1, b2."""
        a1, a2, b1, b2 = (float(t) for t in angles)
        return cls(a1, a2, b1, b2, settings or SettingDistribution.uniform())

    def angle(self, side: Side, k: int) -> float:
        prefix = "a" if Side(side) is Side.A else "b"
        return getattr(self, f"theta_{prefix}{k}")


def tsirelson_angles(settings: SettingDistribution | None = None) -> AngleConfig:
    """a1 = 0, a2 = pi/2, b1 = pi/4, b2 = 3pi/4: the primary CHSH expression reaches -2*sqrt(2)."""
    return AngleConfig.from_angles((0.0, math.pi / 2, math.pi / 4, 3 * math.pi / 4), settings)


def _cosine(theta_a: float, theta_b: float, convention: Convention) -> float:
    """cos of the (convention-scaled) angle difference, snapped to multiples of 1/2 when within 1e-15."""
    c = math.cos(convention.angle_factor * (theta_a - theta_b))
    half = round(c * 2) / 2
    return half if abs(c - half) <= _SNAP else c


def singlet_correlation(theta_a: float, theta_b: float, convention: Convention = Convention.SPIN) -> float:
    return -_cosine(theta_a, theta_b, convention)


def singlet_pair_distribution(
    theta_a: float,
    theta_b: float,
    mode: ArithmeticMode | None = None,
    convention: Convention = Convention.SPIN,
) -> PairDistribution:
    """(1 - alpha*beta*cos)/4 for each outcome pair.

    In exact mode the cosine is taken as the exact rational value of its
    double, so the four entries sum to 1 and the marginals are 1/2 exactly.
    """
    mode = mode or ArithmeticMode.default()
    c = to_probability(_cosine(theta_a, theta_b, Convention(convention)), mode)
    quarter = Fraction(1, 4) if mode is ArithmeticMode.EXACT else 0.25
    return PairDistribution({(alpha, beta): (1 - alpha * beta * c) * quarter for alpha, beta in CELLS})


def singlet_dataset(
    cfg: AngleConfig,
    mode: ArithmeticMode | None = None,
    convention: Convention = Convention.SPIN,
) -> ObservationalDataset:
    mode = mode or ArithmeticMode.default()
    pairs = {
        (i, j): singlet_pair_distribution(cfg.angle(Side.A, i), cfg.angle(Side.B, j), mode, convention)
        for i, j in CONTEXTS
    }
    return ObservationalDataset(pairs, cfg.settings.to_mode(mode))


# ---------------------------------------------------------------------------
# CHSH range of the oracle
# ---------------------------------------------------------------------------

def _chsh_vector(angles: np.ndarray, factor: int) -> np.ndarray:
    a1, a2, b1, b2 = angles

    def e(x, y):
        return -np.cos(factor * (x - y))

    return e(a1, b1) - e(a1, b2) + e(a2, b1) + e(a2, b2)


def max_chsh_search(
    grid: int = 8,
    starts: int = 4,
    convention: Convention = Convention.SPIN,
) -> tuple[float, tuple[float, float, float, float]]:
    """Largest |CHSH| of singlet datasets over [0, 2pi)^4.

    A regular grid of ``grid`` points per angle picks the best ``starts``
    configurations, each refined with Nelder-Mead.
    """
    factor = Convention(convention).angle_factor
    axis = np.linspace(0.0, 2 * np.pi, grid, endpoint=False)
    mesh = np.stack(np.meshgrid(axis, axis, axis, axis, indexing="ij")).reshape(4, -1)
    values = np.abs(_chsh_vector(mesh, factor))
    order = np.argsort(-values, kind="stable")[:starts]

    best_value, best_angles = -1.0, None
    for k in order:
        result = minimize(
            lambda x: -abs(_chsh_vector(x, factor)),
            mesh[:, k],
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 20000},
        )
        value = -float(result.fun)
        logger.debug("refined start %s -> %.15f", mesh[:, k], value)
        if value > best_value:
            best_value = value
            best_angles = tuple(float(t) % (2 * np.pi) for t in result.x)
    return best_value, best_angles
