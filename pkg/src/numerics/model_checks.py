"""Coefficient evaluation and sampling-based falsification of model certificates.

Local Lipschitz continuity of f and g is assumed rather than checked; the
builtin models are polynomial. ``check_growth_function`` falsifies a
proposed growth function Phi on a ball instead.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Protocol

import numpy as np

from src.exceptions import ConfigurationError, UsageError
from src.models.certificates import ContractionCert, DissipativityCert, ViolationReport
from src.models.sdde_model import SddeModel

logger = logging.getLogger(__name__)

DEFAULT_BOX = (-5.0, 5.0)
DEFAULT_POINTS = 100_000

# Relative slack for rounding when comparing the two sides of an inequality
RELATIVE_TOLERANCE = 1e-12


class PointSampler(Protocol):
    """Anything that yields an (n, width) array of sample coordinates."""

    def draw(self, n: int, width: int) -> np.ndarray:
        """Return n points with the given number of coordinates."""
        ...


@dataclass
class BoxSampler:
    """Uniform samples on the box [low, high]^width."""

    low: float = DEFAULT_BOX[0]
    high: float = DEFAULT_BOX[1]
    seed: Optional[int] = 0

    def draw(self, n: int, width: int) -> np.ndarray:
        """Return n uniform points in the box."""
        rng = np.random.default_rng(self.seed)
        return rng.uniform(self.low, self.high, size=(n, width))


@dataclass
class FixedSampler:
    """Replays a fixed set of points, cycling if more are requested."""

    points: np.ndarray

    def draw(self, n: int, width: int) -> np.ndarray:
        """Return the first n stored points."""
        points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if points.shape[1] != width:
            raise UsageError(f"fixed points have {points.shape[1]} coordinates, need {width}")
        reps = -(-n // points.shape[0])
        return np.tile(points, (reps, 1))[:n]


def _check_dimension(model: SddeModel, name: str, value: np.ndarray) -> np.ndarray:
    value = np.asarray(value, dtype=float)
    if value.ndim == 0 or value.shape[-1] != model.d:
        raise UsageError(
            f"{name} must have trailing dimension d={model.d} for model '{model.name}', "
            f"got shape {value.shape}"
        )
    return value


def evaluate_drift(model: SddeModel, x, y) -> np.ndarray:
    """Return f(x, y) for one point or a stack of points.

    Raises:
        UsageError: If x or y does not have trailing dimension d
    """
    x = _check_dimension(model, "x", x)
    y = _check_dimension(model, "y", y)
    return np.asarray(model.drift(x, y), dtype=float)


def evaluate_diffusion(model: SddeModel, x, y) -> np.ndarray:
    """Return the d x m matrix g(x, y) for one point or a stack of points.

    Raises:
        UsageError: If x or y does not have trailing dimension d
    """
    x = _check_dimension(model, "x", x)
    y = _check_dimension(model, "y", y)
    return np.asarray(model.diffusion(x, y), dtype=float)


def trace_norm_sq(matrix: np.ndarray) -> np.ndarray:
    """Squared trace (Frobenius) norm over the last two axes."""
    return np.sum(matrix * matrix, axis=(-2, -1))


def _build_report(
    condition: str, points: np.ndarray, lhs: np.ndarray, rhs: np.ndarray
) -> ViolationReport:
    margin = rhs - lhs
    tolerance = RELATIVE_TOLERANCE * (1.0 + np.abs(lhs) + np.abs(rhs))
    violated = np.flatnonzero(margin < -tolerance)
    worst = int(np.argmin(margin))
    report = ViolationReport(
        condition=condition,
        n_points=len(margin),
        worst_margin=float(margin[worst]),
        worst_point=points[worst].copy(),
        violations=[points[i].copy() for i in violated[: ViolationReport.MAX_STORED]],
        n_violations=len(violated),
    )
    log = logger.warning if report.n_violations else logger.debug
    log(report.summary())
    return report


def check_dissipativity(
    model: SddeModel,
    cert: DissipativityCert,
    sampler: Optional[PointSampler] = None,
    n_points: int = DEFAULT_POINTS,
) -> ViolationReport:
    """Falsify <2x, f(x,y)> + |g(x,y)|^2 <= a1 - a2|x|^alpha + a3|y|^alpha by sampling.

    Args:
        model: Model to check
        cert: Claimed constants
        sampler: Source of (x, y) pairs, default uniform on [-5, 5]^(2d)
        n_points: Number of pairs

    Returns:
        Report whose points are the concatenated (x, y)
    """
    if n_points < 1:
        raise UsageError(f"n_points must be >= 1, got {n_points}")
    sampler = sampler or BoxSampler()
    points = sampler.draw(n_points, 2 * model.d)
    x, y = points[:, : model.d], points[:, model.d :]
    lhs = 2.0 * np.sum(x * evaluate_drift(model, x, y), axis=-1) + trace_norm_sq(
        evaluate_diffusion(model, x, y)
    )
    x_norm = np.linalg.norm(x, axis=-1)
    y_norm = np.linalg.norm(y, axis=-1)
    rhs = cert.a1 - cert.a2 * x_norm**cert.alpha + cert.a3 * y_norm**cert.alpha
    return _build_report("dissipativity", points, lhs, rhs)


def check_contraction(
    model: SddeModel,
    cert: ContractionCert,
    sampler: Optional[PointSampler] = None,
    n_points: int = DEFAULT_POINTS,
) -> ViolationReport:
    """Falsify the contraction inequality on sampled quadruples (x, y, x_bar, y_bar).

    Raises:
        ConfigurationError: If V(x, x) is not zero at the sampled x
    """
    if n_points < 1:
        raise UsageError(f"n_points must be >= 1, got {n_points}")
    sampler = sampler or BoxSampler()
    d = model.d
    points = sampler.draw(n_points, 4 * d)
    x, y, x_bar, y_bar = (points[:, i * d : (i + 1) * d] for i in range(4))

    diagonal = np.asarray(cert.V(x, x), dtype=float)
    if np.any(diagonal != 0.0):
        raise ConfigurationError("V(x, x) must vanish, found a nonzero value at a sampled x")

    df = evaluate_drift(model, x, y) - evaluate_drift(model, x_bar, y_bar)
    dg = evaluate_diffusion(model, x, y) - evaluate_diffusion(model, x_bar, y_bar)
    dx = x - x_bar
    lhs = 2.0 * np.sum(dx * df, axis=-1) + trace_norm_sq(dg)
    rhs = (
        -cert.b1 * np.sum(dx * dx, axis=-1)
        + cert.b2 * np.sum((y - y_bar) ** 2, axis=-1)
        - cert.b3 * np.asarray(cert.V(x, x_bar), dtype=float)
        + cert.b4 * np.asarray(cert.V(y, y_bar), dtype=float)
    )
    return _build_report("contraction", points, lhs, rhs)


def check_growth_function(
    model: SddeModel,
    phi: Callable[[float], float],
    radius: float,
    sampler: Optional[PointSampler] = None,
    n_points: int = DEFAULT_POINTS,
) -> ViolationReport:
    """Falsify the local growth bound that a truncation function Phi must satisfy.

    For quadruples with |x|, |x_bar|, |y|, |y_bar| <= R checks
    |f - f_bar| / D + |g - g_bar|^2 / D^2 <= Phi(R), D = |x - x_bar| + 1 ^ |y - y_bar|.
    Points are drawn in the box [-R, R] and radially projected into the ball.
    """
    if radius < 1:
        raise UsageError(f"Phi is only defined on [1, inf), got radius {radius}")
    sampler = sampler or BoxSampler(-radius, radius)
    d = model.d
    points = sampler.draw(n_points, 4 * d)
    blocks = points.reshape(n_points, 4, d)
    norms = np.linalg.norm(blocks, axis=-1, keepdims=True)
    scale = np.where(norms > radius, radius / np.where(norms > 0, norms, 1.0), 1.0)
    blocks = blocks * scale
    points = blocks.reshape(n_points, 4 * d)
    x, y, x_bar, y_bar = (blocks[:, i, :] for i in range(4))

    denominator = np.linalg.norm(x - x_bar, axis=-1) + np.minimum(
        1.0, np.linalg.norm(y - y_bar, axis=-1)
    )
    usable = denominator > 0
    df = np.linalg.norm(evaluate_drift(model, x, y) - evaluate_drift(model, x_bar, y_bar), axis=-1)
    dg = trace_norm_sq(evaluate_diffusion(model, x, y) - evaluate_diffusion(model, x_bar, y_bar))
    safe = np.where(usable, denominator, 1.0)
    lhs = np.where(usable, df / safe + dg / safe**2, 0.0)
    rhs = np.full_like(lhs, float(phi(radius)))
    return _build_report(f"growth bound at R={radius:g}", points, lhs, rhs)
