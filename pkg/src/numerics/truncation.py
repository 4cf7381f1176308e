"""Growth function Phi, constant K, truncation map Gamma and the step-size gates."""

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from src.exceptions import ConfigurationError, UsageError
from src.models.certificates import ContractionCert, DissipativityCert
from src.models.sdde_model import SddeModel
from src.numerics.model_checks import evaluate_diffusion, evaluate_drift, trace_norm_sq

logger = logging.getLogger(__name__)

DEFAULT_NU = 0.01
MAX_NU = 1.0 / 3.0

# Radii for the Phi / Phi^-1 round-trip check
CHECK_RADII = np.logspace(0.0, 6.0, 61)
ROUND_TRIP_TOLERANCE = 1e-10

# Largest double below 1; caps step sizes to the open interval (0, 1)
BELOW_ONE = float(np.nextafter(1.0, 0.0))


@dataclass(frozen=True)
class TruncationRule:
    """Phi with its inverse, the exponent nu and the constant K."""

    phi: Callable
    phi_inv: Callable
    nu: float = DEFAULT_NU
    K: float = 1.0
    label: str = ""

    def __post_init__(self) -> None:
        """Validate nu, K and the Phi / Phi^-1 pair on the check radii."""
        problems = []
        if not 0 < self.nu <= MAX_NU:
            problems.append(f"nu must lie in (0, 1/3], got {self.nu}")
        phi_values = np.asarray(self.phi(CHECK_RADII), dtype=float)
        if not np.all(np.diff(phi_values) > 0):
            problems.append("phi is not strictly increasing on [1, 1e6]")
        round_trip = np.asarray(self.phi_inv(phi_values), dtype=float)
        error = np.abs(round_trip - CHECK_RADII) / CHECK_RADII
        if not np.all(error <= ROUND_TRIP_TOLERANCE):
            problems.append(f"phi_inv(phi(R)) != R, worst relative error {np.max(error):.3g}")
        phi_one = float(self.phi(1.0))
        if self.K < max(1.0, phi_one):
            problems.append(f"K must be >= 1 and >= phi(1)={phi_one}, got {self.K}")
        if problems:
            raise ConfigurationError(f"Invalid truncation rule '{self.label}'", problems)


def power_law_rule(
    coefficient: float, exponent: float, K: float, nu: float = DEFAULT_NU
) -> TruncationRule:
    """Build the rule Phi(R) = c R^p with inverse (v / c)^(1/p).

    Raises:
        ConfigurationError: If c or p is not positive
    """
    if not coefficient > 0 or not exponent > 0:
        raise ConfigurationError(
            f"power-law Phi needs positive coefficient and exponent, got {coefficient}, {exponent}"
        )

    def phi(radius):
        return coefficient * np.power(radius, exponent)

    def phi_inv(value):
        return np.power(np.asarray(value, dtype=float) / coefficient, 1.0 / exponent)

    return TruncationRule(phi, phi_inv, nu=nu, K=K, label=f"Phi(R)={coefficient:g}R^{exponent:g}")


def compute_K(model: SddeModel, phi: Callable) -> float:
    """Return K = max(1, Phi(1), |f(0,0)|, |g(0,0)|^2) with the trace norm for g."""
    zero = np.zeros(model.d)
    f0 = float(np.linalg.norm(evaluate_drift(model, zero, zero)))
    g0 = float(trace_norm_sq(evaluate_diffusion(model, zero, zero)))
    return max(1.0, float(phi(1.0)), f0, g0)


def build_rule(
    model: SddeModel, phi_coefficient: float, phi_exponent: float, nu: float = DEFAULT_NU
) -> TruncationRule:
    """Build a power-law rule with K computed from the model."""
    draft = power_law_rule(phi_coefficient, phi_exponent, K=max(1.0, phi_coefficient), nu=nu)
    K = compute_K(model, draft.phi)
    rule = power_law_rule(phi_coefficient, phi_exponent, K=K, nu=nu)
    logger.debug("Built %s with K=%g, nu=%g for model %s", rule.label, K, nu, model.name)
    return rule


def _check_dt(dt: float) -> None:
    if not 0 < dt < 1:
        raise UsageError(f"dt must lie in (0, 1), got {dt}")


def truncation_radius(rule: TruncationRule, dt: float) -> float:
    """Return Phi^-1(K dt^-nu), the radius of the truncation ball.

    Raises:
        ConfigurationError: If K dt^-nu falls below Phi(1)
    """
    _check_dt(dt)
    argument = rule.K * dt ** (-rule.nu)
    if argument < float(rule.phi(1.0)):
        raise ConfigurationError(
            f"K*dt^-nu={argument:g} is below Phi(1) at dt={dt}; Phi^-1 is undefined there"
        )
    return float(rule.phi_inv(argument))


def truncate(x, radius: float) -> np.ndarray:
    """Radially project x onto the ball of the given radius (Gamma).

    Works on a single vector or a stack with the vector on the last axis.
    x = 0 maps to 0. Projected points are nudged so their computed norm never
    exceeds the radius, which makes the map exactly idempotent.
    """
    if not radius > 0:
        raise UsageError(f"radius must be > 0, got {radius}")
    x = np.asarray(x, dtype=float)
    norm = np.linalg.norm(x, axis=-1, keepdims=True)
    outside = norm > radius
    if not np.any(outside):
        return x.copy()
    scale = np.where(outside, radius / np.where(outside, norm, 1.0), 1.0)
    result = x * scale
    while True:
        over = np.linalg.norm(result, axis=-1, keepdims=True) > radius
        if not np.any(over):
            return result
        result = np.where(over, result * BELOW_ONE, result)


@dataclass
class AdmissibilityReport:
    """Step-size gate evaluation.

    ``margin_a`` and ``margin_b`` are the gate left-hand sides
    a2 - 6K^2 dt^(1-2nu) and b1 - 4K^2 dt^(1-2nu); the gate passes when they
    exceed a3 and b2, i.e. when both slacks are positive.
    """

    dt: float
    ok: bool
    margin_a: float
    margin_b: float
    slack_a: float
    slack_b: float
    dt_max: float

    def to_dict(self) -> dict:
        """Return a JSON-friendly dict for the run manifest."""
        return {
            "dt": self.dt,
            "ok": self.ok,
            "margin_a": self.margin_a,
            "margin_b": self.margin_b,
            "slack_a": self.slack_a,
            "slack_b": self.slack_b,
            "dt_max": self.dt_max,
        }


def admissible_dt(
    dcert: DissipativityCert, ccert: ContractionCert, K: float, nu: float, dt: float
) -> AdmissibilityReport:
    """Evaluate both step-size gates at dt and the largest admissible step size.

    Args:
        dcert: Dissipativity constants (a2, a3 used)
        ccert: Contraction constants (b1, b2 used)
        K: Truncation constant
        nu: Truncation exponent
        dt: Step size in (0, 1)

    Returns:
        Report; ok=False is a valid outcome
    """
    _check_dt(dt)
    power = 1.0 - 2.0 * nu
    growth = K * K * dt**power
    margin_a = dcert.a2 - 6.0 * growth
    margin_b = ccert.b1 - 4.0 * growth
    slack_a = margin_a - dcert.a3
    slack_b = margin_b - ccert.b2
    root_a = ((dcert.a2 - dcert.a3) / (6.0 * K * K)) ** (1.0 / power)
    root_b = ((ccert.b1 - ccert.b2) / (4.0 * K * K)) ** (1.0 / power)
    return AdmissibilityReport(
        dt=dt,
        ok=bool(slack_a > 0 and slack_b > 0),
        margin_a=margin_a,
        margin_b=margin_b,
        slack_a=slack_a,
        slack_b=slack_b,
        dt_max=min(root_a, root_b, BELOW_ONE),
    )


def model_admissibility(model: SddeModel, rule: TruncationRule, dt: float) -> AdmissibilityReport:
    """Evaluate the gates with the certificates attached to the model.

    Raises:
        ConfigurationError: If the model carries no certificates
    """
    if not model.certified:
        raise ConfigurationError(f"model '{model.name}' has no step-size certificates")
    assert model.dissipativity is not None and model.contraction is not None
    return admissible_dt(model.dissipativity, model.contraction, rule.K, rule.nu, dt)


def identity_threshold_dt(rule: TruncationRule, M: float) -> float:
    """Largest dt in (0, 1) with M <= Phi^-1(K dt^-nu), so Gamma fixes the ball B(M).

    Returns the cap below 1 when Phi(M) <= K, since then every dt qualifies.
    """
    if not M > 0:
        raise UsageError(f"M must be > 0, got {M}")
    phi_m = float(rule.phi(max(M, 1.0)))
    if phi_m <= rule.K:
        return BELOW_ONE
    return min(BELOW_ONE, (rule.K / phi_m) ** (1.0 / rule.nu))
