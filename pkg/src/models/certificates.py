"""Assumption certificates and the reports produced when checking them.

Certificates are claims supplied by the user. They are falsified by
sampling (see ``src.numerics.model_checks``), never proved.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from src.exceptions import ConfigurationError

# V(x, x_bar) -> nonnegative scalar, vectorised over leading axes
PairFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class DissipativityCert:
    """Claimed constants of <2x, f(x,y)> + |g(x,y)|^2 <= a1 - a2|x|^alpha + a3|y|^alpha."""

    alpha: float
    a1: float
    a2: float
    a3: float

    def __post_init__(self) -> None:
        """Validate the certificate constants."""
        problems = []
        if self.alpha < 2:
            problems.append(f"alpha must be >= 2, got {self.alpha}")
        for name in ("a1", "a2", "a3"):
            if getattr(self, name) < 0:
                problems.append(f"{name} must be >= 0, got {getattr(self, name)}")
        if not self.a2 > self.a3:
            problems.append(f"a2 must exceed a3, got a2={self.a2}, a3={self.a3}")
        if problems:
            raise ConfigurationError("Invalid dissipativity certificate", problems)


def zero_pair_function(x: np.ndarray, x_bar: np.ndarray) -> np.ndarray:
    """Return V(x, x_bar) = 0 for every pair."""
    return np.zeros(np.broadcast_shapes(x.shape, x_bar.shape)[:-1])


@dataclass(frozen=True)
class ContractionCert:
    """Claimed constants of the monotonicity condition with Lyapunov-type term V."""

    b1: float
    b2: float
    b3: float
    b4: float
    V: PairFunction = zero_pair_function

    def __post_init__(self) -> None:
        """Validate the certificate constants."""
        problems = []
        for name in ("b1", "b2", "b3", "b4"):
            if getattr(self, name) < 0:
                problems.append(f"{name} must be >= 0, got {getattr(self, name)}")
        if not self.b1 > self.b2:
            problems.append(f"b1 must exceed b2, got b1={self.b1}, b2={self.b2}")
        if not self.b3 > self.b4:
            problems.append(f"b3 must exceed b4, got b3={self.b3}, b4={self.b4}")
        if problems:
            raise ConfigurationError("Invalid contraction certificate", problems)


@dataclass
class ViolationReport:
    """Outcome of falsifying an inequality on sampled points.

    Margins are right-hand side minus left-hand side, so a negative margin
    means the inequality failed at that point.
    """

    condition: str
    n_points: int
    worst_margin: float
    worst_point: Optional[np.ndarray] = None
    violations: List[np.ndarray] = field(default_factory=list)
    n_violations: int = 0

    # Only the first few violating points are kept
    MAX_STORED = 20

    @property
    def consistent(self) -> bool:
        """Whether no sampled point violated the inequality (not a proof)."""
        return self.n_violations == 0

    def summary(self) -> str:
        """Return a one-line description for logs and manifests."""
        status = "consistent at samples" if self.consistent else f"{self.n_violations} violations"
        return (
            f"{self.condition}: {status}, "
            f"worst margin {self.worst_margin:.6g} over {self.n_points} points"
        )
