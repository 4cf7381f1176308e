"""SDDE model definitions and the builtin model registry."""

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import numpy as np

from src.exceptions import ConfigurationError
from src.models.certificates import ContractionCert, DissipativityCert

# Coefficients are vectorised: x, y have shape (..., d); drift returns (..., d)
# and diffusion returns (..., d, m).
Coefficient = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SddeModel:
    """A stochastic delay differential equation dx = f(x, x_tau)dt + g(x, x_tau)dW."""

    name: str
    d: int
    m: int
    tau: float
    drift: Coefficient
    diffusion: Coefficient
    dissipativity: Optional[DissipativityCert] = None
    contraction: Optional[ContractionCert] = None
    description: str = ""

    def __post_init__(self) -> None:
        """Validate dimensions and delay."""
        problems = []
        if not self.name:
            problems.append("name cannot be empty")
        if self.d < 1:
            problems.append(f"d must be >= 1, got {self.d}")
        if self.m < 1:
            problems.append(f"m must be >= 1, got {self.m}")
        if not self.tau > 0:
            problems.append(f"tau must be > 0, got {self.tau}")
        if problems:
            raise ConfigurationError(f"Invalid model '{self.name}'", problems)

    @property
    def certified(self) -> bool:
        """Whether both step-size certificates are attached."""
        return self.dissipativity is not None and self.contraction is not None


def example_drift(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Drift of the two-dimensional cubic example (delay enters only the noise)."""
    x1 = x[..., 0]
    x2 = x[..., 1]
    return np.stack([1.0 - x1 - 3.0 * x1**3, -(x2 + 3.0 * x2**3)], axis=-1)


def example_diffusion(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Diagonal diffusion where each row uses the other delayed coordinate squared."""
    out = np.zeros(np.broadcast_shapes(x.shape, y.shape)[:-1] + (2, 2))
    out[..., 0, 0] = y[..., 1] ** 2
    out[..., 1, 1] = y[..., 0] ** 2
    return out


def example_lyapunov(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """V(u, v) = sum_i (u_i + v_i)^2 (u_i - v_i)^2."""
    return np.sum((u + v) ** 2 * (u - v) ** 2, axis=-1)


def _zero_drift(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.zeros(np.broadcast_shapes(x.shape, y.shape))


def _zero_diffusion(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    shape = np.broadcast_shapes(x.shape, y.shape)
    return np.zeros(shape + (1,))


def _decay_drift(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return -x


def cubic_delay_model() -> SddeModel:
    """Build the cubic two-dimensional example with delay 1 and its certificates."""
    return SddeModel(
        name="cubic-delay-2d",
        d=2,
        m=2,
        tau=1.0,
        drift=example_drift,
        diffusion=example_diffusion,
        # sup over x of 2x1 - 2|x|^2 is 1/2
        dissipativity=DissipativityCert(alpha=4.0, a1=0.5, a2=3.0, a3=1.0),
        contraction=ContractionCert(b1=2.0, b2=0.0, b3=3.0, b4=1.0, V=example_lyapunov),
        description="dx1=(1-x1-3x1^3)dt+x2(t-1)^2 dW1, dx2=-(x2+3x2^3)dt+x1(t-1)^2 dW2",
    )


def frozen_model() -> SddeModel:
    """Build the one-dimensional model with f = 0 and g = 0."""
    return SddeModel(
        name="frozen",
        d=1,
        m=1,
        tau=1.0,
        drift=_zero_drift,
        diffusion=_zero_diffusion,
        description="dx=0",
    )


def linear_decay_model() -> SddeModel:
    """Build the one-dimensional deterministic decay dx = -x dt."""
    return SddeModel(
        name="linear-decay",
        d=1,
        m=1,
        tau=1.0,
        drift=_decay_drift,
        diffusion=_zero_diffusion,
        description="dx=-x dt",
    )


# Registry key of the two-dimensional cubic example; "cubic-delay-2d" is an alias
EXAMPLE_MODEL = "paper-example-5.1"

MODEL_REGISTRY: Dict[str, Callable[[], SddeModel]] = {
    EXAMPLE_MODEL: cubic_delay_model,
    "cubic-delay-2d": cubic_delay_model,
    "frozen": frozen_model,
    "linear-decay": linear_decay_model,
}


def get_model(name: str) -> SddeModel:
    """Look up a builtin model by name.

    Args:
        name: Registry key

    Returns:
        Freshly built model

    Raises:
        ConfigurationError: If the name is not registered
    """
    factory = MODEL_REGISTRY.get(name)
    if factory is None:
        known = ", ".join(sorted(MODEL_REGISTRY))
        raise ConfigurationError(f"Unknown model '{name}' (known models: {known})")
    return factory()


def list_models() -> List[str]:
    """Return the registered model names in sorted order."""
    return sorted(MODEL_REGISTRY)
