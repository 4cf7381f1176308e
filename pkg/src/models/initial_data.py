"""Initial segments xi(theta), theta in [-tau, 0]."""

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from src.enums import InitialDataKind
from src.exceptions import ConfigurationError, UsageError
from src.models.grid import Grid


@dataclass(frozen=True)
class InitialData:
    """An initial segment given by kind and parameters.

    Payload layout per kind:
        CONSTANT: ``value`` (the constant vector)
        AFFINE: ``slope`` and ``value`` (xi(theta) = slope * theta + value)
        BROWNIAN: nothing; the path is drawn per trajectory
        GRID_SAMPLES: ``samples`` with shape (N + 1, d)
    """

    kind: InitialDataKind
    d: int
    name: str = ""
    value: Tuple[float, ...] = ()
    slope: Tuple[float, ...] = ()
    samples: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        """Validate the payload against the kind."""
        problems = []
        if self.d < 1:
            problems.append(f"d must be >= 1, got {self.d}")
        if self.kind in (InitialDataKind.CONSTANT, InitialDataKind.AFFINE):
            if len(self.value) != self.d:
                problems.append(f"value must have {self.d} entries, got {len(self.value)}")
        if self.kind == InitialDataKind.AFFINE and len(self.slope) != self.d:
            problems.append(f"slope must have {self.d} entries, got {len(self.slope)}")
        if self.kind == InitialDataKind.GRID_SAMPLES:
            if self.samples is None or np.ndim(self.samples) != 2:
                problems.append("grid samples must be a (N + 1, d) array")
            elif np.shape(self.samples)[1] != self.d:
                problems.append(f"grid samples must have {self.d} columns")
        if problems:
            raise ConfigurationError(f"Invalid initial data '{self.name}'", problems)

    @classmethod
    def constant(cls, value, name: str = "") -> "InitialData":
        """Build xi(theta) = value."""
        value = tuple(float(v) for v in np.atleast_1d(value))
        return cls(InitialDataKind.CONSTANT, d=len(value), name=name, value=value)

    @classmethod
    def affine(cls, slope, value, name: str = "") -> "InitialData":
        """Build xi(theta) = slope * theta + value."""
        slope = tuple(float(v) for v in np.atleast_1d(slope))
        value = tuple(float(v) for v in np.atleast_1d(value))
        return cls(InitialDataKind.AFFINE, d=len(value), name=name, value=value, slope=slope)

    @classmethod
    def brownian(cls, d: int, name: str = "") -> "InitialData":
        """Build xi(theta) = B(-theta) with an independent Brownian motion B."""
        return cls(InitialDataKind.BROWNIAN, d=d, name=name)

    @classmethod
    def grid_samples(cls, samples, name: str = "") -> "InitialData":
        """Build initial data from explicit node values at theta_j = -tau + j dt."""
        samples = np.array(samples, dtype=float)
        if samples.ndim == 1:
            samples = samples[:, None]
        return cls(InitialDataKind.GRID_SAMPLES, d=samples.shape[1], name=name, samples=samples)

    @property
    def is_random(self) -> bool:
        """Whether each trajectory needs its own draw."""
        return self.kind == InitialDataKind.BROWNIAN

    def evaluate(self, grid: Grid, path: Optional[np.ndarray] = None) -> np.ndarray:
        """Return xi at the N + 1 grid nodes, before truncation.

        Args:
            grid: Active grid
            path: Pre-drawn node values for the Brownian kind

        Returns:
            Array of shape (N + 1, d), row j holding xi(t_{j-N})

        Raises:
            UsageError: If grid samples do not match the grid or a Brownian
                path is missing
        """
        n_nodes = grid.N + 1
        if self.kind == InitialDataKind.CONSTANT:
            return np.tile(np.array(self.value), (n_nodes, 1))
        if self.kind == InitialDataKind.AFFINE:
            thetas = grid.thetas()[:, None]
            return thetas * np.array(self.slope) + np.array(self.value)
        if self.kind == InitialDataKind.GRID_SAMPLES:
            assert self.samples is not None
            if self.samples.shape[0] != n_nodes:
                raise UsageError(
                    f"initial data '{self.name}' has {self.samples.shape[0]} samples, "
                    f"grid needs {n_nodes}"
                )
            return np.array(self.samples, dtype=float)
        if path is None:
            raise UsageError(f"Brownian initial data '{self.name}' needs a drawn path")
        if path.shape != (n_nodes, self.d):
            raise UsageError(f"Brownian path must have shape {(n_nodes, self.d)}, got {path.shape}")
        return path

    def describe(self) -> str:
        """Return a compact spec string that ``parse_initial`` reads back."""
        if self.kind == InitialDataKind.CONSTANT:
            return "constant:" + " ".join(repr(v) for v in self.value)
        if self.kind == InitialDataKind.AFFINE:
            slope = " ".join(repr(v) for v in self.slope)
            return f"affine:{slope}/" + " ".join(repr(v) for v in self.value)
        if self.kind == InitialDataKind.BROWNIAN:
            return "brownian"
        return "grid-samples"


def reference_initial_data() -> Tuple[InitialData, InitialData, InitialData]:
    """Return the three initial segments of the two-dimensional example."""
    return (
        InitialData.brownian(2, name="xi1"),
        InitialData.affine((2.0, 1.0), (0.0, 1.0), name="xi2"),
        InitialData.constant((-3.0, 4.0), name="xi3"),
    )


PRESETS = {
    "xi1": lambda d: InitialData.brownian(d, name="xi1"),
    "xi2": lambda d: InitialData.affine((2.0, 1.0), (0.0, 1.0), name="xi2"),
    "xi3": lambda d: InitialData.constant((-3.0, 4.0), name="xi3"),
    "zero": lambda d: InitialData.constant(np.zeros(d), name="zero"),
    "brownian": lambda d: InitialData.brownian(d, name="brownian"),
}


def _parse_vector(text: str) -> Tuple[float, ...]:
    return tuple(float(part) for part in text.split())


def parse_initial(spec: str, d: int) -> InitialData:
    """Parse an initial-data spec string.

    Accepted forms: a preset name (``xi1``, ``xi2``, ``xi3``, ``zero``,
    ``brownian``), ``constant:c1 c2 ...`` and ``affine:s1 s2/c1 c2``.

    Args:
        spec: Spec string
        d: State dimension of the target model

    Returns:
        Parsed initial data, named after the spec

    Raises:
        ConfigurationError: If the spec is malformed or has the wrong dimension
    """
    spec = spec.strip()
    if spec in PRESETS:
        initial = PRESETS[spec](d)
    else:
        kind, _, payload = spec.partition(":")
        try:
            if kind == "constant":
                initial = InitialData.constant(_parse_vector(payload), name=spec)
            elif kind == "affine":
                slope, _, value = payload.partition("/")
                initial = InitialData.affine(_parse_vector(slope), _parse_vector(value), name=spec)
            else:
                raise ConfigurationError(f"Unknown initial-data spec '{spec}'")
        except ValueError as exc:
            if isinstance(exc, ConfigurationError):
                raise
            raise ConfigurationError(f"Malformed initial-data spec '{spec}': {exc}") from exc
    if initial.d != d:
        raise ConfigurationError(f"initial data '{spec}' has dimension {initial.d}, model has {d}")
    return initial
