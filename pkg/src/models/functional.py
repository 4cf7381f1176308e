"""Test functionals Psi on segment space."""

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Optional

import numpy as np

from src.enums import FunctionalKind
from src.exceptions import ConfigurationError, UsageError
from src.models.segment import interpolate_nodes, path_sup_norm

# Custom functionals map nodes (..., N + 1, d) and dt to values (...,)
NodeFunction = Callable[[np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class TestFunctional:
    """A functional Psi with declared Lipschitz and sup bounds.

    Values are ``scale`` times the base functional of the kind:
        COS_NORM: cos(||X||)
        CLIP_NORM: level ^ ||X - reference|| (reference defaults to zero)
        COORDINATE_EVAL: X(theta)_coordinate clipped to [-level, level]
        CUSTOM: function(nodes, dt)
    """

    __test__ = False  # not a pytest class

    name: str
    kind: FunctionalKind
    lipschitz_bound: float
    sup_bound: float
    level: float = 1.0
    scale: float = 1.0
    theta: float = 0.0
    coordinate: int = 0
    reference: Optional[np.ndarray] = field(default=None, compare=False, repr=False)
    function: Optional[NodeFunction] = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        """Validate the parameters of the kind."""
        problems = []
        if self.lipschitz_bound < 0 or self.sup_bound < 0:
            problems.append("declared bounds must be nonnegative")
        if self.kind in (FunctionalKind.CLIP_NORM, FunctionalKind.COORDINATE_EVAL):
            if not self.level > 0:
                problems.append(f"level must be > 0, got {self.level}")
        if self.kind == FunctionalKind.CUSTOM and self.function is None:
            problems.append("custom functionals need a function")
        if problems:
            raise ConfigurationError(f"Invalid functional '{self.name}'", problems)

    @property
    def in_xi(self) -> bool:
        """Whether the declared bounds place Psi in the 1-Lipschitz, 1-bounded class."""
        return self.lipschitz_bound <= 1.0 and self.sup_bound <= 1.0

    def evaluate(
        self, nodes: np.ndarray, dt: float, sup_norm: Optional[np.ndarray] = None
    ) -> np.ndarray:
        """Evaluate Psi on one or many segments.

        Args:
            nodes: Node values of shape (..., N + 1, d)
            dt: Node spacing
            sup_norm: Precomputed ||X|| for the same nodes (optional)

        Returns:
            Array of shape (...,)
        """
        nodes = np.asarray(nodes, dtype=float)
        if self.kind == FunctionalKind.COS_NORM:
            norm = path_sup_norm(nodes) if sup_norm is None else sup_norm
            base = np.cos(norm)
        elif self.kind == FunctionalKind.CLIP_NORM:
            if self.reference is not None:
                if self.reference.shape != nodes.shape[-2:]:
                    raise UsageError(
                        f"reference segment shape {self.reference.shape} does not match "
                        f"{nodes.shape[-2:]}"
                    )
                norm = path_sup_norm(nodes - self.reference)
            else:
                norm = path_sup_norm(nodes) if sup_norm is None else sup_norm
            base = np.minimum(self.level, norm)
        elif self.kind == FunctionalKind.COORDINATE_EVAL:
            point = interpolate_nodes(nodes, dt, self.theta)
            base = np.clip(point[..., self.coordinate], -self.level, self.level)
        else:
            assert self.function is not None
            base = np.asarray(self.function(nodes, dt), dtype=float)
        return self.scale * base

    def scaled(self, factor: float, name: Optional[str] = None) -> "TestFunctional":
        """Return factor * Psi with bounds scaled accordingly."""
        return replace(
            self,
            name=name or f"{factor:g}*{self.name}",
            scale=self.scale * factor,
            lipschitz_bound=self.lipschitz_bound * abs(factor),
            sup_bound=self.sup_bound * abs(factor),
        )


def cos_norm() -> TestFunctional:
    """Psi_1(X) = cos(||X||)."""
    return TestFunctional("cos-norm", FunctionalKind.COS_NORM, lipschitz_bound=1.0, sup_bound=1.0)


def clip_norm(
    level: float = 2.0, reference: Optional[np.ndarray] = None, name: str = ""
) -> TestFunctional:
    """Psi(X) = level ^ ||X - reference||; level 2 without reference is Psi_2."""
    return TestFunctional(
        name or f"clip-norm-{level:g}",
        FunctionalKind.CLIP_NORM,
        lipschitz_bound=1.0,
        sup_bound=float(level),
        level=float(level),
        reference=None if reference is None else np.asarray(reference, dtype=float),
    )


def half_clip_norm() -> TestFunctional:
    """(1/2) Psi_2, the rescaling of 2 ^ ||X|| that lies in the test class."""
    return clip_norm(2.0).scaled(0.5, name="half-clip-norm-2")


def coordinate_eval(theta: float, coordinate: int, level: float = 1.0) -> TestFunctional:
    """Psi(X) = X(theta)_coordinate clipped to [-level, level]."""
    return TestFunctional(
        f"coord-{coordinate}@{theta:g}",
        FunctionalKind.COORDINATE_EVAL,
        lipschitz_bound=1.0,
        sup_bound=float(level),
        level=float(level),
        theta=float(theta),
        coordinate=int(coordinate),
    )


def custom(
    name: str, function: NodeFunction, lipschitz_bound: float, sup_bound: float
) -> TestFunctional:
    """Wrap a user function with its declared bounds."""
    return TestFunctional(
        name,
        FunctionalKind.CUSTOM,
        lipschitz_bound=lipschitz_bound,
        sup_bound=sup_bound,
        function=function,
    )


FUNCTIONAL_REGISTRY: Dict[str, Callable[[], TestFunctional]] = {
    "cos-norm": cos_norm,
    "clip-norm-2": lambda: clip_norm(2.0),
    "clip-norm-1": lambda: clip_norm(1.0),
    "half-clip-norm-2": half_clip_norm,
}


def parse_functional(name: str) -> TestFunctional:
    """Look up a reporting functional by name.

    ``clip-norm-<level>`` is accepted for any positive level.

    Raises:
        ConfigurationError: If the name is unknown
    """
    name = name.strip()
    if name in FUNCTIONAL_REGISTRY:
        return FUNCTIONAL_REGISTRY[name]()
    if name.startswith("clip-norm-"):
        try:
            level = float(name[len("clip-norm-"):])
        except ValueError:
            level = math.nan
        if level > 0:
            return clip_norm(level)
    known = ", ".join(sorted(FUNCTIONAL_REGISTRY))
    raise ConfigurationError(f"Unknown functional '{name}' (known: {known}, clip-norm-<c>)")
