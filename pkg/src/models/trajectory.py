"""Raw scheme output: truncated grid values u(t_k) for k = -N..n_steps."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from src.exceptions import UsageError
from src.models.grid import Grid


@dataclass
class Trajectory:
    """Grid values of one scheme run plus provenance.

    Row ``k + N`` of ``values`` holds u(t_k).
    """

    grid: Grid
    values: np.ndarray
    model_name: str = ""
    rule_label: str = ""
    seed: Optional[object] = field(default=None, repr=False)
    model: Optional[object] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        """Check the stored length against the grid."""
        self.values = np.asarray(self.values, dtype=float)
        expected = self.grid.N + self.grid.n_steps + 1
        if self.values.ndim != 2 or self.values.shape[0] != expected:
            raise UsageError(
                f"trajectory needs {expected} rows of state values, got shape {self.values.shape}"
            )

    @property
    def d(self) -> int:
        """State dimension."""
        return self.values.shape[1]

    @property
    def n_steps(self) -> int:
        """Horizon in steps."""
        return self.grid.n_steps

    def at_step(self, k: int) -> np.ndarray:
        """Return u(t_k) for -N <= k <= n_steps."""
        if not -self.grid.N <= k <= self.grid.n_steps:
            raise UsageError(f"step {k} outside [-{self.grid.N}, {self.grid.n_steps}]")
        return self.values[k + self.grid.N]

    def steps(self) -> np.ndarray:
        """Return the step indices -N..n_steps."""
        return np.arange(-self.grid.N, self.grid.n_steps + 1)

    def times(self) -> np.ndarray:
        """Return t_k = k * dt for every stored row."""
        return self.steps() * self.grid.dt
