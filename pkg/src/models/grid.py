"""Uniform time grid t_k = k * dt with dt = tau / N."""

from dataclasses import dataclass

import numpy as np

from src.exceptions import ConfigurationError, UsageError

# Relative tolerance for deciding that a float is a grid point
ALIGNMENT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Grid:
    """Step grid covering [-tau, n_steps * dt].

    Times are always addressed by integer step index; t_k is computed as k * dt.
    """

    tau: float
    N: int
    n_steps: int = 0

    def __post_init__(self) -> None:
        """Validate the grid."""
        problems = []
        if not self.tau > 0:
            problems.append(f"tau must be > 0, got {self.tau}")
        if self.N < 1:
            problems.append(f"N must be >= 1, got {self.N}")
        elif not self.N > self.tau:
            problems.append(f"N must exceed tau so that dt < 1, got N={self.N}, tau={self.tau}")
        if self.n_steps < 0:
            problems.append(f"n_steps must be >= 0, got {self.n_steps}")
        if problems:
            raise ConfigurationError("Invalid grid", problems)

    @classmethod
    def from_dt(cls, tau: float, dt: float, n_steps: int = 0) -> "Grid":
        """Build a grid from a step size that must divide tau exactly.

        Args:
            tau: Delay
            dt: Requested step size
            n_steps: Horizon in steps

        Returns:
            Grid with N = tau / dt

        Raises:
            ConfigurationError: If tau / dt is not an integer
        """
        if not 0 < dt < 1:
            raise ConfigurationError(f"dt must lie in (0, 1), got {dt}")
        ratio = tau / dt
        N = int(round(ratio))
        if N < 1 or abs(ratio - N) > ALIGNMENT_TOLERANCE * max(1.0, ratio):
            raise ConfigurationError(f"dt={dt} does not divide tau={tau} into an integer N")
        return cls(tau=tau, N=N, n_steps=n_steps)

    @property
    def dt(self) -> float:
        """Step size tau / N."""
        return self.tau / self.N

    @property
    def horizon(self) -> float:
        """Final time t_{n_steps}."""
        return self.time(self.n_steps)

    def time(self, k: int) -> float:
        """Return t_k = k * dt."""
        return k * self.dt

    def thetas(self) -> np.ndarray:
        """Return the N + 1 node offsets theta_j = (j - N) * dt, j = 0..N."""
        return np.arange(-self.N, 1) * self.dt

    def with_steps(self, n_steps: int) -> "Grid":
        """Return the same grid with another horizon."""
        return Grid(tau=self.tau, N=self.N, n_steps=n_steps)

    def steps_for_time(self, t: float) -> int:
        """Convert a decimal time to its step index, rejecting off-grid values.

        Args:
            t: Time to convert

        Returns:
            Integer k with k * dt == t up to rounding

        Raises:
            UsageError: If t is not grid-aligned
        """
        ratio = t / self.dt
        k = int(round(ratio))
        if abs(ratio - k) > ALIGNMENT_TOLERANCE * max(1.0, abs(ratio)):
            raise UsageError(f"time {t} is not a multiple of dt={self.dt}")
        return k
