"""Seedable Brownian noise with one independent substream per (trajectory, label).

Substreams are keyed by hashing (master_seed, trajectory_index, label) with
numpy's ``SeedSequence`` into a counter-based Philox generator, so a stream
never depends on how many others exist or in which order they are created.
Gaussians come from numpy's ziggurat ``standard_normal``.
"""

from dataclasses import dataclass

import numpy as np

from src.enums import StreamLabel
from src.exceptions import UsageError
from src.models.grid import Grid

MASTER_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class SeedSpec:
    """Address of one substream."""

    master_seed: int
    trajectory_index: int = 0
    stream_label: StreamLabel = StreamLabel.SCHEME_NOISE

    def __post_init__(self) -> None:
        """Validate the address."""
        if self.trajectory_index < 0:
            raise UsageError(f"trajectory_index must be >= 0, got {self.trajectory_index}")

    def with_label(self, label: StreamLabel) -> "SeedSpec":
        """Return the sibling substream with another label."""
        return SeedSpec(self.master_seed, self.trajectory_index, label)

    def generator(self) -> np.random.Generator:
        """Create a fresh generator positioned at the start of the substream."""
        sequence = np.random.SeedSequence(
            entropy=self.master_seed & MASTER_SEED_MASK,
            spawn_key=(self.trajectory_index, self.stream_label.value),
        )
        return np.random.Generator(np.random.Philox(sequence))


class NoiseStream:
    """Sequential reader of N(0, dt I_m) increments from one substream.

    Consecutive ``draw`` calls concatenate to the same sequence a single
    larger draw would give.
    """

    def __init__(self, seed: SeedSpec, m: int, dt: float):
        """Initialize the stream.

        Args:
            seed: Substream address
            m: Noise dimension
            dt: Step size (variance per coordinate)
        """
        if not dt > 0:
            raise UsageError(f"dt must be > 0, got {dt}")
        self.seed = seed
        self.m = m
        self.dt = dt
        self._scale = np.sqrt(dt)
        self._generator = seed.generator()

    def draw(self, count: int) -> np.ndarray:
        """Return the next count increments as an array of shape (count, m)."""
        if count < 0:
            raise UsageError(f"count must be >= 0, got {count}")
        return self._scale * self._generator.standard_normal((count, self.m))


def brownian_increments(seed: SeedSpec, m: int, dt: float, count: int) -> np.ndarray:
    """Return count i.i.d. N(0, dt I_m) vectors from the start of the substream."""
    return NoiseStream(seed, m, dt).draw(count)


def brownian_initial_path(seed: SeedSpec, d: int, grid: Grid) -> np.ndarray:
    """Sample xi(theta) = B(-theta) at the N + 1 grid nodes.

    The Brownian motion B is drawn on [0, tau] from the initial-data
    substream of the same trajectory, then reversed so that row j holds
    xi(t_{j-N}); the last row (theta = 0) is B(0) = 0.

    Returns:
        Array of shape (N + 1, d)
    """
    stream = NoiseStream(seed.with_label(StreamLabel.INITIAL_DATA), d, grid.dt)
    path = np.zeros((grid.N + 1, d))
    path[1:] = np.cumsum(stream.draw(grid.N), axis=0)
    return path[::-1].copy()
