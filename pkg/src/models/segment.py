"""Segments Y(theta), theta in [-tau, 0], stored as node values of a piecewise-linear path."""

from dataclasses import dataclass

import numpy as np

from src.exceptions import UsageError


def path_sup_norm(nodes: np.ndarray) -> np.ndarray:
    """Sup over theta of the Euclidean norm of linearly interpolated paths.

    On each interval the path is a + s*b, s in [0, 1], and |a + s*b|^2 is a
    quadratic in s. The maximum is taken over both endpoints and the
    clipped critical point.

    Args:
        nodes: Array of shape (..., n_nodes, d)

    Returns:
        Array of shape (...,) with the sup norms
    """
    nodes = np.asarray(nodes, dtype=float)
    if nodes.shape[-2] == 1:
        return np.linalg.norm(nodes[..., 0, :], axis=-1)
    a = nodes[..., :-1, :]
    b = nodes[..., 1:, :] - a
    bb = np.sum(b * b, axis=-1)
    ab = np.sum(a * b, axis=-1)
    aa = np.sum(a * a, axis=-1)
    end = np.sum(nodes[..., 1:, :] ** 2, axis=-1)
    safe_bb = np.where(bb > 0, bb, 1.0)
    s = np.clip(np.where(bb > 0, -ab / safe_bb, 0.0), 0.0, 1.0)
    interior = aa + 2.0 * s * ab + s * s * bb
    best = np.maximum(np.maximum(aa, end), interior)
    return np.sqrt(np.max(best, axis=-1))


def interpolate_nodes(nodes: np.ndarray, dt: float, theta: float) -> np.ndarray:
    """Evaluate piecewise-linear paths at theta in [-tau, 0].

    Args:
        nodes: Array of shape (..., N + 1, d), node j at theta = (j - N) * dt
        dt: Node spacing
        theta: Evaluation offset

    Returns:
        Array of shape (..., d)
    """
    N = nodes.shape[-2] - 1
    position = (theta + N * dt) / dt
    if position < -1e-9 or position > N + 1e-9:
        raise UsageError(f"theta={theta} lies outside [-{N * dt}, 0]")
    j = min(max(int(np.floor(position)), 0), N)
    if j == N:
        return nodes[..., N, :]
    w = position - j
    return (1.0 - w) * nodes[..., j, :] + w * nodes[..., j + 1, :]


@dataclass
class Segment:
    """One function-valued state Y_{t_k}, held as N + 1 node values."""

    nodes: np.ndarray
    dt: float

    def __post_init__(self) -> None:
        """Normalise the node array to shape (N + 1, d)."""
        self.nodes = np.asarray(self.nodes, dtype=float)
        if self.nodes.ndim == 1:
            self.nodes = self.nodes[:, None]
        if self.nodes.ndim != 2 or self.nodes.shape[0] < 2:
            raise UsageError(f"segment nodes must have shape (N + 1, d), got {self.nodes.shape}")

    @property
    def N(self) -> int:
        """Number of intervals."""
        return self.nodes.shape[0] - 1

    @property
    def d(self) -> int:
        """State dimension."""
        return self.nodes.shape[1]

    @property
    def tau(self) -> float:
        """Length of the segment window."""
        return self.N * self.dt

    def thetas(self) -> np.ndarray:
        """Return the node offsets (j - N) * dt."""
        return np.arange(-self.N, 1) * self.dt

    def __call__(self, theta: float) -> np.ndarray:
        """Evaluate the segment at theta by linear interpolation."""
        return interpolate_nodes(self.nodes, self.dt, theta)

    def sup_norm(self) -> float:
        """Return sup over theta of |Y(theta)|."""
        return float(path_sup_norm(self.nodes))
