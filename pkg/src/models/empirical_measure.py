"""Equal-weight empirical measures on segment space."""

from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np

from src.exceptions import UsageError
from src.models.segment import Segment


@dataclass
class EmpiricalSegmentMeasure:
    """Uniform measure over a Monte Carlo sample of segments at one time.

    All segments share N and dt; ``nodes`` has shape (n, N + 1, d).
    """

    nodes: np.ndarray
    dt: float
    time_step: int = 0
    provenance: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        """Validate the sample array."""
        self.nodes = np.asarray(self.nodes, dtype=float)
        if self.nodes.ndim != 3 or self.nodes.shape[0] == 0:
            raise UsageError(
                "an empirical measure needs a nonempty (n, N + 1, d) sample, "
                f"got {self.nodes.shape}"
            )

    @classmethod
    def from_segments(
        cls, segments: Sequence[Segment], time_step: int = 0, provenance=None
    ) -> "EmpiricalSegmentMeasure":
        """Stack segments that share N, d and dt into a measure."""
        if not segments:
            raise UsageError("an empirical measure needs at least one segment")
        dt = segments[0].dt
        shape = segments[0].nodes.shape
        for segment in segments:
            if segment.nodes.shape != shape or segment.dt != dt:
                raise UsageError("all segments of a measure must share N, d and dt")
        return cls(
            nodes=np.stack([s.nodes for s in segments]),
            dt=dt,
            time_step=time_step,
            provenance=dict(provenance or {}),
        )

    @property
    def n(self) -> int:
        """Sample count."""
        return self.nodes.shape[0]

    @property
    def N(self) -> int:
        """Intervals per segment."""
        return self.nodes.shape[1] - 1

    @property
    def time(self) -> float:
        """Time label t_k."""
        return self.time_step * self.dt

    @property
    def segments(self) -> List[Segment]:
        """The samples as Segment objects."""
        return [Segment(nodes, self.dt) for nodes in self.nodes]

    def take(self, indices) -> "EmpiricalSegmentMeasure":
        """Return the measure restricted to the given sample indices."""
        return EmpiricalSegmentMeasure(
            nodes=self.nodes[np.asarray(indices)],
            dt=self.dt,
            time_step=self.time_step,
            provenance=dict(self.provenance),
        )
