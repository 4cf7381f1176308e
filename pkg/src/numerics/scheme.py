"""The truncated Euler-Maruyama segment process.

Recursion, for k >= 0:
    u(t_k) = Gamma(xi(t_k))                                   k = -N..0
    u_breve(t_{k+1}) = u(t_k) + f(u(t_k), u(t_{k-N})) dt + g(u(t_k), u(t_{k-N})) dW_k
    u(t_{k+1}) = Gamma(u_breve(t_{k+1}))

Segments Y_{t_k} are the piecewise-linear interpolants of u over
[t_k - tau, t_k]. The engine advances a whole block of trajectories at once
with a rolling (N + 1)-slot buffer per trajectory.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Protocol, Sequence, Tuple

import numpy as np

from src.exceptions import AdmissibilityError, SimulationError, UsageError
from src.models.grid import Grid
from src.models.initial_data import InitialData
from src.models.sdde_model import SddeModel
from src.models.segment import Segment, path_sup_norm
from src.models.trajectory import Trajectory
from src.numerics.model_checks import trace_norm_sq
from src.numerics.random_streams import NoiseStream, SeedSpec, brownian_initial_path
from src.numerics.truncation import (
    AdmissibilityReport,
    TruncationRule,
    model_admissibility,
    truncate,
    truncation_radius,
)

logger = logging.getLogger(__name__)

# Steps of noise drawn per stream at a time; results do not depend on it
DEFAULT_BLOCK_STEPS = 512


class Observer(Protocol):
    """Receives the current segments at selected steps."""

    steps: Iterable[int]

    def observe(self, k: int, window: np.ndarray) -> None:
        """Handle the (n, N + 1, d) segment nodes at step k."""
        ...


@dataclass
class EngineDiagnostics:
    """Inline checks gathered while advancing an ensemble.

    Growth ratios compare |f| and |g| at every step against
    K dt^-nu (1 + |u(t)| + |u(t - tau)|) and its square-root counterpart for g.
    """

    n_states: int = 0
    truncation_violations: int = 0
    max_drift_ratio: float = 0.0
    max_diffusion_ratio: float = 0.0
    drift_ratio_step: int = -1
    diffusion_ratio_step: int = -1

    @property
    def growth_ok(self) -> bool:
        """Whether both growth bounds held at every step."""
        return self.max_drift_ratio <= 1.0 and self.max_diffusion_ratio <= 1.0

    def merge(self, other: "EngineDiagnostics") -> "EngineDiagnostics":
        """Combine diagnostics of two disjoint blocks."""
        merged = EngineDiagnostics(
            n_states=self.n_states + other.n_states,
            truncation_violations=self.truncation_violations + other.truncation_violations,
        )
        first, second = (self, other)
        if second.max_drift_ratio > first.max_drift_ratio:
            merged.max_drift_ratio, merged.drift_ratio_step = (
                second.max_drift_ratio,
                second.drift_ratio_step,
            )
        else:
            merged.max_drift_ratio, merged.drift_ratio_step = (
                first.max_drift_ratio,
                first.drift_ratio_step,
            )
        if second.max_diffusion_ratio > first.max_diffusion_ratio:
            merged.max_diffusion_ratio, merged.diffusion_ratio_step = (
                second.max_diffusion_ratio,
                second.diffusion_ratio_step,
            )
        else:
            merged.max_diffusion_ratio, merged.diffusion_ratio_step = (
                first.max_diffusion_ratio,
                first.diffusion_ratio_step,
            )
        return merged

    def to_dict(self) -> dict:
        """Return a JSON-friendly dict for the run manifest."""
        return {
            "n_states": self.n_states,
            "truncation_violations": self.truncation_violations,
            "max_drift_ratio": self.max_drift_ratio,
            "max_diffusion_ratio": self.max_diffusion_ratio,
            "drift_ratio_step": self.drift_ratio_step,
            "diffusion_ratio_step": self.diffusion_ratio_step,
            "growth_ok": self.growth_ok,
        }


@dataclass
class EnsembleRun:
    """Output of ``simulate_ensemble``."""

    diagnostics: EngineDiagnostics
    values: Optional[np.ndarray] = None
    radius: float = math.nan


@dataclass
class DiagnosticReport:
    """Growth-bound check along a stored trajectory."""

    max_drift_ratio: float
    max_diffusion_ratio: float
    drift_step: int
    diffusion_step: int
    fault: str = ""

    @property
    def ok(self) -> bool:
        """Whether both bounds held at every step."""
        return not self.fault


def enforce_admissibility(
    model: SddeModel, rule: TruncationRule, dt: float, override: bool = False
) -> Optional[AdmissibilityReport]:
    """Apply the step-size gate at simulation entry.

    Returns:
        The gate report, or None when the model carries no certificates

    Raises:
        AdmissibilityError: If the gate fails and no override is set
    """
    if not model.certified:
        logger.warning("Model %s has no certificates; step-size gate skipped", model.name)
        return None
    report = model_admissibility(model, rule, dt)
    if not report.ok:
        message = (
            f"dt={dt} fails the step-size gate for model '{model.name}' "
            f"(slack_a={report.slack_a:.4g}, slack_b={report.slack_b:.4g}, "
            f"dt_max={report.dt_max:.4g})"
        )
        if not override:
            raise AdmissibilityError(message)
        logger.warning("%s; continuing because the override is set", message)
    return report


def _ordered_window(buffer: np.ndarray, k: int) -> np.ndarray:
    slots = buffer.shape[1]
    return buffer[:, (k + np.arange(slots)) % slots]


def simulate_ensemble(
    model: SddeModel,
    rule: TruncationRule,
    grid: Grid,
    initial_nodes: np.ndarray,
    noise_seeds: Sequence[SeedSpec],
    observers: Sequence[Observer] = (),
    record_full: bool = False,
    block_steps: int = DEFAULT_BLOCK_STEPS,
) -> EnsembleRun:
    """Advance a block of trajectories through the truncated recursion.

    Args:
        model: SDDE coefficients
        rule: Truncation rule
        grid: Grid with the horizon in steps
        initial_nodes: Untruncated xi at the nodes, shape (n, N + 1, d)
        noise_seeds: One scheme-noise substream per row; equal seeds give equal noise
        observers: Called with the ordered segments at their steps
        record_full: Keep every state, returning values of shape (n, N + n_steps + 1, d)
        block_steps: Noise block length

    Returns:
        Diagnostics, the optional full values and the truncation radius

    Raises:
        SimulationError: If any state becomes non-finite
    """
    initial_nodes = np.asarray(initial_nodes, dtype=float)
    n, n_nodes, d = initial_nodes.shape
    N = grid.N
    if n_nodes != N + 1 or d != model.d:
        raise UsageError(f"initial nodes must have shape (n, {N + 1}, {model.d})")
    if len(noise_seeds) != n:
        raise UsageError(f"need {n} noise seeds, got {len(noise_seeds)}")
    dt = grid.dt
    radius = truncation_radius(rule, dt)
    drift_bound = rule.K * dt ** (-rule.nu)
    diffusion_bound = math.sqrt(rule.K) * dt ** (-rule.nu / 2.0)

    buffer = truncate(initial_nodes, radius)
    diagnostics = EngineDiagnostics(n_states=buffer.shape[0] * buffer.shape[1])
    diagnostics.truncation_violations = int(
        np.count_nonzero(np.linalg.norm(buffer, axis=-1) > radius)
    )
    full = None
    if record_full:
        full = np.empty((n, N + grid.n_steps + 1, d))
        full[:, : N + 1] = buffer

    schedule = {}
    for observer in observers:
        for step in observer.steps:
            if not 0 <= step <= grid.n_steps:
                raise UsageError(f"observation step {step} outside [0, {grid.n_steps}]")
            schedule.setdefault(int(step), []).append(observer)
    for observer in schedule.get(0, []):
        observer.observe(0, buffer.copy())

    streams = [NoiseStream(seed, model.m, dt) for seed in noise_seeds]
    slots = N + 1
    for block_start in range(0, grid.n_steps, block_steps):
        count = min(block_steps, grid.n_steps - block_start)
        noise = np.stack([stream.draw(count) for stream in streams], axis=1)
        for offset in range(count):
            k = block_start + offset
            current = buffer[:, (k + N) % slots]
            delayed = buffer[:, k % slots]
            drift = np.asarray(model.drift(current, delayed), dtype=float)
            diffusion = np.asarray(model.diffusion(current, delayed), dtype=float)
            breve = current + drift * dt + np.sum(diffusion * noise[offset][:, None, :], axis=-1)
            new = truncate(breve, radius)
            if not np.all(np.isfinite(new)):
                raise SimulationError(f"non-finite state in model '{model.name}'", step=k + 1)

            scale = 1.0 + np.linalg.norm(current, axis=-1) + np.linalg.norm(delayed, axis=-1)
            drift_ratio = float(np.max(np.linalg.norm(drift, axis=-1) / (drift_bound * scale)))
            diffusion_ratio = float(
                np.max(np.sqrt(trace_norm_sq(diffusion)) / (diffusion_bound * scale))
            )
            if drift_ratio > diagnostics.max_drift_ratio:
                diagnostics.max_drift_ratio, diagnostics.drift_ratio_step = drift_ratio, k
            if diffusion_ratio > diagnostics.max_diffusion_ratio:
                diagnostics.max_diffusion_ratio, diagnostics.diffusion_ratio_step = (
                    diffusion_ratio,
                    k,
                )
            diagnostics.truncation_violations += int(
                np.count_nonzero(np.linalg.norm(new, axis=-1) > radius)
            )
            diagnostics.n_states += n

            buffer[:, k % slots] = new
            if full is not None:
                full[:, N + k + 1] = new
            for observer in schedule.get(k + 1, []):
                observer.observe(k + 1, _ordered_window(buffer, k + 1))

    if diagnostics.truncation_violations:
        logger.error(
            "%d stored states exceed the truncation radius %g",
            diagnostics.truncation_violations,
            radius,
        )
    return EnsembleRun(diagnostics=diagnostics, values=full, radius=radius)


def initial_nodes_for(
    initial: InitialData, grid: Grid, seeds: Sequence[SeedSpec]
) -> np.ndarray:
    """Evaluate xi at the nodes for each trajectory, drawing Brownian paths as needed.

    Returns:
        Array of shape (len(seeds), N + 1, d)
    """
    if initial.is_random:
        return np.stack(
            [initial.evaluate(grid, brownian_initial_path(seed, initial.d, grid)) for seed in seeds]
        )
    nodes = initial.evaluate(grid)
    return np.broadcast_to(nodes, (len(seeds),) + nodes.shape).copy()


def simulate(
    model: SddeModel,
    rule: TruncationRule,
    grid: Grid,
    initial: InitialData,
    seed: SeedSpec,
    override_admissibility: bool = False,
) -> Trajectory:
    """Run one trajectory and keep every state.

    Raises:
        AdmissibilityError: If the gate fails without override
        SimulationError: If a state becomes non-finite
    """
    if initial.d != model.d:
        raise UsageError(f"initial data has dimension {initial.d}, model has {model.d}")
    enforce_admissibility(model, rule, grid.dt, override_admissibility)
    nodes = initial_nodes_for(initial, grid, [seed])
    run = simulate_ensemble(model, rule, grid, nodes, [seed], record_full=True)
    assert run.values is not None
    return Trajectory(
        grid=grid,
        values=run.values[0],
        model_name=model.name,
        rule_label=rule.label,
        seed=seed,
        model=model,
    )


def _locate(traj: Trajectory, t: float) -> Tuple[int, float]:
    """Return (k, w) with t = t_k + w * dt and w in [0, 1); w is 0 at grid times."""
    grid = traj.grid
    if not -grid.tau - 1e-12 <= t <= grid.horizon + 1e-12:
        raise UsageError(f"t={t} outside [-{grid.tau}, {grid.horizon}]")
    ratio = t / grid.dt
    try:
        k, w = grid.steps_for_time(t), 0.0
    except UsageError:
        k = math.floor(ratio)
        w = min(max(ratio - k, 0.0), 1.0)
    if k >= grid.n_steps:
        return grid.n_steps, 0.0
    if k < -grid.N:
        return -grid.N, 0.0
    return k, w


def piecewise_constant(traj: Trajectory, t: float) -> np.ndarray:
    """Return u(t_k) for the k with t in [t_k, t_{k+1}) (right-continuous)."""
    k, _ = _locate(traj, t)
    return traj.at_step(k).copy()


def piecewise_linear(traj: Trajectory, t: float) -> np.ndarray:
    """Return the linear interpolant of the stored states at t.

    On [-tau, 0] this interpolates the already truncated initial nodes.
    """
    k, w = _locate(traj, t)
    if w == 0.0:
        return traj.at_step(k).copy()
    return (1.0 - w) * traj.at_step(k) + w * traj.at_step(k + 1)


def extract_segment(traj: Trajectory, k: int) -> Segment:
    """Return Y_{t_k}, the window of states u(t_{k-N})..u(t_k)."""
    if not 0 <= k <= traj.grid.n_steps:
        raise UsageError(f"segment index {k} outside [0, {traj.grid.n_steps}]")
    return Segment(traj.values[k : k + traj.grid.N + 1].copy(), traj.grid.dt)


def segment_sup_norm(seg: Segment) -> float:
    """Return sup over theta of |Y(theta)| for the piecewise-linear segment."""
    return float(path_sup_norm(seg.nodes))


def sup_distance(seg_a: Segment, seg_b: Segment) -> float:
    """Return ||Y_a - Y_b||, the sup norm of the difference path."""
    if seg_a.nodes.shape != seg_b.nodes.shape:
        raise UsageError("segments must share N and d")
    return float(path_sup_norm(seg_a.nodes - seg_b.nodes))


def count_truncation_violations(traj: Trajectory, rule: TruncationRule) -> int:
    """Count stored states whose norm exceeds the truncation radius."""
    radius = truncation_radius(rule, traj.grid.dt)
    return int(np.count_nonzero(np.linalg.norm(traj.values, axis=-1) > radius))


def coefficient_growth_check(
    traj: Trajectory, rule: TruncationRule, model: Optional[SddeModel] = None
) -> DiagnosticReport:
    """Re-evaluate f and g along the stored states and check both growth bounds.

    A ratio above 1 means the growth function does not dominate the model
    coefficients on the truncation ball, which is a configuration fault.
    """
    model = model or traj.model
    if model is None:
        raise UsageError("trajectory carries no model; pass one explicitly")
    grid = traj.grid
    dt = grid.dt
    current = traj.values[grid.N :]
    delayed = traj.values[: grid.n_steps + 1]
    scale = 1.0 + np.linalg.norm(current, axis=-1) + np.linalg.norm(delayed, axis=-1)
    drift = np.linalg.norm(np.asarray(model.drift(current, delayed), dtype=float), axis=-1)
    diffusion = np.sqrt(trace_norm_sq(np.asarray(model.diffusion(current, delayed), dtype=float)))
    drift_ratio = drift / (rule.K * dt ** (-rule.nu) * scale)
    diffusion_ratio = diffusion / (math.sqrt(rule.K) * dt ** (-rule.nu / 2.0) * scale)
    report = DiagnosticReport(
        max_drift_ratio=float(np.max(drift_ratio)),
        max_diffusion_ratio=float(np.max(diffusion_ratio)),
        drift_step=int(np.argmax(drift_ratio)),
        diffusion_step=int(np.argmax(diffusion_ratio)),
    )
    if report.max_drift_ratio > 1.0 or report.max_diffusion_ratio > 1.0:
        report.fault = (
            f"growth bound violated (drift ratio {report.max_drift_ratio:.4g} at step "
            f"{report.drift_step}, diffusion ratio {report.max_diffusion_ratio:.4g} at step "
            f"{report.diffusion_step}); {rule.label} does not dominate model '{model.name}'"
        )
        logger.warning(report.fault)
    return report


@dataclass
class CouplingObserver:
    """Distance between rows i and i + n_pairs of the ensemble at each step."""

    steps: List[int]
    n_pairs: int
    threshold: float
    rows: List[tuple] = field(default_factory=list)

    def observe(self, k: int, window: np.ndarray) -> None:
        """Record mean 1 ^ ||Y_a - Y_b|| and the exceedance fraction at step k."""
        gap = path_sup_norm(window[: self.n_pairs] - window[self.n_pairs :])
        self.rows.append(
            (k, float(np.mean(np.minimum(1.0, gap))), float(np.mean(gap > self.threshold)))
        )


def coupled_attraction(
    model: SddeModel,
    rule: TruncationRule,
    grid: Grid,
    initial_a: InitialData,
    initial_b: InitialData,
    master_seed: int,
    n: int,
    observe_steps: Sequence[int],
    threshold: float = 0.01,
) -> List[tuple]:
    """Drive two initial data with identical noise and track how fast they merge.

    Trajectory i from each initial datum uses scheme-noise substream i, so the
    pair differs only through the initial segment.

    Returns:
        Rows (t, mean of 1 ^ ||Y^a - Y^b||, fraction with ||Y^a - Y^b|| > threshold)
    """
    seeds = [SeedSpec(master_seed, i) for i in range(n)]
    nodes = np.concatenate(
        [initial_nodes_for(initial_a, grid, seeds), initial_nodes_for(initial_b, grid, seeds)]
    )
    observer = CouplingObserver(steps=sorted(set(observe_steps)), n_pairs=n, threshold=threshold)
    simulate_ensemble(model, rule, grid, nodes, seeds + seeds, observers=[observer])
    return [(grid.time(k), mean, fraction) for k, mean, fraction in observer.rows]
