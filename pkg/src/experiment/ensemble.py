"""Ensemble runs: every (initial datum, step size) leg, its statistics and the output tables.

Trajectory i of every leg draws its noise from substream i of the master
seed, and batches are cut at fixed trajectory indices, so the tables do not
depend on the worker count.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.enums import DistanceMethod, StorageMode
from src.exceptions import ConfigurationError
from src.experiment.config import RunConfig
from src.experiment.manifest import RunManifest, utc_now
from src.models.empirical_measure import EmpiricalSegmentMeasure
from src.models.functional import TestFunctional, parse_functional
from src.models.grid import Grid
from src.models.initial_data import InitialData, parse_initial
from src.models.sdde_model import SddeModel, get_model
from src.models.segment import path_sup_norm
from src.numerics.random_streams import SeedSpec
from src.numerics.run_log import EventType, RunLog
from src.numerics.scheme import (
    EngineDiagnostics,
    coupled_attraction,
    enforce_admissibility,
    initial_nodes_for,
    simulate,
    simulate_ensemble,
)
from src.numerics.statistics import (
    EmpiricalCdf,
    MeanEstimate,
    ks_critical_value,
    ks_statistic,
    summarize_values,
)
from src.numerics.transport import (
    bl_lower_bound,
    cauchy_diagnostic,
    default_dictionary,
    solve_transport,
)
from src.numerics.truncation import TruncationRule, build_rule
from src.renderers.csv_tables import (
    AttractionRow,
    DistanceRow,
    EcdfRow,
    KsRow,
    MeanRow,
    ecdf_rows,
    write_rows,
    write_trajectory,
)

logger = logging.getLogger(__name__)

SANDWICH_TOLERANCE = 1e-12


@dataclass
class FunctionalObserver:
    """Evaluates every functional on the current segments."""

    steps: List[int]
    functionals: Sequence[TestFunctional]
    dt: float
    values: Dict[int, Dict[str, np.ndarray]] = field(default_factory=dict)

    def observe(self, k: int, window: np.ndarray) -> None:
        """Store psi(Y_{t_k}) for every functional."""
        norms = path_sup_norm(window)
        self.values[k] = {
            psi.name: np.asarray(psi.evaluate(window, self.dt, sup_norm=norms), dtype=float)
            for psi in self.functionals
        }


@dataclass
class CaptureObserver:
    """Keeps the segments of selected rows for the distance computations."""

    steps: List[int]
    rows: np.ndarray
    nodes: Dict[int, np.ndarray] = field(default_factory=dict)

    def observe(self, k: int, window: np.ndarray) -> None:
        """Copy the selected rows of the window."""
        self.nodes[k] = window[self.rows].copy()


@dataclass
class BatchResult:
    """Observations from one block of trajectories."""

    start: int
    values: Dict[int, Dict[str, np.ndarray]]
    captures: Dict[int, np.ndarray]
    diagnostics: EngineDiagnostics


@dataclass
class LegResult:
    """Merged observations of one (initial datum, dt) leg."""

    initial: str
    dt: float
    grid: Grid
    values: Dict[int, Dict[str, np.ndarray]]
    captures: Dict[int, EmpiricalSegmentMeasure]
    diagnostics: EngineDiagnostics

    def estimate(self, psi: str, k: int) -> MeanEstimate:
        """Mean and standard error of psi at step k."""
        return summarize_values(self.values[k][psi])

    def cdf(self, psi: str, k: int) -> EmpiricalCdf:
        """Empirical CDF of psi at step k."""
        return EmpiricalCdf(self.values[k][psi])

    @property
    def label(self) -> str:
        """Readable leg name."""
        return f"{self.initial} dt={self.dt:g}"


@dataclass
class EnsembleOutputs:
    """Everything ``run_ensemble`` produced."""

    out_dir: Path
    files: Dict[str, Path]
    legs: List[LegResult]
    means: List[MeanRow]
    ks: List[KsRow]
    distances: List[DistanceRow]
    attraction: List[AttractionRow]
    manifest: RunManifest
    manifest_path: Optional[Path] = None

    def leg(self, initial: str, dt: float) -> LegResult:
        """Look up a leg by initial-datum name and step size."""
        for leg in self.legs:
            if leg.initial == initial and leg.dt == dt:
                return leg
        raise KeyError(f"no leg for {initial} at dt={dt}")


def capture_indices(n: int, size: int, seed: int) -> np.ndarray:
    """Seeded trajectory indices kept for the distance computations."""
    if size >= n:
        return np.arange(n)
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(n, size=size, replace=False))


def simulate_leg(
    model: SddeModel,
    rule: TruncationRule,
    grid: Grid,
    initial: InitialData,
    config: RunConfig,
    steps: Dict[str, List[int]],
    functionals: Sequence[TestFunctional],
    captured: np.ndarray,
) -> LegResult:
    """Run all trajectories of one leg in fixed batches and merge them by index."""
    bounds = [
        (start, min(start + config.batch_size, config.samples))
        for start in range(0, config.samples, config.batch_size)
    ]
    observed = sorted(set(steps["means"]) | set(steps["ecdf"]))

    def run_batch(span: Tuple[int, int]) -> BatchResult:
        start, stop = span
        seeds = [SeedSpec(config.master_seed, i) for i in range(start, stop)]
        nodes = initial_nodes_for(initial, grid, seeds)
        functional_observer = FunctionalObserver(observed, functionals, grid.dt)
        observers: list = [functional_observer]
        local = captured[(captured >= start) & (captured < stop)] - start
        capture_observer = None
        if steps["capture"] and local.size:
            capture_observer = CaptureObserver(steps["capture"], local)
            observers.append(capture_observer)
        run = simulate_ensemble(model, rule, grid, nodes, seeds, observers=observers)
        return BatchResult(
            start=start,
            values=functional_observer.values,
            captures=capture_observer.nodes if capture_observer else {},
            diagnostics=run.diagnostics,
        )

    if config.workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            batches = list(pool.map(run_batch, bounds))
    else:
        batches = [run_batch(span) for span in bounds]
    batches.sort(key=lambda batch: batch.start)

    diagnostics = EngineDiagnostics()
    for batch in batches:
        diagnostics = diagnostics.merge(batch.diagnostics)
    values = {
        k: {
            psi.name: np.concatenate([batch.values[k][psi.name] for batch in batches])
            for psi in functionals
        }
        for k in observed
    }
    provenance = {
        "model": model.name,
        "initial": initial.name,
        "dt": grid.dt,
        "master_seed": config.master_seed,
    }
    captures = {}
    for k in steps["capture"]:
        parts = [batch.captures[k] for batch in batches if k in batch.captures]
        if parts:
            captures[k] = EmpiricalSegmentMeasure(
                np.concatenate(parts), grid.dt, time_step=k, provenance=dict(provenance)
            )
    return LegResult(initial.name, grid.dt, grid, values, captures, diagnostics)


def _distance_row(
    measure_a: EmpiricalSegmentMeasure,
    measure_b: EmpiricalSegmentMeasure,
    config: RunConfig,
    result,
    dt: float,
) -> DistanceRow:
    bl = bl_lower_bound(
        measure_a, measure_b, default_dictionary(measure_a, measure_b, config.master_seed)
    )
    if result.method == DistanceMethod.EXACT and bl > result.value + SANDWICH_TOLERANCE:
        logger.error("bl lower bound %.6g exceeds exact distance %.6g", bl, result.value)
    return DistanceRow(
        dt=dt,
        initial=str(measure_a.provenance.get("initial", "")),
        t=measure_a.time,
        reference_initial=str(measure_b.provenance.get("initial", "")),
        reference_t=measure_b.time,
        method=result.method.value,
        value=result.value,
        bl_lower=bl,
        n=result.n,
        epsilon=float("nan") if result.epsilon is None else result.epsilon,
    )


def distance_rows(legs: Sequence[LegResult], config: RunConfig) -> List[DistanceRow]:
    """Cauchy chain of every leg plus cross-initial distances at the last capture time."""
    options = {
        "epsilon": config.epsilon,
        "max_iterations": config.max_iterations,
        "workers": config.workers,
    }
    rows: List[DistanceRow] = []
    for dt in config.dts:
        legs_dt = [leg for leg in legs if leg.dt == dt]
        for leg in legs_dt:
            measures = [leg.captures[k] for k in sorted(leg.captures)]
            if len(measures) < 2:
                continue
            last = measures[-1]
            by_time = {m.time: m for m in measures}
            for entry in cauchy_diagnostic(measures, config.distance_method, **options):
                rows.append(_distance_row(by_time[entry.time], last, config, entry.result, dt))
        for first, second in combinations(legs_dt, 2):
            if not first.captures or not second.captures:
                continue
            k = max(first.captures)
            if k not in second.captures:
                continue
            a, b = first.captures[k], second.captures[k]
            result = solve_transport(a, b, config.distance_method, **options)
            rows.append(_distance_row(a, b, config, result, dt))
    return rows


def mean_rows(legs: Sequence[LegResult], config: RunConfig) -> List[MeanRow]:
    """Mean and standard error of every functional at every mean step of every leg."""
    rows = []
    for leg in legs:
        means_steps = config.observation_steps(leg.grid)["means"]
        for name in config.functionals:
            psi = parse_functional(name).name
            for k in means_steps:
                estimate = leg.estimate(psi, k)
                rows.append(
                    MeanRow(
                        leg.grid.time(k), psi, leg.initial, leg.dt, estimate.mean, estimate.stderr
                    )
                )
    return rows


def ecdf_table(legs: Sequence[LegResult], config: RunConfig) -> List[EcdfRow]:
    """ECDF jumps of every functional at the last ECDF time of every leg."""
    rows: List[EcdfRow] = []
    for leg in legs:
        k = config.observation_steps(leg.grid)["ecdf"][-1]
        for name in config.functionals:
            psi = parse_functional(name).name
            jumps, heights = leg.cdf(psi, k).steps()
            rows.extend(ecdf_rows(psi, leg.initial, leg.dt, jumps, heights))
    return rows


def ks_rows(legs: Sequence[LegResult], config: RunConfig) -> List[KsRow]:
    """Two-sample KS statistics for every pair of initial data at every ECDF time."""
    rows = []
    for dt in config.dts:
        legs_dt = [leg for leg in legs if leg.dt == dt]
        if not legs_dt:
            continue
        grid = legs_dt[0].grid
        for k in config.observation_steps(grid)["ecdf"]:
            for name in config.functionals:
                psi = parse_functional(name).name
                for first, second in combinations(legs_dt, 2):
                    cdf_a, cdf_b = first.cdf(psi, k), second.cdf(psi, k)
                    rows.append(
                        KsRow(
                            psi,
                            dt,
                            grid.time(k),
                            first.initial,
                            second.initial,
                            ks_statistic(cdf_a, cdf_b),
                            ks_critical_value(cdf_a.n, cdf_b.n),
                        )
                    )
    return rows


def attraction_rows(
    model: SddeModel, rule: TruncationRule, config: RunConfig
) -> List[AttractionRow]:
    """Coupled-noise distances for every configured pair of initial data."""
    rows = []
    for dt in config.dts:
        grid = config.grid(dt)
        steps = config.observation_steps(grid)["means"]
        for name_a, name_b in config.coupling_pairs:
            initial_a = parse_initial(name_a, model.d)
            initial_b = parse_initial(name_b, model.d)
            for t, mean, fraction in coupled_attraction(
                model, rule, grid, initial_a, initial_b, config.master_seed, config.samples, steps
            ):
                rows.append(AttractionRow(dt, name_a, name_b, t, mean, fraction))
    return rows


def _check_growth(leg: LegResult, config: RunConfig, run_log: RunLog) -> None:
    if leg.diagnostics.growth_ok:
        return
    message = (
        f"{leg.label}: coefficient growth bound violated "
        f"(drift ratio {leg.diagnostics.max_drift_ratio:.4g} at step "
        f"{leg.diagnostics.drift_ratio_step}, diffusion ratio "
        f"{leg.diagnostics.max_diffusion_ratio:.4g} at step "
        f"{leg.diagnostics.diffusion_ratio_step})"
    )
    if not config.override_admissibility:
        raise ConfigurationError(message)
    run_log.add_event(message, EventType.WARNING)


def _remove_outputs(paths: Sequence[Path]) -> None:
    for path in paths:
        try:
            Path(path).unlink()
        except FileNotFoundError:
            continue
    for directory in sorted({Path(p).parent for p in paths}, reverse=True):
        try:
            directory.rmdir()
        except OSError:
            continue


def run_ensemble(config: RunConfig, run_log: Optional[RunLog] = None) -> EnsembleOutputs:
    """Simulate, observe and write means.csv, ecdf.csv, ks.csv, distances.csv and the manifest.

    Raises:
        ConfigurationError: If the config is invalid or a growth bound fails
        AdmissibilityError: If a step size fails the gate without override
        SimulationError: If a state becomes non-finite

    Files written before a failure are removed.
    """
    config.validate()
    run_log = run_log or RunLog()
    clock = time.perf_counter()
    model = get_model(config.model)
    rule = build_rule(model, config.phi_coefficient, config.phi_exponent, config.nu)
    functionals = [parse_functional(name) for name in config.functionals]
    initials = [parse_initial(spec, model.d) for spec in config.initials]
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(config=config, started=utc_now())
    written: List[Path] = []
    files: Dict[str, Path] = {}

    def emit(name: str, rows, row_type) -> None:
        path = out_dir / name
        written.append(path)
        count = write_rows(path, rows, row_type)
        files[name] = path
        run_log.add_event(run_log.format_output_message(str(path), count), EventType.OUTPUT)

    try:
        for dt in config.dts:
            report = enforce_admissibility(model, rule, dt, config.override_admissibility)
            manifest.admissibility[repr(dt)] = report.to_dict() if report else None
            if report is not None:
                run_log.add_event(
                    run_log.format_admissibility_message(
                        dt, report.ok, report.slack_a, report.slack_b
                    ),
                    EventType.INFO if report.ok else EventType.WARNING,
                )

        legs: List[LegResult] = []
        captured = capture_indices(config.samples, config.subsample, config.master_seed)
        for dt in config.dts:
            grid = config.grid(dt)
            steps = config.observation_steps(grid)
            for initial in initials:
                leg = simulate_leg(model, rule, grid, initial, config, steps, functionals, captured)
                manifest.diagnostics[leg.label] = leg.diagnostics.to_dict()
                run_log.add_event(
                    run_log.format_diagnostic_message(
                        leg.label,
                        leg.diagnostics.truncation_violations,
                        leg.diagnostics.max_drift_ratio,
                    ),
                    EventType.WARNING
                    if leg.diagnostics.truncation_violations
                    else EventType.DIAGNOSTIC,
                )
                _check_growth(leg, config, run_log)
                legs.append(leg)
                if config.storage == StorageMode.FULL:
                    traj = simulate(
                        model,
                        rule,
                        grid,
                        initial,
                        SeedSpec(config.master_seed, 0),
                        override_admissibility=config.override_admissibility,
                    )
                    path = out_dir / "trajectories" / f"{initial.name}_dt{dt:g}.csv"
                    path.parent.mkdir(exist_ok=True)
                    written.append(path)
                    write_trajectory(path, traj)

        means = mean_rows(legs, config)
        emit("means.csv", means, MeanRow)
        emit("ecdf.csv", ecdf_table(legs, config), EcdfRow)
        ks = ks_rows(legs, config)
        emit("ks.csv", ks, KsRow)
        distances = distance_rows(legs, config)
        emit("distances.csv", distances, DistanceRow)
        manifest.distances = {
            "method": config.distance_method.value,
            "subsample": min(config.subsample, config.samples),
            "sandwich_ok": all(
                row.bl_lower <= row.value + SANDWICH_TOLERANCE
                for row in distances
                if row.method == DistanceMethod.EXACT.value
            ),
        }
        attraction: List[AttractionRow] = []
        if config.coupling_pairs:
            attraction = attraction_rows(model, rule, config)
            emit("attraction.csv", attraction, AttractionRow)
        if config.plots:
            from src.renderers.plot_renderer import emit_plots

            plots = emit_plots(files["means.csv"], files["ecdf.csv"], out_dir / "plots")
            written.extend(plots)
            for path in plots:
                run_log.add_event(f"wrote {path}", EventType.OUTPUT)

        manifest.wall_clock_seconds = round(time.perf_counter() - clock, 3)
        manifest.record_files(out_dir, written)
        manifest_path = manifest.write(out_dir, run_log)
    except BaseException:
        logger.error("Run failed; removing %d partial outputs", len(written))
        _remove_outputs(written)
        raise

    return EnsembleOutputs(
        out_dir=out_dir,
        files=files,
        legs=legs,
        means=means,
        ks=ks,
        distances=distances,
        attraction=attraction,
        manifest=manifest,
        manifest_path=manifest_path,
    )
