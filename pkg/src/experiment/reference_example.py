"""Built-in reference run: the cubic two-dimensional delay model from three initial data.

Runs ``paper-example-5.1`` (alias ``cubic-delay-2d``) with Phi(R) = 16 R^4,
nu = 1/100 from xi1 (Brownian path), xi2(theta) = (2 theta, theta + 1) and
xi3 = (-3, 4), and writes an ``acceptance.json`` summary next to the usual tables.
"""

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

from src.enums import DistanceMethod
from src.experiment.config import RunConfig
from src.experiment.ensemble import EnsembleOutputs, run_ensemble
from src.models.sdde_model import EXAMPLE_MODEL
from src.numerics.run_log import EventType, RunLog

logger = logging.getLogger(__name__)

REFERENCE_MODEL = EXAMPLE_MODEL
REFERENCE_INITIALS = ("xi1", "xi2", "xi3")
REFERENCE_FUNCTIONALS = ("cos-norm", "clip-norm-2")
ACCEPTANCE_NAME = "acceptance.json"

# Means agree when |m_a - m_b| <= MEAN_SIGMAS * sqrt(se_a^2 + se_b^2)
MEAN_SIGMAS = 3.0


def reference_config(
    dts: Sequence[float] = (1e-3,),
    samples: int = 2000,
    horizon: float = 10.0,
    out_dir: str = "temsp-reference",
    master_seed: int = 0,
    workers: int = 1,
    distance_method: DistanceMethod = DistanceMethod.EXACT,
    plots: bool = False,
) -> RunConfig:
    """Return the run configuration of the reference example."""
    capture = tuple(t for t in (1.0, 5.0) if t < horizon) + (horizon,)
    return RunConfig(
        model=REFERENCE_MODEL,
        phi_coefficient=16.0,
        phi_exponent=4.0,
        nu=0.01,
        dts=tuple(dts),
        horizon=horizon,
        samples=samples,
        initials=REFERENCE_INITIALS,
        master_seed=master_seed,
        workers=workers,
        mean_every=0.1,
        ecdf_times=(horizon,),
        capture_times=capture if len(capture) > 1 else (),
        functionals=REFERENCE_FUNCTIONALS,
        distance_method=distance_method,
        subsample=512,
        out_dir=out_dir,
        plots=plots,
    )


def _agree(first, second) -> Dict[str, Any]:
    gap = abs(first.mean - second.mean)
    limit = MEAN_SIGMAS * math.sqrt(first.stderr**2 + second.stderr**2)
    return {
        "mean_a": first.mean,
        "stderr_a": first.stderr,
        "mean_b": second.mean,
        "stderr_b": second.stderr,
        "gap": gap,
        "limit": limit,
        "ok": gap <= limit,
    }


def acceptance_summary(outputs: EnsembleOutputs) -> Dict[str, Any]:
    """Evaluate the reference checks on a finished run.

    Checks: step-size gate margins, zero truncation violations, xi2 / xi3
    agreement of means and distributions at the horizon, shrinking distances
    along the xi3 chain, the bl <= W sandwich and, with two step sizes,
    agreement of the clip-norm mean across step sizes.
    """
    config = outputs.manifest.config
    dts = list(config.dts)
    summary: Dict[str, Any] = {"admissibility": outputs.manifest.admissibility}

    violations = sum(leg.diagnostics.truncation_violations for leg in outputs.legs)
    summary["truncation"] = {"violations": violations, "ok": violations == 0}

    stability = []
    for dt in dts:
        xi2, xi3 = outputs.leg("xi2", dt), outputs.leg("xi3", dt)
        k = xi2.grid.n_steps
        for psi in REFERENCE_FUNCTIONALS:
            entry = {"dt": dt, "psi": psi, "t": xi2.grid.time(k)}
            entry["means"] = _agree(xi2.estimate(psi, k), xi3.estimate(psi, k))
            ks = [
                row
                for row in outputs.ks
                if row.dt == dt and row.psi == psi and row.t == entry["t"]
                and {row.initial_a, row.initial_b} == {"xi2", "xi3"}
            ]
            if ks:
                entry["ks"] = {
                    "statistic": ks[0].statistic,
                    "critical": ks[0].critical,
                    "ok": ks[0].statistic <= ks[0].critical,
                }
            entry["ok"] = entry["means"]["ok"] and entry.get("ks", {"ok": True})["ok"]
            stability.append(entry)
    summary["stability"] = stability

    chain = {
        row.t: row.value
        for row in outputs.distances
        if row.dt == dts[0] and row.initial == "xi3" and row.reference_initial == "xi3"
    }
    if 1.0 in chain and 5.0 in chain:
        summary["cauchy"] = {
            "w_t1": chain[1.0],
            "w_t5": chain[5.0],
            "ok": chain[5.0] < chain[1.0],
        }
    summary["sandwich"] = {"ok": bool(outputs.manifest.distances.get("sandwich_ok", True))}

    if len(dts) >= 2:
        coarse, fine = outputs.leg("xi3", dts[0]), outputs.leg("xi3", dts[1])
        summary["step_size"] = {
            "dt_a": dts[0],
            "dt_b": dts[1],
            "psi": "clip-norm-2",
            **_agree(
                coarse.estimate("clip-norm-2", coarse.grid.n_steps),
                fine.estimate("clip-norm-2", fine.grid.n_steps),
            ),
        }

    checks = [
        all(report is not None and report["ok"] for report in summary["admissibility"].values()),
        summary["truncation"]["ok"],
        all(entry["ok"] for entry in stability),
        summary.get("cauchy", {"ok": True})["ok"],
        summary["sandwich"]["ok"],
        summary.get("step_size", {"ok": True})["ok"],
    ]
    summary["passed"] = all(checks)
    return summary


@dataclass
class ReferenceOutcome:
    """Outputs of the reference run with its acceptance summary."""

    outputs: EnsembleOutputs
    acceptance: Dict[str, Any]
    acceptance_path: Path


def run_reference_example(
    dts: Sequence[float] = (1e-3,),
    samples: int = 2000,
    horizon: float = 10.0,
    out_dir: str = "temsp-reference",
    master_seed: int = 0,
    workers: int = 1,
    distance_method: DistanceMethod = DistanceMethod.EXACT,
    plots: bool = False,
    run_log: Optional[RunLog] = None,
) -> ReferenceOutcome:
    """Run the reference example and write acceptance.json.

    Raises:
        Whatever ``run_ensemble`` raises
    """
    run_log = run_log or RunLog()
    config = reference_config(
        dts, samples, horizon, out_dir, master_seed, workers, distance_method, plots
    )
    outputs = run_ensemble(config, run_log)
    acceptance = acceptance_summary(outputs)
    path = outputs.out_dir / ACCEPTANCE_NAME
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(acceptance, handle, indent=2, sort_keys=True)
        handle.write("\n")
    verdict = "passed" if acceptance["passed"] else "FAILED"
    run_log.add_event(
        f"reference checks {verdict}",
        EventType.INFO if acceptance["passed"] else EventType.WARNING,
    )
    outputs.manifest.record_files(outputs.out_dir, [path])
    outputs.manifest_path = outputs.manifest.write(outputs.out_dir, run_log)
    return ReferenceOutcome(outputs=outputs, acceptance=acceptance, acceptance_path=path)
