"""Distances between empirical segment measures.

The truncated Wasserstein distance uses the cost 1 ^ ||X1 - X2|| with the
sup norm of the piecewise-linear difference path. ``bl_lower_bound`` bounds
the bounded-Lipschitz distance from below with a finite dictionary, so the
pair (bl_lower_bound, truncated_wasserstein) brackets it.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import ot
from scipy.optimize import linear_sum_assignment

from src.enums import DistanceMethod
from src.exceptions import ConvergenceError, UsageError
from src.models.empirical_measure import EmpiricalSegmentMeasure
from src.models.functional import TestFunctional, clip_norm, coordinate_eval, cos_norm
from src.models.segment import path_sup_norm

logger = logging.getLogger(__name__)

EXACT_LIMIT = 512
DEFAULT_EPSILON = 0.01
DEFAULT_MAX_ITERATIONS = 10_000
# Column-marginal error at which Sinkhorn stops; marginal entries are 1 / n
DEFAULT_TOLERANCE = 1e-6
DICTIONARY_REFERENCES = 8


@dataclass(frozen=True)
class TransportResult:
    """Value of one transport solve with its solver settings."""

    value: float
    method: DistanceMethod
    n: int
    epsilon: Optional[float] = None
    iterations: int = 0
    bias_bound: float = 0.0

    def to_dict(self) -> dict:
        """Return a JSON-friendly dict."""
        return {
            "value": self.value,
            "method": self.method.value,
            "n": self.n,
            "epsilon": self.epsilon,
            "iterations": self.iterations,
            "bias_bound": self.bias_bound,
        }


def _check_compatible(a: EmpiricalSegmentMeasure, b: EmpiricalSegmentMeasure) -> None:
    if a.nodes.shape[1:] != b.nodes.shape[1:]:
        raise UsageError(
            f"measures must share N and d, got {a.nodes.shape[1:]} and {b.nodes.shape[1:]}"
        )


def cost_matrix(
    measure_a: EmpiricalSegmentMeasure,
    measure_b: EmpiricalSegmentMeasure,
    workers: int = 1,
) -> np.ndarray:
    """Return C[i, j] = 1 ^ ||A_i - B_j||, assembled row by row.

    Rows are independent, so they are spread over a thread pool; the result
    does not depend on the worker count.
    """
    _check_compatible(measure_a, measure_b)
    target = measure_b.nodes

    def row(i: int) -> np.ndarray:
        return np.minimum(1.0, path_sup_norm(measure_a.nodes[i] - target))

    if workers <= 1:
        rows = [row(i) for i in range(measure_a.n)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row, range(measure_a.n)))
    return np.vstack(rows)


def exact_assignment(cost: np.ndarray) -> float:
    """Minimal average cost over all one-to-one assignments.

    Raises:
        UsageError: If the cost matrix is not square
    """
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise UsageError(f"exact assignment needs equal sample counts, got {cost.shape}")
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].mean())


def sinkhorn(
    cost: np.ndarray,
    epsilon: float = DEFAULT_EPSILON,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    tolerance: float = DEFAULT_TOLERANCE,
):
    """Log-domain Sinkhorn with uniform marginals (POT ``sinkhorn_log``).

    Args:
        cost: Cost matrix of shape (n_a, n_b)
        epsilon: Entropic regularization
        max_iterations: Iteration cap
        tolerance: L2 error allowed on the column marginal

    Returns:
        Tuple (transport cost of the regularized plan, iterations)

    Raises:
        ConvergenceError: If the cap is reached first
    """
    if not epsilon > 0:
        raise UsageError(f"epsilon must be > 0, got {epsilon}")
    cost = np.asarray(cost, dtype=float)
    n_a, n_b = cost.shape
    value, log = ot.sinkhorn2(
        ot.unif(n_a),
        ot.unif(n_b),
        cost,
        epsilon,
        method="sinkhorn_log",
        numItermax=max_iterations,
        stopThr=tolerance,
        log=True,
        warn=False,
    )
    errors = log["err"]
    if not errors or errors[-1] >= tolerance:
        raise ConvergenceError("Sinkhorn iterations did not converge", iterations=max_iterations)
    return float(value), int(log["niter"]) + 1


def solve_transport(
    measure_a: EmpiricalSegmentMeasure,
    measure_b: EmpiricalSegmentMeasure,
    method: DistanceMethod = DistanceMethod.EXACT,
    epsilon: float = DEFAULT_EPSILON,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    workers: int = 1,
) -> TransportResult:
    """Compute the truncated Wasserstein distance with solver details.

    The entropic value is biased upward by at most epsilon * log(min(n_a, n_b)).

    Raises:
        UsageError: On a size mismatch for the exact method
        ConvergenceError: If Sinkhorn hits the iteration cap
    """
    if method == DistanceMethod.EXACT and measure_a.n != measure_b.n:
        raise UsageError(
            f"exact assignment needs equal sample counts, got {measure_a.n} and {measure_b.n}"
        )
    cost = cost_matrix(measure_a, measure_b, workers=workers)
    if method == DistanceMethod.EXACT:
        if measure_a.n > EXACT_LIMIT:
            logger.warning(
                "Exact assignment on %d samples; subsample to %d for desk-scale runtimes",
                measure_a.n,
                EXACT_LIMIT,
            )
        return TransportResult(value=exact_assignment(cost), method=method, n=measure_a.n)
    value, iterations = sinkhorn(cost, epsilon, max_iterations)
    return TransportResult(
        value=min(1.0, value),
        method=method,
        n=min(measure_a.n, measure_b.n),
        epsilon=epsilon,
        iterations=iterations,
        bias_bound=epsilon * math.log(min(measure_a.n, measure_b.n)),
    )


def truncated_wasserstein(
    measure_a: EmpiricalSegmentMeasure,
    measure_b: EmpiricalSegmentMeasure,
    method: DistanceMethod = DistanceMethod.EXACT,
    **options,
) -> float:
    """Return the truncated Wasserstein distance as a scalar in [0, 1]."""
    return solve_transport(measure_a, measure_b, method, **options).value


def bl_lower_bound(
    measure_a: EmpiricalSegmentMeasure,
    measure_b: EmpiricalSegmentMeasure,
    dictionary: Sequence[TestFunctional],
) -> float:
    """Largest normalised mean gap over a dictionary of functionals in the test class.

    Each gap |E_a psi - E_b psi| is divided by max(1, oscillation of psi on
    the pooled samples), which keeps it below both the bounded-Lipschitz
    distance and the truncated Wasserstein distance.

    Raises:
        UsageError: If a functional is not flagged as in the test class
    """
    _check_compatible(measure_a, measure_b)
    outside = [psi.name for psi in dictionary if not psi.in_xi]
    if outside:
        raise UsageError(f"functionals outside the test class: {', '.join(outside)}")
    best = 0.0
    for psi in dictionary:
        values_a = np.asarray(psi.evaluate(measure_a.nodes, measure_a.dt), dtype=float)
        values_b = np.asarray(psi.evaluate(measure_b.nodes, measure_b.dt), dtype=float)
        pooled = np.concatenate([values_a, values_b])
        oscillation = float(np.max(pooled) - np.min(pooled))
        gap = abs(float(np.mean(values_a)) - float(np.mean(values_b)))
        best = max(best, gap / max(1.0, oscillation))
    return best


def default_dictionary(
    measure_a: EmpiricalSegmentMeasure,
    measure_b: EmpiricalSegmentMeasure,
    seed: Optional[int] = 0,
) -> List[TestFunctional]:
    """Build the standard dictionary for ``bl_lower_bound``.

    cos-norm, 1 ^ ||X||, 1 ^ ||X - X_ref|| for seeded references drawn from
    the pooled samples, and clipped coordinate evaluations at the start,
    middle and end of the window.
    """
    _check_compatible(measure_a, measure_b)
    pooled = np.concatenate([measure_a.nodes, measure_b.nodes])
    rng = np.random.default_rng(seed)
    count = min(DICTIONARY_REFERENCES, pooled.shape[0])
    picks = np.sort(rng.choice(pooled.shape[0], size=count, replace=False))
    dictionary = [cos_norm(), clip_norm(1.0)]
    dictionary += [clip_norm(1.0, reference=pooled[i], name=f"clip-ref-{i}") for i in picks]
    tau = measure_a.N * measure_a.dt
    d = pooled.shape[-1]
    for theta in (-tau, -tau / 2.0, 0.0):
        dictionary += [coordinate_eval(theta, c) for c in range(d)]
    return dictionary


def subsample(
    measure: EmpiricalSegmentMeasure, size: int, seed: Optional[int] = 0
) -> EmpiricalSegmentMeasure:
    """Seeded subsample without replacement, keeping the original sample order."""
    if size < 1:
        raise UsageError(f"subsample size must be >= 1, got {size}")
    if size >= measure.n:
        return measure
    rng = np.random.default_rng(seed)
    indices = np.sort(rng.choice(measure.n, size=size, replace=False))
    result = measure.take(indices)
    result.provenance["subsample"] = {"size": size, "seed": seed, "from": measure.n}
    return result


@dataclass(frozen=True)
class CauchyRow:
    """Distance from the measure at one time to the measure at the last time."""

    time: float
    reference_time: float
    result: TransportResult


def cauchy_diagnostic(
    measures: Sequence[EmpiricalSegmentMeasure],
    method: DistanceMethod = DistanceMethod.EXACT,
    **options,
) -> List[CauchyRow]:
    """Distances W(mu_{t_j}, mu_{t_last}) for every earlier time of one ensemble.

    Raises:
        UsageError: If fewer than two time points are given
    """
    if len(measures) < 2:
        raise UsageError("the Cauchy diagnostic needs at least two time points")
    ordered = sorted(measures, key=lambda m: m.time_step)
    last = ordered[-1]
    rows = []
    for measure in ordered[:-1]:
        result = solve_transport(measure, last, method, **options)
        logger.debug("W(t=%g, t=%g) = %.6f", measure.time, last.time, result.value)
        rows.append(CauchyRow(time=measure.time, reference_time=last.time, result=result))
    return rows
