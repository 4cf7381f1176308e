"""Sample statistics of test functionals over empirical segment measures."""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

from src.exceptions import UsageError
from src.models.empirical_measure import EmpiricalSegmentMeasure
from src.models.functional import TestFunctional
from src.models.segment import path_sup_norm

logger = logging.getLogger(__name__)

# Two-sample KS coefficients c(alpha)
KS_COEFFICIENTS = {0.10: 1.22, 0.05: 1.36, 0.01: 1.63}

SPOT_CHECK_TOLERANCE = 1e-12


@dataclass(frozen=True)
class MeanEstimate:
    """Sample mean with its standard error."""

    mean: float
    stderr: float
    n: int


def functional_values(measure: EmpiricalSegmentMeasure, psi: TestFunctional) -> np.ndarray:
    """Evaluate psi on every sample of the measure."""
    return np.asarray(psi.evaluate(measure.nodes, measure.dt), dtype=float)


def summarize_values(values) -> MeanEstimate:
    """Return mean and standard error (divisor n - 1; zero for a single value)."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise UsageError("cannot summarize an empty sample")
    n = values.size
    stderr = float(np.std(values, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return MeanEstimate(mean=float(np.mean(values)), stderr=stderr, n=n)


def functional_mean(measure: EmpiricalSegmentMeasure, psi: TestFunctional) -> MeanEstimate:
    """Arithmetic mean and standard error of psi over the samples."""
    return summarize_values(functional_values(measure, psi))


class EmpiricalCdf:
    """Right-continuous step function F(v) = #{values <= v} / n."""

    def __init__(self, values):
        """Initialize from raw (unsorted) values.

        Args:
            values: Nonempty sample of scalar values
        """
        values = np.sort(np.asarray(values, dtype=float).ravel())
        if values.size == 0:
            raise UsageError("an empirical CDF needs at least one value")
        self.values = values

    @property
    def n(self) -> int:
        """Sample count."""
        return self.values.size

    def __call__(self, v):
        """Evaluate F at one or many points."""
        return np.searchsorted(self.values, v, side="right") / self.n

    def steps(self):
        """Return the distinct jump points and F at each of them."""
        jumps = np.unique(self.values)
        return jumps, self(jumps)

    def mean(self) -> float:
        """Mean of the distribution the step function describes."""
        return float(np.sum(self.values) / self.n)


def empirical_cdf(measure: EmpiricalSegmentMeasure, psi: TestFunctional) -> EmpiricalCdf:
    """Return the ECDF of psi over the samples."""
    return EmpiricalCdf(functional_values(measure, psi))


def ks_statistic(cdf_a: EmpiricalCdf, cdf_b: EmpiricalCdf) -> float:
    """Sup over the merged jump set of |F_a - F_b|."""
    return float(stats.ks_2samp(cdf_a.values, cdf_b.values).statistic)


def ks_critical_value(n_a: int, n_b: int, alpha: float = 0.05) -> float:
    """Asymptotic two-sample KS rejection threshold at level alpha.

    Raises:
        UsageError: If alpha is not one of the tabulated levels
    """
    if alpha not in KS_COEFFICIENTS:
        raise UsageError(f"alpha must be one of {sorted(KS_COEFFICIENTS)}, got {alpha}")
    if n_a < 1 or n_b < 1:
        raise UsageError("sample sizes must be >= 1")
    return KS_COEFFICIENTS[alpha] * float(np.sqrt((n_a + n_b) / (n_a * n_b)))


@dataclass
class SpotCheckReport:
    """Result of randomly probing a functional's declared bounds."""

    name: str
    n_pairs: int
    max_lipschitz_ratio: float
    max_abs_value: float
    lipschitz_ok: bool
    sup_ok: bool

    @property
    def ok(self) -> bool:
        """Whether both declared bounds held on every sampled pair."""
        return self.lipschitz_ok and self.sup_ok


def random_segments(rng: np.random.Generator, count: int, N: int, d: int) -> np.ndarray:
    """Draw piecewise-linear test segments: random walks with a random offset and scale."""
    scale = rng.uniform(0.05, 3.0, size=(count, 1, 1))
    offset = rng.normal(0.0, 1.5, size=(count, 1, d))
    walk = np.cumsum(rng.normal(0.0, 1.0 / np.sqrt(N), size=(count, N + 1, d)), axis=1)
    return offset + scale * walk


def spot_check(
    psi: TestFunctional,
    n_pairs: int = 10_000,
    seed: Optional[int] = 0,
    N: int = 16,
    d: int = 2,
    tau: float = 1.0,
) -> SpotCheckReport:
    """Check |psi(X1) - psi(X2)| <= L ||X1 - X2|| and |psi(X)| <= S on random segments.

    Half of the pairs are independent, half are small perturbations of each
    other so that the local slope is sampled as well.
    """
    if n_pairs < 1:
        raise UsageError(f"n_pairs must be >= 1, got {n_pairs}")
    if psi.reference is not None:
        N, d = psi.reference.shape[0] - 1, psi.reference.shape[1]
    rng = np.random.default_rng(seed)
    dt = tau / N
    first = random_segments(rng, n_pairs, N, d)
    second = random_segments(rng, n_pairs, N, d)
    close = n_pairs // 2
    second[:close] = first[:close] + rng.normal(0.0, 1e-3, size=(close, N + 1, d))
    values_a = psi.evaluate(first, dt)
    values_b = psi.evaluate(second, dt)
    gap = np.abs(values_a - values_b)
    distance = path_sup_norm(first - second)
    ratio = np.where(distance > 0, gap / np.where(distance > 0, distance, 1.0), 0.0)
    max_ratio = float(np.max(ratio))
    max_abs = float(max(np.max(np.abs(values_a)), np.max(np.abs(values_b))))
    slack = SPOT_CHECK_TOLERANCE * (1.0 + psi.lipschitz_bound)
    report = SpotCheckReport(
        name=psi.name,
        n_pairs=n_pairs,
        max_lipschitz_ratio=max_ratio,
        max_abs_value=max_abs,
        lipschitz_ok=max_ratio <= psi.lipschitz_bound + slack,
        sup_ok=max_abs <= psi.sup_bound + SPOT_CHECK_TOLERANCE,
    )
    if not report.ok:
        logger.warning(
            "Functional %s breaks its declared bounds (slope %.4g, sup %.4g)",
            psi.name,
            max_ratio,
            max_abs,
        )
    return report
