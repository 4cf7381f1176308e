"""Numerical components: truncation, noise, the scheme and measure statistics."""

from .random_streams import NoiseStream, SeedSpec
from .run_log import EventType, RunEvent, RunLog
from .scheme import simulate, simulate_ensemble
from .statistics import EmpiricalCdf, functional_mean, ks_statistic
from .transport import TransportResult, bl_lower_bound, solve_transport, truncated_wasserstein
from .truncation import AdmissibilityReport, TruncationRule, truncate, truncation_radius

__all__ = [
    "AdmissibilityReport",
    "EmpiricalCdf",
    "EventType",
    "NoiseStream",
    "RunEvent",
    "RunLog",
    "SeedSpec",
    "TransportResult",
    "TruncationRule",
    "bl_lower_bound",
    "functional_mean",
    "ks_statistic",
    "simulate",
    "simulate_ensemble",
    "solve_transport",
    "truncate",
    "truncated_wasserstein",
    "truncation_radius",
]
