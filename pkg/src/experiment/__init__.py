"""Experiment orchestration: configuration, ensemble runs and manifests."""

from .config import RunConfig, resolve_config
from .ensemble import run_ensemble
from .reference_example import run_reference_example

__all__ = ["RunConfig", "resolve_config", "run_ensemble", "run_reference_example"]
