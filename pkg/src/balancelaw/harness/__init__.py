"""Command-line harness: configs, manifests, sweeps."""

from .config import RunConfig, parse_config, serialize
from .sweep import SweepResult, run_sweep

__all__ = ["RunConfig", "SweepResult", "parse_config", "run_sweep", "serialize"]
