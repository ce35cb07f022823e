"""Configuration, scenario runners and CSV output for reproducible experiments."""

from .config import ExperimentConfig, load_config
from .csvio import emit_csv, emit_scan_csv
from .scenarios import ScenarioResult, run_scenario, run_sweep

__all__ = [
    "ExperimentConfig",
    "load_config",
    "emit_csv",
    "emit_scan_csv",
    "ScenarioResult",
    "run_scenario",
    "run_sweep",
]
