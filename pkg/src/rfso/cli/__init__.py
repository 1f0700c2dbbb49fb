"""Command-line front end and run configuration."""

from .commands import compute_curve, diversity_table, gap_table, run_validation, sample_values
from .config import (
    PRESETS,
    AserCurve,
    ChannelConfig,
    ConfigError,
    GridConfig,
    McSettings,
    RunConfig,
    db_to_linear,
    linear_to_db,
    load_config,
)
from .main import main

__all__ = [
    "AserCurve",
    "ChannelConfig",
    "ConfigError",
    "GridConfig",
    "McSettings",
    "PRESETS",
    "RunConfig",
    "compute_curve",
    "db_to_linear",
    "diversity_table",
    "gap_table",
    "linear_to_db",
    "load_config",
    "main",
    "run_validation",
    "sample_values",
]
