"""Sweep harness: config files, matched sweeps, summary tables and the CLI."""

from .cli import cli_main
from .config import ConfigError, DatasetSource, SweepConfig, load_config, parse_config
from .summaries import emit_summaries
from .sweep import SweepRecord, read_records, run_sweep, write_records

__all__ = [
    "ConfigError",
    "DatasetSource",
    "SweepConfig",
    "SweepRecord",
    "cli_main",
    "emit_summaries",
    "load_config",
    "parse_config",
    "read_records",
    "run_sweep",
    "write_records",
]
