"""Scenario configs, parameter sweeps, SVG plots and the command line."""
from .config import PRESET_NAMES, ScenarioConfig, SimSettings, load_config, parse_config, preset
from .plot import emit_plot, render_svg
from .run import CSV_HEADER, ResultRow, SweepResult, manifest, run, write_outputs

__all__ = [
    "CSV_HEADER",
    "PRESET_NAMES",
    "ResultRow",
    "ScenarioConfig",
    "SimSettings",
    "SweepResult",
    "emit_plot",
    "load_config",
    "manifest",
    "parse_config",
    "preset",
    "render_svg",
    "run",
    "write_outputs",
]
