"""Experiment configuration, runs, fits, reports and the command line."""
from .config import ExperimentConfig, load_config, parse_config
from .experiment import ExperimentResult, run_experiment, sweep
from .fit import Fit, fit_overhead, fit_through_origin
from .report import emit_report

__all__ = [
    "ExperimentConfig", "load_config", "parse_config", "ExperimentResult", "run_experiment",
    "sweep", "Fit", "fit_overhead", "fit_through_origin", "emit_report",
]
