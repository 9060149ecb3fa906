"""Experiment runner: configuration, invariant checks, statistics and the CLI."""

from .checks import check_trace
from .config import MASTER_SEED, ConfigError, ExperimentConfig, apply_overrides, defaults_text, parse_config
from .experiments import attack_demo, execute, replay, run_experiment, uniformity
from .stats import StatReport

__all__ = [
    "MASTER_SEED", "ConfigError", "ExperimentConfig", "StatReport", "apply_overrides", "attack_demo",
    "check_trace", "defaults_text", "execute", "parse_config", "replay", "run_experiment", "uniformity",
]
