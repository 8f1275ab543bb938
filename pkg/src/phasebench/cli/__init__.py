from .config import ConfigError, ExperimentConfig, config_hash, load_config
from .runner import emit_plot_data, run_experiment

__all__ = ["ConfigError", "ExperimentConfig", "config_hash", "load_config", "emit_plot_data", "run_experiment"]
