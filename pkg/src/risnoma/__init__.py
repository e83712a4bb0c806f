"""Monte Carlo simulator for RIS-assisted grant-free power-domain NOMA uplink."""
from .config import ConfigError, NetworkConfig, load_config, save_config
from .montecarlo import run_sweep, run_trial, run_trials

__version__ = "0.1.0"

__all__ = ["ConfigError", "NetworkConfig", "load_config", "save_config",
           "run_trial", "run_trials", "run_sweep", "__version__"]
