from .config import SEED_ENV, SweepConfig, load_config, parse_config
from .emit import emit, read_csv, records_to_csv
from .fit import FitResult, LogCorrection, fit_all, fit_exponent, log_correction
from .sweep import SweepRecord, run_sweep

__all__ = [
    "SEED_ENV",
    "SweepConfig",
    "load_config",
    "parse_config",
    "emit",
    "read_csv",
    "records_to_csv",
    "FitResult",
    "LogCorrection",
    "fit_all",
    "fit_exponent",
    "log_correction",
    "SweepRecord",
    "run_sweep",
]
