from .config import ConfigError, ExperimentConfig, parse_flat, parse_grid
from .experiments import REGISTRY, case_rng, run_experiment
from .plot import KINDS, plot
from .records import ResultRecord, emit, read_csv, read_jsonl, records_to_csv_body, records_to_jsonl_body

__all__ = [
    "ConfigError", "ExperimentConfig", "parse_flat", "parse_grid", "REGISTRY", "case_rng", "run_experiment",
    "KINDS", "plot", "ResultRecord", "emit", "read_csv", "read_jsonl", "records_to_csv_body",
    "records_to_jsonl_body",
]
