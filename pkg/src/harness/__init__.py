# Harness Module
from .config import ExperimentConfig, EXPERIMENT_NAMES, load_suite, deep_merge
from .report import CheckRecord, ExperimentReport, REPORT_SCHEMA
from .experiments import EXPERIMENTS
from .runner import ExperimentRunner, EXIT_OK, EXIT_FAILED, EXIT_CONFIG

__all__ = [
    'ExperimentConfig',
    'EXPERIMENT_NAMES',
    'load_suite',
    'deep_merge',
    'CheckRecord',
    'ExperimentReport',
    'REPORT_SCHEMA',
    'EXPERIMENTS',
    'ExperimentRunner',
    'EXIT_OK',
    'EXIT_FAILED',
    'EXIT_CONFIG',
]
