"""
Pydantic schemas for the experiment harness.

This package contains the configuration models parsed from TOML files
and the result records written to CSV / JSON-lines.
"""

from .experiment import (
    AlgorithmConfig,
    BatchConfig,
    DisorderConfig,
    ExperimentConfig,
    InitialKind,
    InitialStateConfig,
    ModelConfig,
    ResultFormat,
    TermConfig,
)
from .results import CSV_COLUMNS, RESULTS_SCHEMA_VERSION, ErrorSource, ResultRecord

__all__ = [
    "AlgorithmConfig",
    "BatchConfig",
    "DisorderConfig",
    "ExperimentConfig",
    "InitialKind",
    "InitialStateConfig",
    "ModelConfig",
    "ResultFormat",
    "TermConfig",
    "CSV_COLUMNS",
    "RESULTS_SCHEMA_VERSION",
    "ErrorSource",
    "ResultRecord",
]
