"""
Experiments Module

Batch experiment harness behind the CLI: named experiments that dispatch
into the engine modules, with deterministic tabular output.

Key Components:
- catalogue: registry of named experiments with defaults and required inputs
- chains / lattices: the experiment runners
- emitter: CSV / JSON-lines writers and readers
- ExperimentService: configuration loading, dispatch and concurrent batches
"""

from . import chains, lattices  # noqa: F401  (registers the catalogue)
from .catalogue import CATALOGUE, ExperimentDefinition, experiment_names, get_definition
from .context import RunContext, build_spec, initial_mps, initial_peps
from .emitter import emit_results, format_for, read_results
from .service import (
    ExperimentRun,
    ExperimentService,
    get_experiment_service,
    reset_experiment_service,
    run_experiment,
)

__all__ = [
    "CATALOGUE",
    "ExperimentDefinition",
    "experiment_names",
    "get_definition",
    "RunContext",
    "build_spec",
    "initial_mps",
    "initial_peps",
    "emit_results",
    "format_for",
    "read_results",
    "ExperimentRun",
    "ExperimentService",
    "get_experiment_service",
    "reset_experiment_service",
    "run_experiment",
]
