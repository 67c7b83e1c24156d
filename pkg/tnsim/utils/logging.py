"""
Structured logging setup using structlog.

This module configures structured logging for the engine with JSON output
at INFO level (batch runs, machine-readable) and human-readable output
otherwise, plus helpers for the recurring solver events.
"""

import logging
import sys
from typing import Any, Optional

import structlog


def setup_logging(level: str = "INFO") -> None:
    """
    Configure structured logging for the application.

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
    """
    # Configure stdlib logging
    logging.basicConfig(
        format="%(message)s",
        stream=sys.stderr,
        level=getattr(logging, level.upper()),
    )

    # Configure structlog
    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="ISO"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.UnicodeDecoder(),
            # JSON for batch runs, pretty print when debugging
            structlog.processors.JSONRenderer() if level.upper() == "INFO" else structlog.dev.ConsoleRenderer(),
        ],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )


def get_logger(name: str = None) -> Any:
    """
    Get a structured logger instance.

    Args:
        name: Logger name (optional)

    Returns:
        Structured logger instance
    """
    return structlog.get_logger(name)


def log_sweep_event(solver: str, sweep: int, energy: float, **kwargs) -> None:
    """
    Log a completed sweep of a variational solver.

    Args:
        solver: Solver name (vmps, vmps_pbc, peps_als, ...)
        sweep: Sweep index (0-based)
        energy: Objective value at the end of the sweep
        **kwargs: Additional context (spread, bond dimension, ...)
    """
    logger = get_logger("sweep")
    logger.debug(
        f"Sweep {sweep} of {solver}",
        solver=solver,
        sweep=sweep,
        energy=energy,
        **kwargs
    )


def log_compression_event(stage: str, distance: float, bond: int, **kwargs) -> None:
    """
    Log the outcome of a bond-dimension reduction.

    Args:
        stage: Where the compression happened (tebd, variational, boundary, ...)
        distance: Reported compression error
        bond: Target bond dimension
        **kwargs: Additional context
    """
    logger = get_logger("compression")
    logger.debug(
        f"Compression {stage}",
        stage=stage,
        distance=distance,
        bond=bond,
        **kwargs
    )


def log_experiment_event(event_type: str, experiment: str, seed: Optional[int] = None, **kwargs) -> None:
    """
    Log an experiment lifecycle event with structured data.

    Args:
        event_type: Type of event (started, finished, unconverged, failed)
        experiment: Experiment name
        seed: Master seed (optional)
        **kwargs: Additional context
    """
    logger = get_logger("experiment")
    logger.info(
        f"Experiment {event_type}",
        event_type=event_type,
        experiment=experiment,
        seed=seed,
        **kwargs
    )
