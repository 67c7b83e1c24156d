"""
Experiment Service

Service layer for the CLI: loads TOML configuration files, dispatches
experiments through the catalogue and writes their records. Batches run
concurrently in worker threads, each experiment into its own file.
"""

import asyncio
import time
from utils.compat import tomllib
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Union

from pydantic import ValidationError

from config import settings
from exceptions import ConfigError
from schemas import BatchConfig, ExperimentConfig, ResultRecord
from utils.logging import get_logger, log_experiment_event

from .catalogue import ExperimentDefinition, get_definition
from .context import RunContext
from .emitter import emit_results

logger = get_logger("tnsim.experiments.service")

# Singleton service instance
_experiment_service: Optional["ExperimentService"] = None


@dataclass
class ExperimentRun:
    """Outcome of one experiment: its records and where they went."""

    name: str
    records: List[ResultRecord]
    path: Optional[Path]
    converged: bool


def _validation_message(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = ".".join(str(p) for p in item["loc"])
        parts.append(f"{location}: {item['msg']}")
    return "; ".join(parts)


class ExperimentService:
    """
    Service layer for experiment runs.

    Responsibilities:
    - Parse and validate configuration files
    - Dispatch a configuration to its catalogue entry
    - Emit records per experiment, sequentially or as a concurrent batch
    """

    def __init__(self):
        """Initialize the experiment service."""
        self._output_dir = Path(settings.output_dir)
        logger.info("ExperimentService initialized", output_dir=str(self._output_dir), threads=settings.threads)

    def load_config(self, path: Union[str, Path]) -> List[ExperimentConfig]:
        """
        Parse a TOML file holding one experiment or an [[experiments]] batch.

        Raises:
            ConfigError: With the TOML line/column or the offending key path
        """
        path = Path(path)
        try:
            with open(path, "rb") as f:
                data = tomllib.load(f)
        except OSError as e:
            raise ConfigError(str(e), context=str(path)) from e
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(str(e), context=str(path)) from e
        return self.parse_config(data, context=str(path))

    def parse_config(self, data: dict, context: str = "config") -> List[ExperimentConfig]:
        """Validate an already parsed configuration mapping."""
        try:
            if "experiments" in data:
                return BatchConfig.model_validate(data).experiments
            return [ExperimentConfig.model_validate(data)]
        except ValidationError as e:
            raise ConfigError(_validation_message(e), context=context) from e

    def run_experiment(self, cfg: ExperimentConfig) -> List[ResultRecord]:
        """
        Run one experiment and return its records.

        Raises:
            UnknownExperimentError: If the name is not in the catalogue
            ConfigError: If required inputs are missing or keys are unused
        """
        definition: ExperimentDefinition = get_definition(cfg.experiment)
        ctx = RunContext(cfg, definition)
        log_experiment_event("started", cfg.name, seed=cfg.seed)
        started = time.perf_counter()
        definition.runner(ctx)
        event = "finished" if ctx.converged else "unconverged"
        log_experiment_event(event, cfg.name, seed=cfg.seed, records=len(ctx.records),
                             seconds=round(time.perf_counter() - started, 3))
        return ctx.records

    def output_path(self, cfg: ExperimentConfig) -> Path:
        if cfg.output:
            return Path(cfg.output)
        return self._output_dir / f"{cfg.name}.{cfg.format.value}"

    def run_and_emit(self, cfg: ExperimentConfig) -> ExperimentRun:
        records = self.run_experiment(cfg)
        path = emit_results(records, cfg.format, self.output_path(cfg))
        return ExperimentRun(cfg.name, records, path, all(r.converged for r in records))

    async def run_batch(self, configs: List[ExperimentConfig], threads: Optional[int] = None) -> List[ExperimentRun]:
        """
        Run independent experiments concurrently, at most `threads` at a time.

        Results keep the order of the configurations. The first failure is
        raised after the remaining experiments have finished.
        """
        names = [cfg.name for cfg in configs]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise ConfigError(f"experiments {duplicates} would write the same file; set distinct labels",
                              context="experiments")
        limit = asyncio.Semaphore(threads or settings.threads)

        async def run_one(cfg: ExperimentConfig) -> ExperimentRun:
            async with limit:
                return await asyncio.to_thread(self.run_and_emit, cfg)

        outcomes = await asyncio.gather(*(run_one(cfg) for cfg in configs), return_exceptions=True)
        for cfg, outcome in zip(configs, outcomes):
            if isinstance(outcome, BaseException):
                log_experiment_event("failed", cfg.name, seed=cfg.seed, error=str(outcome))
        for outcome in outcomes:
            if isinstance(outcome, BaseException):
                raise outcome
        return list(outcomes)


def get_experiment_service() -> ExperimentService:
    """
    Get the singleton ExperimentService instance.

    Returns:
        ExperimentService instance
    """
    global _experiment_service

    if _experiment_service is None:
        _experiment_service = ExperimentService()

    return _experiment_service


def reset_experiment_service():
    """Reset the experiment service (useful for testing)."""
    global _experiment_service
    _experiment_service = None
    logger.info("Experiment service reset")


def run_experiment(cfg: ExperimentConfig) -> List[ResultRecord]:
    """Run one experiment through the shared service."""
    return get_experiment_service().run_experiment(cfg)
