"""
Command-line entry point for the tnsim experiment harness.

Verbs:
    run <config.toml>      run one experiment or an [[experiments]] batch
    list                   list the experiment catalogue
    describe <experiment>  show an experiment's defaults and required inputs

Exit codes: 0 ok, 2 configuration error, 3 unconverged result, 4 internal error.
TNSIM_OUTPUT_DIR and TNSIM_THREADS override the output directory and the
batch concurrency; --output-dir and --threads override both.
"""

import argparse
import asyncio
import json
import sys
from typing import List, Optional

from config import settings
from exceptions import ConfigError
from modules.experiments import (
    CATALOGUE,
    get_definition,
    get_experiment_service,
    reset_experiment_service,
)
from utils.logging import get_logger, setup_logging

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_UNCONVERGED = 3
EXIT_INTERNAL = 4

logger = get_logger("tnsim.main")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tnsim", description="Tensor-network experiment harness")
    parser.add_argument("--log-level", default=None, help="Override TNSIM_LOG_LEVEL")
    verbs = parser.add_subparsers(dest="verb", required=True)

    run = verbs.add_parser("run", help="Run the experiments of a TOML configuration file")
    run.add_argument("config", help="Path to the configuration file")
    run.add_argument("--allow-unconverged", action="store_true",
                     help="Exit with status 0 even if a solver did not converge")
    run.add_argument("--output-dir", default=None, help="Directory for result files")
    run.add_argument("--threads", type=int, default=None, help="Concurrent experiments in a batch")

    verbs.add_parser("list", help="List the experiment catalogue")

    describe = verbs.add_parser("describe", help="Show defaults and required inputs of an experiment")
    describe.add_argument("experiment", help="Experiment name")
    return parser


def _list() -> int:
    for name in sorted(CATALOGUE):
        print(f"{name:22s} {CATALOGUE[name].description}")
    return EXIT_OK


def _describe(name: str) -> int:
    definition = get_definition(name)
    print(definition.name)
    print(f"  {definition.description}")
    print(f"  required: {', '.join(definition.required) or '-'}")
    print("  defaults:")
    for key, value in sorted(definition.defaults.items()):
        print(f"    {key} = {json.dumps(value)}")
    return EXIT_OK


def _run(config: str, allow_unconverged: bool, output_dir: Optional[str], threads: Optional[int]) -> int:
    if output_dir is not None:
        settings.output_dir = output_dir
    if threads is not None:
        if threads < 1:
            raise ConfigError(f"--threads must be >= 1, got {threads}")
        settings.threads = threads
    reset_experiment_service()
    service = get_experiment_service()
    configs = service.load_config(config)
    if len(configs) == 1:
        runs = [service.run_and_emit(configs[0])]
    else:
        runs = asyncio.run(service.run_batch(configs))
    for run in runs:
        print(f"{run.name}: {len(run.records)} records -> {run.path}")
    unconverged = [run.name for run in runs if not run.converged]
    if unconverged:
        logger.warning("Unconverged experiments", experiments=unconverged, allowed=allow_unconverged)
        if not allow_unconverged:
            return EXIT_UNCONVERGED
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level or settings.log_level)
    try:
        if args.verb == "list":
            return _list()
        if args.verb == "describe":
            return _describe(args.experiment)
        return _run(args.config, args.allow_unconverged, args.output_dir, args.threads)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as e:
        logger.error("Internal error", error=str(e), exc_info=True)
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
