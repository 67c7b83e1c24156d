"""
Experiment Catalogue

Registry of the named experiments. Each entry is a thin dispatcher into
the engine modules, registered with the @experiment decorator together
with its description, algorithmic defaults and the physical inputs it
refuses to guess.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Tuple

from exceptions import UnknownExperimentError

# name -> definition, filled when the runner modules are imported
CATALOGUE: Dict[str, "ExperimentDefinition"] = {}


@dataclass(frozen=True)
class ExperimentDefinition:
    """
    One catalogue entry.

    required lists physical inputs without defaults: "model", "initial",
    "disorder" or an algorithm key; "beta|betas" accepts either key.
    """

    name: str
    description: str
    runner: Callable = field(repr=False)
    defaults: Mapping[str, object] = field(default_factory=dict)
    required: Tuple[str, ...] = ()

    @property
    def accepted_keys(self) -> List[str]:
        """Algorithm keys this experiment reads."""
        keys = set(self.defaults)
        for item in self.required:
            keys.update(k for k in item.split("|") if k not in ("model", "initial", "disorder"))
        return sorted(keys)


def experiment(name: str, description: str, defaults: Mapping[str, object] = None,
               required: Tuple[str, ...] = ()) -> Callable:
    """Register the decorated runner under name."""

    def register(runner: Callable) -> Callable:
        CATALOGUE[name] = ExperimentDefinition(name, description, runner, dict(defaults or {}), tuple(required))
        return runner

    return register


def get_definition(name: str) -> ExperimentDefinition:
    """
    Look up an experiment.

    Raises:
        UnknownExperimentError: Listing the registered names
    """
    if name not in CATALOGUE:
        raise UnknownExperimentError(name, list(CATALOGUE))
    return CATALOGUE[name]


def experiment_names() -> List[str]:
    return sorted(CATALOGUE)
