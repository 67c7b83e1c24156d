"""
Run context shared by the experiment runners.

RunContext merges the algorithmic defaults of an experiment with the
configured overrides, keeps the parameter echo written into every
record and collects the records. The builders turn configuration
tables into engine objects.
"""

import time
from typing import Any, Dict, List, Optional

import numpy as np

from config import settings
from exceptions import ConfigError
from modules.mpo import HamiltonianSpec, build_preset, spec_from_terms
from modules.mps import Boundary, MatrixProductState, basis_state
from modules.peps import Peps, mott_peps, trap_mott_occupation
from schemas import ErrorSource, ExperimentConfig, InitialKind, InitialStateConfig, ModelConfig, ResultRecord
from utils.seeding import derive_seed

from .catalogue import ExperimentDefinition


class RunContext:
    """Parameters, echo and collected records of one experiment run."""

    def __init__(self, cfg: ExperimentConfig, definition: ExperimentDefinition):
        self.cfg = cfg
        self.definition = definition
        overrides = cfg.algorithm.model_dump(exclude_none=True)
        unused = sorted(set(overrides) - set(definition.accepted_keys))
        if unused:
            raise ConfigError(
                f"keys {unused} are not used by '{definition.name}' (accepted: {definition.accepted_keys})",
                context="algorithm",
            )
        self._check_required(overrides)
        self.params: Dict[str, Any] = {**definition.defaults, **overrides}
        self.echo: Dict[str, Any] = {
            "experiment": cfg.experiment,
            "seed": cfg.seed,
            "oracle": cfg.oracle,
            **{k: _plain(v) for k, v in self.params.items()},
        }
        for key in ("model", "initial", "disorder"):
            section = getattr(cfg, key)
            if section is not None:
                self.echo[key] = section.model_dump(mode="json", exclude_none=True)
        self.records: List[ResultRecord] = []
        self._started = time.perf_counter()

    def _check_required(self, overrides: Dict[str, Any]) -> None:
        for item in self.definition.required:
            options = item.split("|")
            present = [
                k for k in options
                if (getattr(self.cfg, k) is not None if k in ("model", "initial", "disorder") else k in overrides)
            ]
            if not present:
                raise ConfigError(f"experiment '{self.definition.name}' requires '{item}'", context=self.cfg.name)

    def __getitem__(self, key: str) -> Any:
        return self.params[key]

    def get(self, key: str, default: Any = None) -> Any:
        return self.params.get(key, default)

    @property
    def label(self) -> str:
        return self.cfg.name

    def seed(self, *keys: int) -> int:
        return derive_seed(self.cfg.seed, *keys)

    def oracle_allowed(self, dim: int, cap: Optional[int] = None) -> bool:
        """Dense comparison requested and affordable."""
        return self.cfg.oracle and dim <= (settings.dense_max_dim if cap is None else cap)

    def record(
        self,
        metric: str,
        value: float,
        source: ErrorSource,
        time_point: Optional[float] = None,
        epsilon: Optional[float] = None,
        delta_k: Optional[float] = None,
        discarded_weight: Optional[float] = None,
        converged: bool = True,
    ) -> None:
        wall = time.perf_counter() - self._started if settings.emit_wall_time else None
        self.records.append(ResultRecord(
            experiment=self.label,
            params=self.echo,
            metric=metric,
            time=time_point,
            value=float(np.real(value)),
            error_source=source,
            epsilon=_optional_float(epsilon),
            delta_k=_optional_float(delta_k),
            discarded_weight=_optional_float(discarded_weight),
            converged=bool(converged),
            wall_time=wall,
        ))

    @property
    def converged(self) -> bool:
        return all(r.converged for r in self.records)


def _optional_float(value) -> Optional[float]:
    return None if value is None else float(value)


def _plain(value: Any) -> Any:
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    return value


# ----------------------------------------------------------------------
# Builders
# ----------------------------------------------------------------------

def build_spec(model: ModelConfig) -> HamiltonianSpec:
    """
    Hamiltonian of a model table.

    Raises:
        ConfigError: For unknown presets, operators or parameters
    """
    if model.terms is not None:
        lattice = tuple(model.lattice) if model.lattice else None
        try:
            return spec_from_terms(model.n, model.d, [t.model_dump() for t in model.terms],
                                   Boundary(model.boundary), lattice)
        except (KeyError, ValueError) as e:
            raise ConfigError(str(e), context="model.terms")
    params = dict(model.params)
    try:
        if "boundary" in params:
            params["boundary"] = Boundary(params["boundary"])
        return build_preset(model.preset, **params)
    except KeyError as e:
        raise ConfigError(str(e.args[0]), context="model.preset")
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e), context="model.params")


def initial_mps(initial: Optional[InitialStateConfig], default: InitialKind, n: int, d: int) -> MatrixProductState:
    """Product chain state; basis index 0 is spin up."""
    kind = default if initial is None else initial.kind
    if kind == InitialKind.ALL_UP:
        configuration = [0] * n
    elif kind == InitialKind.FLIPPED_CENTER:
        configuration = [0] * n
        configuration[n // 2] = 1
    elif kind == InitialKind.NEEL:
        configuration = [k % 2 for k in range(n)]
    else:
        raise ConfigError(f"start state '{kind}' needs a 2-D lattice", context="initial.kind")
    return basis_state(configuration, d)


def initial_peps(initial: Optional[InitialStateConfig], rows: int, cols: int,
                 trap: Optional[Dict[str, float]] = None) -> Peps:
    """
    Product lattice state; occupied (basis index 0) sites carry a particle.

    Without an initial table the trap of the model (v0, mu) defines a Mott start.
    """
    if initial is None:
        if trap is None or "v0" not in trap or "mu" not in trap:
            raise ConfigError("no [initial] table and the model has no trap parameters", context="initial")
        return mott_peps(trap_mott_occupation(rows, cols, float(trap["v0"]), float(trap["mu"])))
    kind = initial.kind
    if kind == InitialKind.TRAP_MOTT:
        occupied = trap_mott_occupation(rows, cols, initial.v0, initial.mu)
    elif kind == InitialKind.ALL_UP:
        occupied = [[True] * cols for _ in range(rows)]
    elif kind == InitialKind.NEEL:
        occupied = [[(i + j) % 2 == 0 for j in range(cols)] for i in range(rows)]
    else:
        occupied = [[True] * cols for _ in range(rows)]
        occupied[rows // 2][cols // 2] = False
    return mott_peps(occupied)
