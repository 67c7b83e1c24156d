"""Sweep configuration, records and the convergence rule shared by the solvers."""

from dataclasses import dataclass, field
from utils.compat import StrEnum
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from config import settings
from exceptions import DomainError
from modules.mps import MatrixProductState


class SweepSchedule(StrEnum):
    """FULL sweeps back and forth until converged; SINGLE_FORWARD stops after one pass."""
    FULL = "full"
    SINGLE_FORWARD = "single_forward"


@dataclass(frozen=True)
class SweepConfig:
    """Parameters of an alternating least squares run."""

    bond: int
    precision: float = field(default_factory=lambda: settings.default_precision)
    max_sweeps: int = field(default_factory=lambda: settings.max_sweeps)
    schedule: SweepSchedule = SweepSchedule.FULL
    dense_switchover: int = field(default_factory=lambda: settings.eig_dense_max_dim)
    seed: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "schedule", SweepSchedule(self.schedule))
        if self.bond < 1:
            raise DomainError(f"bond dimension must be >= 1, got {self.bond}")
        if not self.precision > 0:
            raise DomainError(f"precision must be > 0, got {self.precision}")
        if self.max_sweeps < 1:
            raise DomainError(f"max_sweeps must be >= 1, got {self.max_sweeps}")


class SweepRecord(NamedTuple):
    sweep: int
    energy: float
    spread: float


class GroundStateResult(NamedTuple):
    energy: float
    state: MatrixProductState
    history: List[float]
    converged: bool
    sweeps: Tuple[SweepRecord, ...] = ()


def sweep_spread(values: Sequence[float]) -> float:
    """Standard deviation of the site objectives of one sweep."""
    return float(np.std(np.asarray(values, dtype=float)))


def sweep_converged(values: Sequence[float], precision: float) -> bool:
    """
    Relative spread of one sweep's site objectives below precision.

    The scale is floored at 1 so objectives that converge to zero (the
    AKLT energy, a squared residual) can still converge.
    """
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return False
    return sweep_spread(values) <= precision * max(abs(float(values.mean())), 1.0)
