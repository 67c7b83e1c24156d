"""
Finite-chain time evolution driver.

Real-time runs keep the norm reported by the truncation errors;
imaginary-time runs renormalize after every step and accumulate the
logarithm of the removed norm, which thermal and partition-function
applications need.
"""

from dataclasses import dataclass, field
from utils.compat import StrEnum
from typing import Callable, Dict, List, Mapping, NamedTuple, Optional, Sequence

import numpy as np

from exceptions import DegenerateStateError, DomainError
from modules.mpo import HamiltonianSpec, apply_mpo, mpo_expectation, nn_hamiltonian_mpo
from modules.mps import MatrixProductState, expect_product, norm_squared
from utils.logging import get_logger

from .compression import compress_variational
from .tebd import tebd_step
from .trotter import EvolutionMode, GateLayer, TrotterScheme, layer_to_mpo, trotter_layers

logger = get_logger("tnsim.evolve")

DT_FLOOR = 1e-5


class TruncationMethod(StrEnum):
    TEBD = "tebd"
    VARIATIONAL = "variational"


class Observable(NamedTuple):
    """Named product of single-site operators, e.g. ("sz_5", {5: SIGMA_Z})."""
    name: str
    ops: Mapping[int, np.ndarray]


class TrajectoryRow(NamedTuple):
    time: float
    values: Dict[str, float]
    discarded_weight: float
    distance: float
    energy: Optional[float]


@dataclass
class Trajectory:
    rows: List[TrajectoryRow] = field(default_factory=list)
    state: Optional[MatrixProductState] = None
    log_norm: float = 0.0
    log_norm_steps: List[float] = field(default_factory=list)
    final_dt: Optional[complex] = None

    def series(self, name: str) -> np.ndarray:
        return np.asarray([row.values[name] for row in self.rows])

    @property
    def times(self) -> np.ndarray:
        return np.asarray([row.time for row in self.rows])

    @property
    def energies(self) -> np.ndarray:
        return np.asarray([row.energy for row in self.rows], dtype=float)


def apply_layers(
    psi: MatrixProductState,
    layers: Sequence[GateLayer],
    bond: int,
    method: TruncationMethod = TruncationMethod.TEBD,
):
    """One Trotter step; returns (state, summed discarded weight, summed distance)."""
    discarded, distance = 0.0, 0.0
    for layer in layers:
        if layer.is_mpo or method == TruncationMethod.VARIATIONAL:
            norm = np.sqrt(norm_squared(psi))
            target = apply_mpo(layer_to_mpo(layer, psi.phys_dims), psi)
            result = compress_variational(target, bond)
            psi = result.state
            distance += result.distance / norm if norm > 0 else result.distance
        else:
            psi, dropped = tebd_step(psi, layer, bond)
            discarded += dropped
    return psi, discarded, distance


def _measure(psi: MatrixProductState, observables: Sequence[Observable]) -> Dict[str, float]:
    return {obs.name: float(expect_product(psi, obs.ops).real) for obs in observables}


def evolve(
    psi0: MatrixProductState,
    spec: HamiltonianSpec,
    scheme: TrotterScheme,
    bond: int,
    t_total: float,
    mode: EvolutionMode = EvolutionMode.REAL,
    observables: Sequence[Observable] = (),
    method: TruncationMethod = TruncationMethod.TEBD,
    track_energy: bool = False,
    hamiltonian_at: Optional[Callable[[float], HamiltonianSpec]] = None,
    adaptive: bool = False,
    adaptive_tolerance: float = 1e-9,
) -> Trajectory:
    """
    Evolve psi0 under exp(-dt H) for t_total / |dt| steps.

    Args:
        psi0: Initial open-boundary state
        spec: Hamiltonian (ignored in favour of hamiltonian_at when given)
        scheme: Trotter scheme; dt must be i * delta (real) or real > 0 (imaginary)
        bond: Maximal bond dimension D
        t_total: Total (real or imaginary) time
        mode: REAL or IMAGINARY
        observables: Products of local operators recorded after every step
        method: TEBD truncation or variational compression of each layer
        track_energy: Record <H> after every step
        hamiltonian_at: Time-dependent Hamiltonian, sampled at step mid-points
        adaptive: Imaginary time only; halve dt whenever the energy decrease
            per unit time falls below adaptive_tolerance (floor 1e-5), and
            stop once it stalls at the floor

    Returns:
        Trajectory with one row per step (plus the initial row)

    Raises:
        InvalidSchemeError: If dt does not match the mode
    """
    mode = EvolutionMode(mode)
    method = TruncationMethod(method)
    scheme.check_mode(mode)
    if t_total < 0:
        raise DomainError(f"total time must be >= 0, got {t_total}")
    if adaptive and mode != EvolutionMode.IMAGINARY:
        raise DomainError("adaptive steps are defined for imaginary time only")
    track_energy = track_energy or adaptive

    def energy_of(psi, time):
        if not track_energy:
            return None
        h = hamiltonian_at(time) if hamiltonian_at is not None else spec
        return float(mpo_expectation(psi, nn_hamiltonian_mpo(h)).real)

    layers = None if hamiltonian_at is not None else trotter_layers(spec, scheme)
    trajectory = Trajectory(state=psi0, final_dt=scheme.dt)
    psi = psi0
    time = 0.0
    trajectory.rows.append(TrajectoryRow(0.0, _measure(psi, observables), 0.0, 0.0, energy_of(psi, 0.0)))

    while time < t_total - 1e-12:
        step = scheme.step_length
        if hamiltonian_at is not None:
            layers = trotter_layers(hamiltonian_at(time + 0.5 * step), scheme)
        psi, discarded, distance = apply_layers(psi, layers, bond, method)
        time += step
        if mode == EvolutionMode.IMAGINARY:
            norm = np.sqrt(norm_squared(psi))
            if norm == 0.0:
                raise DegenerateStateError("imaginary-time evolution annihilated the state")
            psi = psi.scaled(1.0 / norm)
            trajectory.log_norm += float(np.log(norm))
            trajectory.log_norm_steps.append(float(np.log(norm)))
        row = TrajectoryRow(time, _measure(psi, observables), discarded, distance, energy_of(psi, time))
        trajectory.rows.append(row)

        if adaptive and len(trajectory.rows) > 1:
            previous = trajectory.rows[-2].energy
            rate = (previous - row.energy) / step
            if rate < adaptive_tolerance:
                if scheme.step_length / 2 < DT_FLOOR:
                    logger.debug("Imaginary-time steps stalled at the floor", time=time, energy=row.energy)
                    break
                scheme = scheme.with_dt(scheme.dt / 2)
                layers = trotter_layers(spec, scheme) if hamiltonian_at is None else layers
                logger.debug("Halving imaginary time step", dt=scheme.step_length, energy=row.energy)

    trajectory.state = psi
    trajectory.final_dt = scheme.dt
    return trajectory
