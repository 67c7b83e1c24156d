"""
Gibbs states by imaginary-time evolution of a purification.

The maximally mixed state is purified by one maximally entangled ancilla
per site. Evolving the system half for beta / 2 gives

    |psi(beta)> ~ exp(-beta H / 2) x I |Phi>,   <psi|psi> = Z / d^n,

so log Z = n log d + 2 * (accumulated log-norm).

The symmetric Trotter product has an error series in even powers of the
step, so two runs with M and M // 2 steps can be combined to cancel the
leading term (Richardson extrapolation of log Z and <H>).
"""

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Tuple

import numpy as np

from exceptions import DomainError
from modules.evolve import EvolutionMode, SchemeKind, TrotterScheme, evolve
from modules.mpo import (
    HamiltonianSpec,
    PurifiedState,
    lift_to_purification,
    mpo_expectation,
    nn_hamiltonian_mpo,
    purified_identity,
)
from modules.mps import expect_product
from modules.tensor_core import as_tensor
from utils.logging import get_logger

logger = get_logger("tnsim.apps.thermal")

ENTROPY_TOLERANCE = 1e-8


@dataclass(frozen=True)
class ThermalResult:
    """Thermodynamics of exp(-beta H) / Z from a purified state."""

    beta: float
    log_z: float
    energy: float
    entropy: float
    free_energy_density: Optional[float]
    state: PurifiedState
    discarded_weight: float = 0.0
    energy_from_log_z: Optional[float] = None
    max_entropy: float = np.inf
    trotter_error: float = 0.0

    def entropy_identity_defect(self) -> float:
        """|S - (log Z + beta <H>)|."""
        return abs(self.entropy - (self.log_z + self.beta * self.energy))

    def energy_consistency_defect(self) -> float:
        """Relative gap between <H> on the state and -d(log Z)/d(beta) from the log-norms."""
        if self.energy_from_log_z is None:
            return 0.0
        return abs(self.energy - self.energy_from_log_z) / max(abs(self.energy), 1.0)

    @property
    def entropy_in_range(self) -> bool:
        """0 <= S <= n log d up to rounding."""
        slack = ENTROPY_TOLERANCE * max(1.0, self.max_entropy)
        return -slack <= self.entropy <= self.max_entropy + slack


def _thermal_energy(state: PurifiedState, spec: HamiltonianSpec) -> float:
    lifted = lift_to_purification(nn_hamiltonian_mpo(spec), state.ancilla_dims)
    return float(mpo_expectation(state.state, lifted).real)


def log_z_derivative(log_norm_steps: Sequence[float], beta: float) -> float:
    """
    -d(log Z)/d(beta) at the final beta from the per-step log-norms.

    Step k ends at beta_k = k * beta / M and raises log Z by
    2 * log_norm_k; the derivative is the second-order backward
    difference (first order when M = 1).
    """
    steps = len(log_norm_steps)
    if steps == 0:
        raise DomainError("no imaginary-time steps to differentiate")
    h = beta / steps
    increments = 2.0 * np.asarray(log_norm_steps, dtype=float)
    if steps == 1:
        return float(-increments[-1] / h)
    # (3 L_M - 4 L_{M-1} + L_{M-2}) / 2h in terms of increments
    return float(-(3.0 * increments[-1] - increments[-2]) / (2.0 * h))


def _purified_run(
    spec: HamiltonianSpec, beta: float, steps: int, bond: int, order: int, kind: SchemeKind,
) -> Tuple[PurifiedState, float, float, float, float]:
    """(state, log Z, <H>, -d log Z / d beta, discarded weight) after `steps` steps."""
    n, d = spec.n, spec.d
    state = purified_identity(n, d)
    scheme = TrotterScheme.imaginary_time(beta / (2 * steps), kind=kind, order=order)
    trajectory = evolve(state.state, spec.with_ancilla(d), scheme, bond, beta / 2, mode=EvolutionMode.IMAGINARY)
    state = state.with_state(trajectory.state)
    log_z = n * float(np.log(d)) + 2.0 * trajectory.log_norm
    energy = _thermal_energy(state, spec)
    from_log_z = log_z_derivative(trajectory.log_norm_steps, beta)
    discarded = float(sum(row.discarded_weight for row in trajectory.rows))
    return state, log_z, energy, from_log_z, discarded


def gibbs_state(
    spec: HamiltonianSpec,
    beta: float,
    trotter_steps: int,
    bond: int,
    order: int = 2,
    kind: SchemeKind = SchemeKind.EVEN_ODD,
    extrapolate: bool = False,
) -> ThermalResult:
    """
    Purified Gibbs state at inverse temperature beta.

    Args:
        spec: Open nearest-neighbour chain
        beta: Inverse temperature >= 0
        trotter_steps: Number M of imaginary-time steps of length beta / (2M)
        bond: Bond dimension of the purification
        order: Trotter order
        kind: Splitting of each step
        extrapolate: Second order only; combine the runs with M and M // 2
            steps so the step-squared error cancels in log Z and <H>

    Returns:
        ThermalResult; at beta = 0 the exact maximally mixed data. The
        state handle is always the M-step purification.

    Raises:
        DomainError: If beta < 0, trotter_steps < 1, or extrapolation is
            requested with fewer than two steps or first order
    """
    if beta < 0:
        raise DomainError(f"beta must be >= 0, got {beta}")
    if trotter_steps < 1:
        raise DomainError(f"need at least one Trotter step, got {trotter_steps}")
    if extrapolate and (trotter_steps < 2 or order != 2):
        raise DomainError("extrapolation needs second order and at least two Trotter steps")
    n, d = spec.n, spec.d
    log_dim = n * float(np.log(d))

    if beta == 0.0:
        state = purified_identity(n, d)
        energy = _thermal_energy(state, spec)
        return ThermalResult(0.0, log_dim, energy, log_dim, None, state, max_entropy=log_dim)

    state, log_z, energy, from_log_z, discarded = _purified_run(spec, beta, trotter_steps, bond, order, kind)
    trotter_error = 0.0
    if extrapolate:
        coarse = trotter_steps // 2
        _, coarse_log_z, coarse_energy, _, coarse_discarded = _purified_run(spec, beta, coarse, bond, order, kind)
        # X(M) = X + a / M^2  =>  X = (M^2 X(M) - M'^2 X(M')) / (M^2 - M'^2)
        fine_w, coarse_w = float(trotter_steps ** 2), float(coarse ** 2)
        extrapolated_log_z = (fine_w * log_z - coarse_w * coarse_log_z) / (fine_w - coarse_w)
        trotter_error = abs(extrapolated_log_z - log_z)
        log_z = extrapolated_log_z
        energy = (fine_w * energy - coarse_w * coarse_energy) / (fine_w - coarse_w)
        discarded += coarse_discarded

    entropy = log_z + beta * energy
    result = ThermalResult(beta, log_z, energy, entropy, float(-log_z / (beta * n)), state, discarded,
                           energy_from_log_z=from_log_z, max_entropy=log_dim, trotter_error=trotter_error)
    if not result.entropy_in_range:
        logger.warning("Gibbs entropy outside [0, n log d]; increase the bond or the Trotter steps",
                       beta=beta, entropy=entropy, max_entropy=log_dim, bond=bond, trotter_steps=trotter_steps)
    logger.debug("Gibbs state", beta=beta, log_z=log_z, energy=energy, entropy=entropy, discarded=discarded,
                 energy_defect=result.energy_consistency_defect(), trotter_error=trotter_error)
    return result


def thermal_expectation(result: ThermalResult, ops: Mapping[int, np.ndarray]) -> complex:
    """Tr(rho O) for a product of single-site system operators."""
    state = result.state
    lifted = {site: np.kron(as_tensor(op), np.eye(state.ancilla_dims[site])) for site, op in ops.items()}
    return expect_product(state.state, lifted)
