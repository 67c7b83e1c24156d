"""
PEPS ground states.

peps_ground sweeps over the sites and replaces each tensor by the
smallest generalized eigenvector of H_i a = E N_i a, where N_i and H_i
are the environments of the site in <psi|psi> and <psi|H|psi>. The
Hamiltonian environment is the sum over the local patterns of H (bond
channels and site fields), each contracted with its own boundaries.

Approximate environments break the exact positivity of N_i: it is
symmetrized (the defect is recorded), projected onto its positive
semi-definite part and the problem is solved on its support.

peps_imaginary_ground reaches the same goal through imaginary-time
evolution over a ladder of bond dimensions, optionally finished by a few
sweeps of peps_ground.
"""

from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from config import settings
from exceptions import ConditioningError, DegenerateStateError, DomainError, UnsupportedModelError
from modules.evolve import EvolutionMode
from modules.mpo import HamiltonianSpec
from modules.tensor_core import eig_smallest, project_psd
from utils.logging import get_logger, log_sweep_event

from .environment import Sandwich, SweepEnvironments, quadratic_form, snake_order
from .evolution import peps_evolve_step
from .expectation import check_lattice, default_dtilde, local_patterns, normalized, peps_energy
from .state import Peps, padded_to_bond, random_peps

logger = get_logger("tnsim.peps.ground")

HERMITIAN_TOLERANCE = 1e-8
SUPPORT_CUTOFF = 1e-10
CLIP_TOLERANCE = 1e-6


class PepsGroundResult(NamedTuple):
    energy: float
    state: Peps
    history: Tuple[float, ...]
    slack: float
    converged: bool
    max_hermitian_defect: float
    max_delta_k: float


def support_projector(n_matrix: np.ndarray, cutoff: float = SUPPORT_CUTOFF) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigenvalues and eigenvectors of a PSD matrix above cutoff * largest.

    Raises:
        DegenerateStateError: If the matrix vanishes
    """
    w, v = scipy.linalg.eigh(n_matrix)
    if w.size == 0 or w[-1] <= 0.0:
        raise DegenerateStateError("site environment of the norm vanishes")
    keep = w > cutoff * w[-1]
    return w[keep], v[:, keep]


def conditioned_norm_matrix(env: np.ndarray, shape, sweeps: SweepEnvironments, site) -> Tuple[np.ndarray, float]:
    """
    PSD part of the site norm matrix and its Hermiticity defect.

    Raises:
        ConditioningError: If the clipped negative weight exceeds CLIP_TOLERANCE
    """
    projection = project_psd(quadratic_form(env, shape))
    if projection.hermitian_defect > HERMITIAN_TOLERANCE:
        logger.warning("Site norm matrix is not Hermitian", site=site,
                       defect=projection.hermitian_defect, max_delta_k=sweeps.max_delta_k)
    if projection.clipped_weight > CLIP_TOLERANCE:
        raise ConditioningError(
            f"norm matrix of site {site} has negative weight {projection.clipped_weight:.3e}; raise Dtilde",
            smallest_eigenvalue=-projection.clipped_weight,
            max_delta_k=sweeps.max_delta_k,
            dtilde=sweeps.dtilde,
            site=site,
        )
    return projection.matrix, projection.hermitian_defect


def peps_ground(
    spec: HamiltonianSpec,
    bond: int,
    dtilde: Optional[int] = None,
    initial: Optional[Peps] = None,
    max_sweeps: Optional[int] = None,
    precision: Optional[float] = None,
    seed=None,
) -> PepsGroundResult:
    """
    Site-by-site minimization of <H> over PEPS of bond dimension D.

    Args:
        spec: Nearest-neighbour Hamiltonian on an open rows x cols lattice
        bond: Bond dimension D
        dtilde: Boundary bond (default D^2)
        initial: Starting state; smaller bonds are padded with a little noise
        max_sweeps: Sweep limit (default settings.max_sweeps)
        precision: Relative energy change ending the sweeps
        seed: Seed of the random start when no initial state is given

    Returns:
        PepsGroundResult with the best state seen and the accumulated delta_K
        as slack on the monotonicity of the sweep energies

    Raises:
        ConditioningError: If a site norm matrix is indefinite beyond tolerance
    """
    if bond < 1:
        raise DomainError(f"bond dimension must be >= 1, got {bond}")
    if spec.lattice is None:
        raise UnsupportedModelError("PEPS algorithms need a Hamiltonian on a 2-D lattice")
    rows, cols = spec.lattice
    dtilde = default_dtilde(bond) if dtilde is None else dtilde
    max_sweeps = settings.max_sweeps if max_sweeps is None else max_sweeps
    precision = settings.default_precision if precision is None else precision

    if initial is None:
        psi = random_peps(rows, cols, spec.d, bond, seed=seed)
    elif initial.max_bond < bond:
        psi = padded_to_bond(initial, bond, noise=1e-2, seed=seed)
    else:
        psi = initial
    check_lattice(spec, psi)

    patterns = local_patterns(spec)
    norm_sandwich = Sandwich()
    hamiltonian_sandwiches = [Sandwich(dict(p.ops)) for p in patterns]
    sweeps = SweepEnvironments([norm_sandwich] + hamiltonian_sandwiches, dtilde, stage="peps_ground")
    order = snake_order(rows, cols)

    history: List[float] = []
    best_energy, best_state = np.inf, psi
    max_defect, slack, converged = 0.0, 0.0, False
    for sweep in range(max_sweeps):
        delta_k_before = len(sweeps.delta_ks)
        sweeps.start_sweep(psi)
        energy = np.inf
        for i, j in order:
            while sweeps.row < i:
                sweeps.advance(psi)
            holes = sweeps.holes(psi, j)
            site = psi.site(i, j)
            (norm_env, norm_scale), pattern_envs = holes[0], holes[1:]
            n_matrix, defect = conditioned_norm_matrix(norm_env, site.shape, sweeps, (i, j))
            max_defect = max(max_defect, defect)
            h_matrix = np.zeros_like(n_matrix)
            for sandwich, (env, scale) in zip(hamiltonian_sandwiches, pattern_envs):
                h_matrix += np.exp(scale - norm_scale) * quadratic_form(env, site.shape, sandwich.ops.get((i, j)))
            h_matrix = 0.5 * (h_matrix + h_matrix.conj().T)
            _, projector = support_projector(n_matrix)
            pair = eig_smallest(h_matrix, n_matrix, projector=projector)
            vector = pair.vector / np.linalg.norm(pair.vector)
            psi = psi.with_sites({(i, j): vector.reshape(site.shape)})
            energy = pair.value

        sweep_slack = float(np.sum(sweeps.delta_ks[delta_k_before:])) * max(abs(energy), 1.0)
        slack += sweep_slack
        log_sweep_event("peps_ground", sweep, energy, bond=bond, dtilde=dtilde, slack=sweep_slack)
        if history and energy > history[-1] + sweep_slack + 1e-10:
            logger.warning("Sweep energy increased beyond the compression slack",
                           sweep=sweep, energy=energy, previous=history[-1], slack=sweep_slack)
        if energy < best_energy:
            best_energy, best_state = energy, psi
        if history and abs(history[-1] - energy) <= precision * max(abs(energy), 1.0):
            history.append(energy)
            converged = True
            break
        history.append(energy)

    return PepsGroundResult(float(best_energy), best_state, tuple(history), slack, converged,
                            max_defect, sweeps.max_delta_k)


def peps_imaginary_ground(
    spec: HamiltonianSpec,
    initial: Peps,
    bond_ladder: Sequence[int] = (2, 3, 4, 5),
    dt_schedule: Sequence[float] = (0.1, 0.03, 0.01),
    steps_per_dt: int = 20,
    kappa: int = 1,
    polish_sweeps: int = 0,
    precision: Optional[float] = None,
    order: int = 2,
    check_every: int = 5,
) -> PepsGroundResult:
    """
    Imaginary-time descent through increasing bond dimensions.

    At every rung D the state is evolved with each dt of the schedule
    for at most steps_per_dt steps; the energy is measured every
    check_every steps and a stage ends early once it settles to
    precision, with Dtilde = kappa * D^2. Sub-steps whose fit distance
    comes out negative are refitted with a larger Dtilde. A positive
    polish_sweeps then runs peps_ground at the last rung, started from
    the evolved state.

    Returns:
        PepsGroundResult; history holds the energy after every dt stage
    """
    if not bond_ladder:
        raise DomainError("the bond ladder is empty")
    check_lattice(spec, initial)
    precision = settings.default_precision if precision is None else precision
    psi = initial
    history: List[float] = []
    max_dk, converged = 0.0, False
    energy = np.inf
    for bond in bond_ladder:
        dtilde = default_dtilde(bond, kappa)
        for dt in dt_schedule:
            previous = np.inf
            for step in range(steps_per_dt):
                result = peps_evolve_step(psi, spec, dt, EvolutionMode.IMAGINARY, bond, dtilde, order=order)
                psi = normalized(result.state, dtilde)
                max_dk = max(max_dk, result.max_delta_k)
                if (step + 1) % check_every and step + 1 < steps_per_dt:
                    continue
                measured = peps_energy(psi, spec, dtilde)
                energy = float(measured.value.real)
                max_dk = max(max_dk, measured.max_delta_k)
                converged = abs(previous - energy) <= precision * max(abs(energy), 1.0)
                previous = energy
                if converged:
                    break
            history.append(energy)
            log_sweep_event("peps_imaginary", len(history), energy, bond=bond, dt=dt, dtilde=dtilde)

    if polish_sweeps > 0:
        bond = bond_ladder[-1]
        polished = peps_ground(spec, bond, default_dtilde(bond, kappa), initial=psi,
                               max_sweeps=polish_sweeps, precision=precision)
        if polished.energy <= energy:
            return polished._replace(history=tuple(history) + polished.history,
                                     max_delta_k=max(max_dk, polished.max_delta_k))
    return PepsGroundResult(energy, psi, tuple(history), 0.0, converged, 0.0, max_dk)
