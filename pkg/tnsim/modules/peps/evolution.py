"""
Trotterized time evolution of PEPS.

The lattice bonds fall into four non-overlapping parts (horizontal bonds
starting in an even / odd column, vertical bonds starting in an even /
odd row). Site fields are shared evenly between the incident bonds, so
every gate is exp(-tau h_bond) on a pair of neighbours. Applying a part
grows each of its bonds by the operator-Schmidt rank eta of the gate; the
grown state B is then reduced back to bond D: first by a Schmidt
decomposition of each grown bond, then by alternating least squares on
the fit distance

    K = ||C - B||^2 / ||B||^2,

where each site solve is N_i c = W_i with N_i the environment of <C|C>
and W_i the environment of <C|B> contracted with B. <B|B> is taken as
<psi| G^dag G |psi>, so every double layer pairs at most one grown
state. K is never clipped: a negative value means the boundaries are too
coarse and the sub-step is refitted with a larger Dtilde.
"""

from dataclasses import dataclass, field
from utils.compat import StrEnum
from typing import Dict, List, Mapping, NamedTuple, Optional, Tuple, Union

import numpy as np
import scipy.linalg

from exceptions import ConditioningError, DimensionError, DomainError, InvalidSchemeError
from modules.apps import contract_grid
from modules.evolve import EvolutionMode
from modules.mpo import HamiltonianSpec
from modules.tensor_core import operator_schmidt, project_psd, truncated_svd
from utils.logging import get_logger, log_compression_event

from .environment import (
    OperatorMap,
    Position,
    Sandwich,
    SweepEnvironments,
    layer_grid,
    snake_order,
    split_environment,
)
from .expectation import check_lattice, default_dtilde, normalized, peps_expectation, particle_number
from .state import Peps

logger = get_logger("tnsim.peps.evolution")

SUPPORT_CUTOFF = 1e-10
K_TOLERANCE = 1e-8
DTILDE_GROWTH = 2.0
Bond = Tuple[Position, Position]


class LatticePart(StrEnum):
    HORIZONTAL_EVEN = "horizontal_even"
    HORIZONTAL_ODD = "horizontal_odd"
    VERTICAL_EVEN = "vertical_even"
    VERTICAL_ODD = "vertical_odd"


class BondTerm(NamedTuple):
    bond: Bond
    hamiltonian: np.ndarray


class PepsStepResult(NamedTuple):
    state: Peps
    fit_distance: float
    sub_step_distances: Tuple[float, ...]
    site_distances: Tuple[Tuple[float, ...], ...]
    max_delta_k: float


def lattice_bonds(rows: int, cols: int) -> Dict[LatticePart, List[Bond]]:
    parts = {part: [] for part in LatticePart}
    for i in range(rows):
        for j in range(cols):
            if j + 1 < cols:
                part = LatticePart.HORIZONTAL_EVEN if j % 2 == 0 else LatticePart.HORIZONTAL_ODD
                parts[part].append(((i, j), (i, j + 1)))
            if i + 1 < rows:
                part = LatticePart.VERTICAL_EVEN if i % 2 == 0 else LatticePart.VERTICAL_ODD
                parts[part].append(((i, j), (i + 1, j)))
    return parts


def four_part_hamiltonians(spec: HamiltonianSpec) -> Dict[LatticePart, List[BondTerm]]:
    """
    Bond Hamiltonians of the four lattice parts.

    Each field h_k enters every bond touching site k as h_k / deg(k).

    Raises:
        DimensionError: For a single-site lattice
    """
    rows, cols = spec.lattice
    if rows * cols < 2:
        raise DimensionError("PEPS evolution needs at least two sites")
    parts = lattice_bonds(rows, cols)
    degree = np.zeros(rows * cols, dtype=int)
    for bonds in parts.values():
        for a, b in bonds:
            degree[a[0] * cols + a[1]] += 1
            degree[b[0] * cols + b[1]] += 1
    eye = np.eye(spec.d)
    terms = {}
    for part, bonds in parts.items():
        terms[part] = []
        for a, b in bonds:
            ka, kb = a[0] * cols + a[1], b[0] * cols + b[1]
            h = (spec.bond_operator(ka, kb)
                 + np.kron(spec.site_operator(ka) / degree[ka], eye)
                 + np.kron(eye, spec.site_operator(kb) / degree[kb]))
            terms[part].append(BondTerm((a, b), h))
    return terms


def part_sequence(order: int) -> List[Tuple[LatticePart, float]]:
    """Parts and time fractions of one step (order 2 is the symmetric splitting)."""
    parts = list(LatticePart)
    if order == 1:
        return [(p, 1.0) for p in parts]
    if order == 2:
        half = [(p, 0.5) for p in parts[:-1]]
        return half + [(parts[-1], 1.0)] + half[::-1]
    raise InvalidSchemeError(f"Trotter order must be 1 or 2, got {order}")


def _is_horizontal(bond: Bond) -> bool:
    return bond[0][0] == bond[1][0]


def apply_gate(psi: Peps, bond: Bond, gate: np.ndarray) -> Peps:
    """Exact two-site gate; the bond grows by the gate's operator-Schmidt rank."""
    (i, j), (k, l) = bond
    a, b = psi.site(i, j), psi.site(k, l)
    d_a, d_b = a.shape[0], b.shape[0]
    lefts, rights = operator_schmidt(gate, d_a, d_b)
    eta = len(lefts)
    if _is_horizontal(bond):
        new_a = np.einsum("cst,tlrud->slrcud", lefts, a)
        new_a = new_a.reshape(d_a, a.shape[1], a.shape[2] * eta, a.shape[3], a.shape[4])
        new_b = np.einsum("cst,tlrud->slcrud", rights, b)
        new_b = new_b.reshape(d_b, b.shape[1] * eta, b.shape[2], b.shape[3], b.shape[4])
    else:
        new_a = np.einsum("cst,tlrud->slrudc", lefts, a)
        new_a = new_a.reshape(d_a, a.shape[1], a.shape[2], a.shape[3], a.shape[4] * eta)
        new_b = np.einsum("cst,tlrud->slrucd", rights, b)
        new_b = new_b.reshape(d_b, b.shape[1], b.shape[2], b.shape[3] * eta, b.shape[4])
    return psi.with_sites({(i, j): new_a, (k, l): new_b})


def bond_extent(psi: Peps, bond: Bond) -> int:
    (i, j), _ = bond
    site = psi.site(i, j)
    return site.shape[2] if _is_horizontal(bond) else site.shape[4]


def joint_bond_matrix(psi: Peps, bond: Bond) -> np.ndarray:
    """M = A B over the shared bond, rows = all other indices of A, columns = those of B."""
    (i, j), (k, l) = bond
    a, b = psi.site(i, j), psi.site(k, l)
    if _is_horizontal(bond):
        left = a.transpose(0, 1, 3, 4, 2).reshape(-1, a.shape[2])
        right = b.transpose(1, 0, 2, 3, 4).reshape(b.shape[1], -1)
    else:
        left = a.reshape(-1, a.shape[4])
        right = b.transpose(3, 0, 1, 2, 4).reshape(b.shape[3], -1)
    return left @ right


def schmidt_reduce(psi: Peps, bond: Bond, bond_dim: int) -> Tuple[Peps, float]:
    """bond_schmidt_reduce plus the discarded squared Schmidt weight of M."""
    if bond_extent(psi, bond) <= bond_dim:
        return psi, 0.0
    (i, j), (k, l) = bond
    a, b = psi.site(i, j), psi.site(k, l)
    (u, s, v), discarded = truncated_svd(joint_bond_matrix(psi, bond), bond_dim)
    root = np.sqrt(s)
    left, right = u * root[None, :], root[:, None] * v
    kept = len(s)
    if _is_horizontal(bond):
        new_a = left.reshape(a.shape[0], a.shape[1], a.shape[3], a.shape[4], kept).transpose(0, 1, 4, 2, 3)
        new_b = right.reshape(kept, b.shape[0], b.shape[2], b.shape[3], b.shape[4]).transpose(1, 0, 2, 3, 4)
    else:
        new_a = left.reshape(a.shape[:4] + (kept,))
        new_b = right.reshape(kept, b.shape[0], b.shape[1], b.shape[2], b.shape[4]).transpose(1, 2, 3, 0, 4)
    return psi.with_sites({(i, j): new_a, (k, l): new_b}), discarded


def bond_schmidt_reduce(psi: Peps, bond: Bond, bond_dim: int) -> Peps:
    """
    Cut one bond to extent D by the Schmidt decomposition of the joint tensor.

    The two tensors become the sqrt(c)-weighted Schmidt factors of the D
    largest coefficients; a bond already of extent <= D is left alone.
    """
    return schmidt_reduce(psi, bond, bond_dim)[0]


@dataclass(frozen=True)
class GatedPeps:
    """
    B = prod_b g_b |base> for gates on disjoint bonds.

    <B|B> = <base| prod_b g_b^dag g_b |base> needs only one grown layer, so
    no double layer of two grown states is ever contracted.
    """

    base: Peps
    gates: Tuple[Tuple[Bond, np.ndarray], ...]

    def state(self) -> Peps:
        grown = self.base
        for bond, gate in self.gates:
            grown = apply_gate(grown, bond, gate)
        return grown

    def norm_ket(self) -> Peps:
        ket = self.base
        for bond, gate in self.gates:
            ket = apply_gate(ket, bond, gate.conj().T @ gate)
        return ket


@dataclass
class FitResult:
    state: Peps
    distance: float
    site_distances: List[float] = field(default_factory=list)
    max_delta_k: float = 0.0
    dtilde: int = 0


def _ratio(numerator: Tuple[float, complex, object], log_denominator: float) -> complex:
    log_value, phase, _ = numerator
    return phase * np.exp(log_value - log_denominator)


def fit_peps(
    target: Union[Peps, GatedPeps],
    initial: Peps,
    dtilde: int,
    max_sweeps: int = 4,
    precision: float = 1e-10,
) -> FitResult:
    """
    Alternating least squares for min ||C - B||^2 over the bonds of `initial`.

    Every site solve is scaled by the same <B|B>; the reported distance
    K = 1 + <C|C> / <B|B> - 2 Re <C|B> / <B|B> is contracted afresh after
    the sweeps with the same Dtilde. Site values are the local estimates
    1 - w^dag N^+ w and are not clipped.

    Returns:
        FitResult; a negative distance means the environments are
        inconsistent at this Dtilde

    Raises:
        DomainError: If <B|B> is not positive
    """
    if isinstance(target, GatedPeps):
        goal, norm_layers = target.state(), layer_grid(target.base, target.norm_ket())
    else:
        goal, norm_layers = target, layer_grid(target, target)
    log_bb, phase, run = contract_grid(norm_layers, dtilde)
    if not np.isfinite(log_bb) or phase.real <= 0.0:
        raise DomainError("cannot fit to a zero-norm PEPS")
    log_bb += float(np.log(phase.real))
    self_sandwich, cross_sandwich = Sandwich(), Sandwich(ket=goal)
    sweeps = SweepEnvironments([self_sandwich, cross_sandwich], dtilde, stage="peps_fit")
    sweeps.delta_ks.extend(run.delta_ks)
    psi = initial
    result = FitResult(psi, np.inf, dtilde=dtilde)
    previous = np.inf
    for sweep in range(max_sweeps):
        sweeps.start_sweep(psi)
        last = previous
        for i, j in snake_order(psi.rows, psi.cols):
            while sweeps.row < i:
                sweeps.advance(psi)
            (env_cc, scale_cc), (env_cb, scale_cb) = sweeps.holes(psi, j)
            site, source = psi.site(i, j), goal.site(i, j)
            n_env = split_environment(env_cc, site.shape, site.shape) * np.exp(scale_cc - log_bb)
            n_matrix = np.einsum("LlRrUuDd,st->sLRUDtlrud", n_env, np.eye(site.shape[0]))
            n_matrix = n_matrix.reshape(site.size, site.size)
            w_env = split_environment(env_cb, site.shape, source.shape) * np.exp(scale_cb - log_bb)
            w = np.einsum("LlRrUuDd,slrud->sLRUD", w_env, source).ravel()
            projection = project_psd(n_matrix)
            values, vectors = scipy.linalg.eigh(projection.matrix)
            keep = values > SUPPORT_CUTOFF * max(values[-1], 0.0)
            if not np.any(keep):
                continue
            c = vectors[:, keep] @ ((vectors[:, keep].conj().T @ w) / values[keep])
            last = 1.0 - float(np.vdot(w, c).real)
            result.site_distances.append(last)
            psi = psi.with_sites({(i, j): c.reshape(site.shape)})
        if abs(previous - last) <= precision * max(abs(last), 1e-12) or abs(last) < 1e-14:
            break
        previous = last

    cc = contract_grid(layer_grid(psi, psi), dtilde)
    cb = contract_grid(layer_grid(psi, goal), dtilde)
    sweeps.delta_ks.extend(cc[2].delta_ks + cb[2].delta_ks)
    distance = 1.0 + _ratio(cc, log_bb).real - 2.0 * _ratio(cb, log_bb).real
    result.state, result.distance = psi, float(distance)
    result.max_delta_k = sweeps.max_delta_k
    return result


def conditioned_fit(
    target: GatedPeps,
    initial: Peps,
    dtilde: int,
    max_sweeps: int,
    precision: float,
    dtilde_growth: float = DTILDE_GROWTH,
    max_dtilde: Optional[int] = None,
) -> FitResult:
    """
    fit_peps, raising Dtilde by dtilde_growth while K comes out negative.

    Raises:
        ConditioningError: If K stays negative at max_dtilde
    """
    if dtilde_growth <= 1.0:
        raise DomainError(f"Dtilde growth must be > 1, got {dtilde_growth}")
    max_dtilde = int(np.ceil(dtilde_growth ** 2 * dtilde)) if max_dtilde is None else max(max_dtilde, dtilde)
    while True:
        fit = fit_peps(target, initial, dtilde, max_sweeps, precision)
        if fit.distance >= -K_TOLERANCE:
            return fit
        if dtilde >= max_dtilde:
            raise ConditioningError(
                f"fit distance {fit.distance:.3e} is negative at Dtilde = {dtilde}",
                max_delta_k=fit.max_delta_k,
                dtilde=dtilde,
            )
        dtilde = min(max_dtilde, int(np.ceil(dtilde_growth * dtilde)))
        logger.warning("Negative fit distance; raising Dtilde", distance=fit.distance,
                       max_delta_k=fit.max_delta_k, dtilde=dtilde)


def peps_evolve_step(
    psi: Peps,
    spec: HamiltonianSpec,
    dt: float,
    mode: EvolutionMode,
    bond: int,
    dtilde: Optional[int] = None,
    order: int = 2,
    fit_sweeps: int = 4,
    fit_precision: float = 1e-10,
    dtilde_growth: float = DTILDE_GROWTH,
    max_dtilde: Optional[int] = None,
) -> PepsStepResult:
    """
    One Trotter step exp(-tau H) with tau = i dt (real) or dt (imaginary).

    Every part is applied exactly and then reduced back to bond D; the fit
    distance K of each sub-step is reported. Sub-steps that do not push
    any bond beyond D are exact (K = 0).

    Args:
        psi: Current state
        spec: Nearest-neighbour Hamiltonian on the state's lattice
        dt: Time step >= 0
        mode: REAL or IMAGINARY
        bond: Target bond dimension D
        dtilde: Boundary bond of the fit environments (default D^2)
        order: 1 (plain product of the four parts) or 2 (symmetric)
        fit_sweeps: ALS sweep limit per sub-step
        fit_precision: Relative change of K ending the ALS sweeps
        dtilde_growth: Factor applied to Dtilde when K comes out negative
        max_dtilde: Limit of that increase (default dtilde_growth^2 * Dtilde)

    Returns:
        PepsStepResult; imaginary-time states are returned unnormalized

    Raises:
        ConditioningError: If a sub-step's K stays negative at max_dtilde
    """
    if dt < 0:
        raise DomainError(f"time step must be >= 0, got {dt}")
    check_lattice(spec, psi)
    mode = EvolutionMode(mode)
    dtilde = default_dtilde(bond) if dtilde is None else dtilde
    tau = 1j * dt if mode == EvolutionMode.REAL else dt
    parts = four_part_hamiltonians(spec)

    distances, site_distances, max_dk = [], [], 0.0
    for part, fraction in part_sequence(order):
        terms = parts[part]
        if not terms:
            continue
        target = GatedPeps(psi, tuple((term.bond, scipy.linalg.expm(-tau * fraction * term.hamiltonian))
                                      for term in terms))
        grown = target.state()
        start, discarded = grown, 0.0
        for term in terms:
            start, dropped = schmidt_reduce(start, term.bond, bond)
            discarded += dropped
        if start is grown:
            psi = grown
            distances.append(0.0)
            site_distances.append(())
            continue
        fit = conditioned_fit(target, start, dtilde, fit_sweeps, fit_precision, dtilde_growth, max_dtilde)
        log_compression_event(f"peps_{part}", fit.distance, bond, schmidt_discarded=discarded, dtilde=fit.dtilde)
        psi = fit.state
        distances.append(fit.distance)
        site_distances.append(tuple(fit.site_distances))
        max_dk = max(max_dk, fit.max_delta_k)
    return PepsStepResult(psi, max(distances, default=0.0), tuple(distances), tuple(site_distances), max_dk)


@dataclass
class PepsTrajectoryRow:
    time: float
    fit_distance: float
    values: Dict[str, float]
    particle_number: Optional[float] = None
    max_delta_k: float = 0.0


def peps_time_evolution(
    psi: Peps,
    spec: HamiltonianSpec,
    dt: float,
    steps: int,
    bond: int,
    mode: EvolutionMode = EvolutionMode.REAL,
    dtilde: Optional[int] = None,
    observables: Optional[Mapping[str, OperatorMap]] = None,
    track_particles: bool = False,
    order: int = 2,
    fit_sweeps: int = 4,
) -> Tuple[Peps, List[PepsTrajectoryRow]]:
    """
    Repeated peps_evolve_step with measurements after every step.

    The first row describes the initial state (time 0, K = 0). Imaginary
    time states are renormalized after each step.
    """
    dtilde = default_dtilde(bond) if dtilde is None else dtilde
    observables = observables or {}

    def measure(state: Peps, time: float, distance: float, delta_k: float) -> PepsTrajectoryRow:
        values = {name: float(peps_expectation(state, ops, dtilde).value.real) for name, ops in observables.items()}
        count = particle_number(state, dtilde) if track_particles else None
        return PepsTrajectoryRow(time, distance, values, count, delta_k)

    rows = [measure(psi, 0.0, 0.0, 0.0)]
    for step in range(1, steps + 1):
        result = peps_evolve_step(psi, spec, dt, mode, bond, dtilde, order=order, fit_sweeps=fit_sweeps)
        psi = result.state
        if mode == EvolutionMode.IMAGINARY:
            psi = normalized(psi, dtilde)
        rows.append(measure(psi, step * dt, result.fit_distance, result.max_delta_k))
        logger.debug("PEPS step", step=step, fit_distance=result.fit_distance, max_delta_k=result.max_delta_k)
    if track_particles:
        drift = max(abs(r.particle_number - rows[0].particle_number) for r in rows)
        logger.info("Particle number drift", drift=drift, bond=bond, steps=steps)
    return psi, rows
