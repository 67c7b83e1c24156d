"""
Variational ground and excited states on open chains.

One-site alternating least squares: every site solve is the smallest
eigenpair of the effective Hamiltonian in the mixed-canonical gauge,
where the effective overlap matrix is the identity. Excited states are
found by restricting each site solve to the complement of the
directions that would overlap with previously found states.
"""

from typing import NamedTuple, Sequence, Union

import numpy as np

from exceptions import DimensionError, UnsupportedGaugeError
from modules.mpo import (
    HamiltonianSpec,
    MatrixProductOperator,
    as_mpo,
    mpo_expectation,
    mpo_product,
    mpo_scale_shift,
)
from modules.mps import (
    Boundary,
    CanonicalForm,
    MatrixProductState,
    absorb_into_next,
    absorb_into_previous,
    canonicalize,
    left_orthonormalize_site,
    random_mps,
    right_orthonormalize_site,
)
from modules.tensor_core import eig_smallest, orthogonal_complement
from utils.logging import get_logger, log_sweep_event
from utils.seeding import derive_rng

from .environments import EnvironmentCache
from .sweep import (
    GroundStateResult,
    SweepConfig,
    SweepRecord,
    SweepSchedule,
    sweep_converged,
    sweep_spread,
)

logger = get_logger("tnsim.optimize")

MONOTONE_SLACK = 1e-10


class TargetStateResult(NamedTuple):
    state: MatrixProductState
    residual: float
    energy: float
    history: list
    converged: bool


def initial_state(n: int, d: int, bond: int, seed, complex_entries: bool = False) -> MatrixProductState:
    """
    Random normalized right-canonical start.

    Canonicalizing in both directions caps every bond at what the
    Hilbert space on either side can support, so later QR moves keep
    all shapes fixed.
    """
    psi = random_mps(n, d, bond, seed=seed, complex_entries=complex_entries)
    return canonicalize(canonicalize(psi, CanonicalForm.LEFT), CanonicalForm.RIGHT)


def _solve_site(cache: EnvironmentCache, k: int, cfg: SweepConfig) -> float:
    shape = cache.site_shape(k)
    dim = int(np.prod(shape))
    if dim <= cfg.dense_switchover:
        h = cache.effective_matrix(k)
    else:
        h = cache.effective_operator(k)
    constraints = cache.linear_vectors(k)
    projector = None
    if constraints.shape[1]:
        projector = orthogonal_complement(constraints)
        if projector.shape[1] == 0:
            raise DimensionError(f"site {k} has no room left for the orthogonality constraints; raise D")
    pair = eig_smallest(h, projector=projector, v0=cache.sites[k].ravel())
    x = pair.vector / np.linalg.norm(pair.vector)
    cache.sites[k] = x.reshape(shape)
    return float(pair.value)


def eigen_sweeps(
    operator: MatrixProductOperator,
    start: MatrixProductState,
    cfg: SweepConfig,
    orthogonal_to: Sequence[MatrixProductState] = (),
    solver: str = "vmps",
) -> GroundStateResult:
    """
    Minimize <psi|W|psi> / <psi|psi> over open chains of the start's shape.

    Args:
        operator: Hermitian MPO W
        start: Normalized right-canonical starting state
        cfg: Sweep parameters
        orthogonal_to: States the result must stay orthogonal to
        solver: Name used in the sweep log

    Returns:
        GroundStateResult; the state is mixed canonical (center 0 after a
        full schedule, center n - 1 after a single forward pass)
    """
    n = start.n
    sites = list(start.sites)
    cache = EnvironmentCache(sites, quadratic=operator, linear=[(phi, None) for phi in orthogonal_to])
    cache.build_right()

    history = []
    records = []
    converged = False

    def record(value: float) -> None:
        if history and value > history[-1] + MONOTONE_SLACK * max(1.0, abs(history[-1])):
            logger.warning("Site update raised the objective", solver=solver, before=history[-1], after=value)
        history.append(value)

    for sweep in range(cfg.max_sweeps):
        values = []
        for k in range(n - 1):
            value = _solve_site(cache, k, cfg)
            record(value)
            values.append(value)
            q, r = left_orthonormalize_site(sites[k])
            sites[k] = q
            sites[k + 1] = absorb_into_next(r, sites[k + 1])
            cache.advance_left(k)

        if cfg.schedule == SweepSchedule.SINGLE_FORWARD:
            value = _solve_site(cache, n - 1, cfg)
            record(value)
            values.append(value)
            records.append(SweepRecord(sweep, value, sweep_spread(values)))
            log_sweep_event(solver, sweep, value, spread=records[-1].spread, bond=cfg.bond)
            state = start.with_sites(sites, CanonicalForm.MIXED, n - 1)
            return GroundStateResult(value, state, history, True, tuple(records))

        for k in range(n - 1, 0, -1):
            value = _solve_site(cache, k, cfg)
            record(value)
            values.append(value)
            l, q = right_orthonormalize_site(sites[k])
            sites[k] = q
            sites[k - 1] = absorb_into_previous(sites[k - 1], l)
            cache.advance_right(k)

        records.append(SweepRecord(sweep, values[-1], sweep_spread(values)))
        log_sweep_event(solver, sweep, values[-1], spread=records[-1].spread, bond=cfg.bond)
        if sweep_converged(values, cfg.precision):
            converged = True
            break

    if not converged:
        logger.warning("Sweeps did not converge", solver=solver, sweeps=cfg.max_sweeps,
                       spread=records[-1].spread)
    state = start.with_sites(sites, CanonicalForm.MIXED, 0)
    return GroundStateResult(history[-1], state, history, converged, tuple(records))


def _check_constraints(n: int, d: int, orthogonal_to: Sequence[MatrixProductState]) -> None:
    for phi in orthogonal_to:
        if phi.n != n or phi.phys_dims != (d,) * n:
            raise DimensionError(f"constraint state has shape n={phi.n}, d={phi.phys_dims}; expected n={n}, d={d}")
        if phi.boundary != Boundary.OPEN:
            raise UnsupportedGaugeError("orthogonality constraints must be open chains")


def vmps_ground(
    spec: Union[HamiltonianSpec, MatrixProductOperator],
    cfg: SweepConfig,
    orthogonal_to: Sequence[MatrixProductState] = (),
) -> GroundStateResult:
    """
    Ground state (or the lowest state orthogonal to the given ones).

    Args:
        spec: Open-boundary Hamiltonian (term list or MPO)
        cfg: Sweep parameters (bond, precision, schedule, seed)
        orthogonal_to: Previously found states to project out

    Returns:
        GroundStateResult(energy, state, history, converged, sweeps)

    Raises:
        UnsupportedGaugeError: For periodic specs (use vmps_ground_pbc)
    """
    if isinstance(spec, HamiltonianSpec) and spec.boundary != Boundary.OPEN:
        raise UnsupportedGaugeError("vmps_ground needs an open chain; use vmps_ground_pbc")
    operator = as_mpo(spec)
    n, d = operator.n, operator.in_dims[0]
    _check_constraints(n, d, orthogonal_to)
    complex_entries = isinstance(spec, HamiltonianSpec) and not spec.is_real()
    start = initial_state(n, d, cfg.bond, derive_rng(cfg.seed, 0, len(orthogonal_to)), complex_entries)
    result = eigen_sweeps(operator, start, cfg, orthogonal_to)
    logger.info("Variational ground state finished", energy=result.energy, converged=result.converged,
                sweeps=len(result.sweeps), constraints=len(orthogonal_to))
    return result


def lowest_states(spec: Union[HamiltonianSpec, MatrixProductOperator], cfg: SweepConfig,
                  count: int) -> list:
    """The `count` lowest states found one after another."""
    found = []
    for _ in range(count):
        found.append(vmps_ground(spec, cfg, [r.state for r in found]))
    return found


def target_energy_state(
    spec: Union[HamiltonianSpec, MatrixProductOperator],
    target_energy: float,
    cfg: SweepConfig,
) -> TargetStateResult:
    """
    State minimizing <(H - E_sp)^2>, i.e. the eigenstate closest to E_sp.

    Returns:
        TargetStateResult(state, residual=<(H - E_sp)^2>, energy=<H>, history, converged)
    """
    operator = as_mpo(spec)
    shifted = mpo_scale_shift(operator, 1.0, -target_energy)
    squared = mpo_product(shifted, shifted)
    n, d = operator.n, operator.in_dims[0]
    start = initial_state(n, d, cfg.bond, derive_rng(cfg.seed, 0, 0))
    result = eigen_sweeps(squared, start, cfg, solver="vmps_target")
    energy = float(mpo_expectation(result.state, operator).real)
    return TargetStateResult(result.state, max(result.energy, 0.0), energy, result.history, result.converged)
