"""
Alternating least squares for quadratic-plus-linear objectives.

Minimizes F(x) = <x|W|x> - 2 Re <x|b> over open chains of fixed bond,
where b = sum_c coefficient_c * O_c |phi_c>. The minimum of F is
-<b|W^-1|b>; with W = identity it is -<b|b> and the optimum is the best
bond-D approximation of b.
"""

from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse.linalg import minres

from config import settings
from exceptions import DimensionError
from modules.mpo import MatrixProductOperator
from modules.mps import (
    CanonicalForm,
    MatrixProductState,
    absorb_into_next,
    absorb_into_previous,
    left_orthonormalize_site,
    right_orthonormalize_site,
)
from modules.tensor_core import solve_hermitian
from utils.logging import get_logger, log_sweep_event

from .environments import EnvironmentCache
from .sweep import SweepConfig, SweepRecord, sweep_converged, sweep_spread

logger = get_logger("tnsim.optimize.linear")

LinearChannel = Tuple[MatrixProductState, Optional[MatrixProductOperator], complex]


class QuadraticResult(NamedTuple):
    state: MatrixProductState
    value: float
    history: List[float]
    converged: bool
    sweeps: List[SweepRecord]


def _site_vector(cache: EnvironmentCache, coefficients: Sequence[complex], k: int) -> np.ndarray:
    b = np.zeros(int(np.prod(cache.site_shape(k))), dtype=np.complex128)
    for index, coefficient in enumerate(coefficients):
        b += coefficient * cache.linear_vector(index, k)
    return b


def _solve_site(cache: EnvironmentCache, coefficients: Sequence[complex], k: int) -> float:
    shape = cache.site_shape(k)
    b = _site_vector(cache, coefficients, k)
    if cache.quadratic is None:
        x = b
    elif b.size <= settings.eig_dense_max_dim * 4:
        x = solve_hermitian(cache.effective_matrix(k), b)
    else:
        x, info = minres(cache.effective_operator(k), b, x0=cache.sites[k].ravel(), rtol=1e-12)
        if info != 0:
            logger.warning("Iterative site solve stopped early", site=k, info=info)
    cache.sites[k] = np.reshape(x, shape)
    # at the site optimum <x|W|x> = Re <x|b>
    return float(-np.vdot(x, b).real)


def minimize_quadratic(
    quadratic: Optional[MatrixProductOperator],
    linear: Sequence[LinearChannel],
    start: MatrixProductState,
    cfg: SweepConfig,
    solver: str = "als_linear",
) -> QuadraticResult:
    """
    Sweep single-site solves W_eff x = b_eff until the objective settles.

    Args:
        quadratic: Hermitian positive MPO W (None for the identity)
        linear: (phi, operator or None, coefficient) channels forming b
        start: Right-canonical starting state (its norm is irrelevant)
        cfg: Sweep parameters; bond is taken from the start state

    Returns:
        QuadraticResult with the last objective value F
    """
    if not linear:
        raise DimensionError("the linear term needs at least one channel")
    n = start.n
    sites = list(start.sites)
    cache = EnvironmentCache(sites, quadratic=quadratic, linear=[(phi, op) for phi, op, _ in linear])
    coefficients = [c for _, _, c in linear]
    cache.build_right()

    history: List[float] = []
    records: List[SweepRecord] = []
    converged = False
    if n == 1:
        value = _solve_site(cache, coefficients, 0)
        return QuadraticResult(start.with_sites(sites), value, [value], True, [])

    for sweep in range(cfg.max_sweeps):
        values = []
        for k in range(n - 1):
            values.append(_solve_site(cache, coefficients, k))
            q, r = left_orthonormalize_site(sites[k])
            sites[k] = q
            sites[k + 1] = absorb_into_next(r, sites[k + 1])
            cache.advance_left(k)
        for k in range(n - 1, 0, -1):
            values.append(_solve_site(cache, coefficients, k))
            l, q = right_orthonormalize_site(sites[k])
            sites[k] = q
            sites[k - 1] = absorb_into_previous(sites[k - 1], l)
            cache.advance_right(k)
        history.extend(values)
        records.append(SweepRecord(sweep, values[-1], sweep_spread(values)))
        log_sweep_event(solver, sweep, values[-1], spread=records[-1].spread)
        if sweep_converged(values, cfg.precision):
            converged = True
            break

    if not converged:
        logger.warning("Linear sweeps did not converge", solver=solver, sweeps=cfg.max_sweeps)
    state = start.with_sites(sites, CanonicalForm.MIXED, 0)
    return QuadraticResult(state, history[-1], history, converged, records)
