"""
Variational ground states of periodic chains.

Without an orthogonality center the effective overlap matrix N_eff is a
general positive matrix. Each site solve approximates N_eff by the
product N_left x N_right of its best rank-one operator-space term,
changes variables with the inverse square roots of both factors and
solves the well-conditioned generalized problem that remains.

The ring is cut between the last and the first site; partial transfer
products on both sides of the cut are cached and extended one site at a
time, so one sweep costs O(N d D^5) in transfer steps plus the dense
site solves.
"""

from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from opt_einsum import contract
from scipy import linalg as sla

from exceptions import ConditioningError, DimensionError, UnsupportedGaugeError
from modules.mpo import HamiltonianSpec, MatrixProductOperator, nn_hamiltonian_mpo
from modules.mps import Boundary, norm_squared, random_mps
from modules.mps.transfer import left_start, left_step, right_start, right_step
from modules.tensor_core import eig_smallest, project_psd
from utils.logging import get_logger, log_sweep_event
from utils.seeding import derive_rng

from .sweep import GroundStateResult, SweepConfig, SweepRecord, sweep_converged, sweep_spread

logger = get_logger("tnsim.optimize.periodic")

RIDGE_SWEEPS = 2
RIDGE_FACTOR = 1e-8
FACTOR_FLOOR = 1e-12


class SiteProblem(NamedTuple):
    h: np.ndarray
    n: np.ndarray


class RingEnvironments:
    """
    Partial transfer products of a ring cut between sites n - 1 and 0.

    left[k] holds sites < k as (P, bonds left of k) and right[k] holds
    sites >= k as (bonds left of k, P), with P the bonds at the cut. The
    environment of site k glues right[k + 1] to left[k] over P, so a
    sweep extends them one site at a time like the open-chain cache.
    """

    def __init__(self, sites: List[np.ndarray], layer: Optional[Sequence[np.ndarray]] = None):
        self.sites = sites
        self.layer = layer
        self.n = len(sites)
        self.left: List[Optional[np.ndarray]] = [None] * self.n
        self.right: List[Optional[np.ndarray]] = [None] * (self.n + 1)
        self.left[0] = left_start(sites[0], sites[0], self._ops(0))
        self.right[self.n] = right_start(sites[-1], sites[-1], self._ops(self.n - 1))

    def _ops(self, k: int) -> List[np.ndarray]:
        return [] if self.layer is None else [self.layer[k]]

    def extend_left(self, k: int) -> None:
        """left[k + 1] from left[k] and the current site k."""
        self.left[k + 1] = left_step(self.left[k], self.sites[k], self.sites[k], self._ops(k))

    def extend_right(self, k: int) -> None:
        """right[k] from right[k + 1] and the current site k."""
        self.right[k] = right_step(self.right[k + 1], self.sites[k], self.sites[k], self._ops(k))

    def build_right(self, stop: int = 1) -> None:
        for k in range(self.n - 1, stop - 1, -1):
            self.extend_right(k)

    def environment(self, k: int) -> np.ndarray:
        """Transfer of every site but k, as env[(right bonds of k), (left bonds of k)]."""
        left, right = self.left[k], self.right[k + 1]
        if left is None or right is None:
            raise DimensionError(f"ring environment of site {k} has not been built")
        cut = left.shape[0]
        return right.reshape(-1, cut) @ left.reshape(cut, -1)

    @classmethod
    def around(cls, sites: List[np.ndarray], layer: Optional[Sequence[np.ndarray]], k: int) -> "RingEnvironments":
        """Fresh environments holding exactly what site k needs."""
        envs = cls(sites, layer)
        envs.build_right(k + 1)
        for j in range(k):
            envs.extend_left(j)
        return envs


def site_problem(
    sites: List[np.ndarray],
    mpo: MatrixProductOperator,
    k: int,
    envs: Optional[Tuple[RingEnvironments, RingEnvironments]] = None,
) -> SiteProblem:
    """Dense H_eff and N_eff of site k on a ring; envs are the (H, norm) caches when sweeping."""
    dl, dr, d = sites[k].shape
    dim = dl * dr * d
    w = mpo.sites[k]
    if envs is None:
        envs = (RingEnvironments.around(sites, mpo.sites, k), RingEnvironments.around(sites, None, k))
    h_envs, n_envs = envs
    h_env = h_envs.environment(k).reshape(dr, w.shape[1], dr, dl, w.shape[0], dl)
    h = contract("evcawb,wvst->aesbct", h_env, w).reshape(dim, dim)
    n_env = n_envs.environment(k).reshape(dr, dr, dl, dl)
    n = contract("ecab,st->aesbct", n_env, np.eye(d)).reshape(dim, dim)
    return SiteProblem(0.5 * (h + h.conj().T), 0.5 * (n + n.conj().T))


def _inverse_sqrt(m: np.ndarray) -> np.ndarray:
    projected = project_psd(m).matrix
    w, v = np.linalg.eigh(projected)
    floor = FACTOR_FLOOR * max(float(w.max()), FACTOR_FLOOR)
    w = np.maximum(w, floor)
    return (v / np.sqrt(w)) @ v.conj().T


def _hermitian_factor(m: np.ndarray) -> np.ndarray:
    """Fix the free phase of a rank-one factor so it is Hermitian with positive trace."""
    trace = np.trace(m)
    if abs(trace) > 0:
        m = m * (abs(trace) / trace)
    return 0.5 * (m + m.conj().T)


def conditioning_transform(n_eff: np.ndarray, dl: int, dr: int, d: int) -> np.ndarray:
    """
    G = N_left^-1/2 x N_right^-1/2 x I from the leading product term of N_eff.

    N_eff[(a, e, s), (b, c, t)] = sum_k N1_k[a, b] N2_k[e, c] delta_st.
    """
    tensor = n_eff.reshape(dl, dr, d, dl, dr, d)[:, :, 0, :, :, 0]
    blocks = tensor.transpose(0, 2, 1, 3).reshape(dl * dl, dr * dr)
    u, s, vh = np.linalg.svd(blocks, full_matrices=False)
    left = _hermitian_factor(u[:, 0].reshape(dl, dl) * np.sqrt(s[0]))
    right = _hermitian_factor(vh[0].reshape(dr, dr) * np.sqrt(s[0]))
    return np.kron(np.kron(_inverse_sqrt(left), _inverse_sqrt(right)), np.eye(d))


def _solve_conditioned(problem: SiteProblem, g: np.ndarray, ridge: float, v0: np.ndarray):
    h_red = g.conj().T @ problem.h @ g
    n_red = g.conj().T @ problem.n @ g
    n_red = 0.5 * (n_red + n_red.conj().T)
    dim = n_red.shape[0]
    if ridge > 0:
        n_red = n_red + ridge * np.trace(n_red).real / dim * np.eye(dim)
    y0 = np.linalg.lstsq(g, v0, rcond=None)[0]
    pair = eig_smallest(0.5 * (h_red + h_red.conj().T), n_red, v0=y0)
    return pair.value, g @ pair.vector


def _site_update(sites, mpo, k: int, ridge: float, caches=None):
    dl, dr, d = sites[k].shape
    problem = site_problem(sites, mpo, k, caches)
    g = conditioning_transform(problem.n, dl, dr, d)
    v0 = sites[k].ravel()
    try:
        return _solve_conditioned(problem, g, ridge, v0)
    except ConditioningError as first:
        retry_ridge = max(ridge, RIDGE_FACTOR)
        logger.warning("Regularizing ill-conditioned site metric", site=k, ridge=retry_ridge,
                       smallest_eigenvalue=first.smallest_eigenvalue)
        try:
            return _solve_conditioned(problem, g, retry_ridge, v0)
        except ConditioningError as second:
            smallest = float(sla.eigvalsh(problem.n)[0])
            raise ConditioningError(
                f"effective overlap matrix at site {k} stays ill-conditioned after regularization",
                smallest_eigenvalue=smallest,
                site=k,
                ridge=retry_ridge,
                conditioned_smallest=second.smallest_eigenvalue,
            ) from second


def _shift_gauge_right(sites, k: int) -> None:
    """QR site k and push R into site k + 1 (a pure gauge change on the ring)."""
    dl, dr, d = sites[k].shape
    q, r = np.linalg.qr(sites[k].transpose(0, 2, 1).reshape(dl * d, dr))
    if q.shape[1] != dr:
        return
    sites[k] = q.reshape(dl, d, dr).transpose(0, 2, 1)
    sites[k + 1] = np.einsum("ab,bcs->acs", r, sites[k + 1])


def vmps_ground_pbc(
    spec: Union[HamiltonianSpec, MatrixProductOperator],
    cfg: SweepConfig,
) -> GroundStateResult:
    """
    Ground state of a periodic chain with conditioned generalized site solves.

    A ridge of 1e-8 tr(N)/dim is added to the site metric during the
    first two sweeps and dropped afterwards.

    Raises:
        UnsupportedGaugeError: If the spec is not periodic
        ConditioningError: If a site metric stays ill-conditioned after regularization
    """
    if isinstance(spec, HamiltonianSpec):
        if spec.boundary != Boundary.PERIODIC:
            raise UnsupportedGaugeError("vmps_ground_pbc needs a periodic chain")
        mpo = nn_hamiltonian_mpo(spec)
        complex_entries = not spec.is_real()
    else:
        mpo = spec
        complex_entries = False
    n, d = mpo.n, mpo.in_dims[0]
    if n < 3:
        raise DimensionError("periodic chains need at least 3 sites")

    psi = random_mps(n, d, cfg.bond, Boundary.PERIODIC, derive_rng(cfg.seed, 0, 0), complex_entries)
    psi = psi.scaled(1.0 / np.sqrt(norm_squared(psi)))
    sites: List[np.ndarray] = list(psi.sites)

    history: List[float] = []
    records: List[SweepRecord] = []
    converged = False
    order = list(range(n)) + list(range(n - 2, 0, -1))
    caches = (RingEnvironments(sites, mpo.sites), RingEnvironments(sites))
    for sweep in range(cfg.max_sweeps):
        ridge = RIDGE_FACTOR if sweep < RIDGE_SWEEPS else 0.0
        values = []
        for cache in caches:
            cache.build_right()
        for step, k in enumerate(order):
            value, x = _site_update(sites, mpo, k, ridge, caches)
            sites[k] = x.reshape(sites[k].shape)
            values.append(value)
            if step < n - 1:
                _shift_gauge_right(sites, k)
            for cache in caches:
                if step < n - 1:
                    cache.extend_left(k)
                else:
                    cache.extend_right(k)
        history.extend(values)
        records.append(SweepRecord(sweep, values[-1], sweep_spread(values)))
        log_sweep_event("vmps_pbc", sweep, values[-1], spread=records[-1].spread, bond=cfg.bond)
        if sweep >= RIDGE_SWEEPS and sweep_converged(values, cfg.precision):
            converged = True
            break

    if not converged:
        logger.warning("Periodic sweeps did not converge", sweeps=cfg.max_sweeps)
    state = psi.with_sites(sites)
    state = state.scaled(1.0 / np.sqrt(norm_squared(state)))
    return GroundStateResult(history[-1], state, history, converged, tuple(records))
