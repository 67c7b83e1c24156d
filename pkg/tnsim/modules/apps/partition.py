"""
Partition functions as two-dimensional tensor networks.

Classical lattices: every bond Boltzmann matrix exp(-beta e(s, s')) is
split by an SVD into f(s) . g(s'), and the per-site tensor

    X[l, r, u, d] = sum_s w(s) O(s) g_left[l, s] f_right[s, r] g_up[u, s] f_down[s, d]

collects the halves of its four bonds (extent 1 on open edges). The
first row is a boundary MPS, the following rows are MPOs, and the
contraction proceeds with the shared boundary compressor.

Quantum chains: log Tr exp(-beta H) through M Trotter steps of the
transfer operator. The periodic imaginary-time direction is folded into
a doubled physical index (operator x copy), the open network starts and
ends in the vectorized identity and is contracted with the same
compressor.
"""

from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from exceptions import DimensionError, DomainError
from modules.evolve import TrotterScheme, layer_to_mpo, trotter_layers
from modules.mpo import HamiltonianSpec, MatrixProductOperator, lift_to_purification
from modules.mps import MatrixProductState, overlap, product_mps
from modules.tensor_core import svd_econ
from utils.logging import get_logger

from .boundary import close_boundary, sweep_rows

logger = get_logger("tnsim.apps.partition")


@dataclass(frozen=True)
class ClassicalModel:
    """
    Nearest-neighbour classical model on a rows x cols open lattice with q levels.

    horizontal[i, j] is the bond energy matrix between (i, j) and (i, j + 1),
    vertical[i, j] the one between (i, j) and (i + 1, j), field[i, j] the
    single-site energies.
    """

    rows: int
    cols: int
    levels: int
    horizontal: np.ndarray = field(repr=False)
    vertical: np.ndarray = field(repr=False)
    field_energy: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        q = self.levels
        if self.rows < 2 or self.cols < 2:
            raise DimensionError(f"a classical network needs at least 2 x 2 sites, got {self.rows} x {self.cols}")
        horizontal = np.asarray(self.horizontal, dtype=float)
        vertical = np.asarray(self.vertical, dtype=float)
        if horizontal.shape != (self.rows, self.cols - 1, q, q):
            raise DimensionError(f"horizontal energies must have shape {(self.rows, self.cols - 1, q, q)}")
        if vertical.shape != (self.rows - 1, self.cols, q, q):
            raise DimensionError(f"vertical energies must have shape {(self.rows - 1, self.cols, q, q)}")
        field_energy = np.zeros((self.rows, self.cols, q)) if self.field_energy is None else np.asarray(self.field_energy, dtype=float)
        if field_energy.shape != (self.rows, self.cols, q):
            raise DimensionError(f"field energies must have shape {(self.rows, self.cols, q)}")
        object.__setattr__(self, "horizontal", horizontal)
        object.__setattr__(self, "vertical", vertical)
        object.__setattr__(self, "field_energy", field_energy)

    @property
    def sites(self) -> int:
        return self.rows * self.cols


ISING_VALUES = np.array([1.0, -1.0])


def ising_model(rows: int, cols: int, coupling: float = 1.0, field_h: float = 0.0,
                j_h: Optional[np.ndarray] = None, j_v: Optional[np.ndarray] = None) -> ClassicalModel:
    """
    E = -sum J s s' - h sum s with s = +1 (level 0) or -1 (level 1).

    j_h (rows, cols - 1) and j_v (rows - 1, cols) give inhomogeneous couplings.
    """
    j_h = np.full((rows, cols - 1), coupling) if j_h is None else np.asarray(j_h, dtype=float)
    j_v = np.full((rows - 1, cols), coupling) if j_v is None else np.asarray(j_v, dtype=float)
    pair = -np.outer(ISING_VALUES, ISING_VALUES)
    horizontal = j_h[:, :, None, None] * pair
    vertical = j_v[:, :, None, None] * pair
    field_energy = np.broadcast_to(-field_h * ISING_VALUES, (rows, cols, 2)).copy()
    return ClassicalModel(rows, cols, 2, horizontal, vertical, field_energy)


@dataclass
class PartitionResult:
    log_z: float
    observables: Dict[str, float] = field(default_factory=dict)
    max_delta_k: float = 0.0
    delta_ks: Sequence[float] = ()
    dtilde: int = 1


def _split_bond(weights: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """B = f @ g with f (q, c) and g (c, q), c the numerical rank."""
    u, s, v = svd_econ(weights.astype(np.complex128))
    keep = max(1, int(np.count_nonzero(s > 1e-14 * max(s[0], 1e-300))))
    root = np.sqrt(s[:keep])
    return u[:, :keep] * root[None, :], root[:, None] * v[:keep, :]


def network_tensors(model: ClassicalModel, beta: float,
                    insertions: Optional[Mapping[Tuple[int, int], np.ndarray]] = None):
    """Grid of site tensors X[l, r, u, d]; insertions multiply site weights by O(s)."""
    q = model.levels
    ones = np.ones((1, q), dtype=np.complex128)
    right_f, left_g, down_f, up_g = {}, {}, {}, {}
    for i in range(model.rows):
        for j in range(model.cols - 1):
            f, g = _split_bond(np.exp(-beta * model.horizontal[i, j]))
            right_f[i, j], left_g[i, j + 1] = f, g
    for i in range(model.rows - 1):
        for j in range(model.cols):
            f, g = _split_bond(np.exp(-beta * model.vertical[i, j]))
            down_f[i, j], up_g[i + 1, j] = f, g

    grid = []
    for i in range(model.rows):
        row = []
        for j in range(model.cols):
            weight = np.exp(-beta * model.field_energy[i, j]).astype(np.complex128)
            if insertions and (i, j) in insertions:
                weight = weight * np.asarray(insertions[i, j], dtype=np.complex128)
            g_l = left_g.get((i, j), ones)
            f_r = right_f.get((i, j), ones.T)
            g_u = up_g.get((i, j), ones)
            f_d = down_f.get((i, j), ones.T)
            row.append(np.einsum("s,ls,sr,us,sd->lrud", weight, g_l, f_r, g_u, f_d))
        grid.append(row)
    return grid


def contract_grid(grid, dtilde: int, delta_k_tolerance: Optional[float] = None,
                  max_dtilde: Optional[int] = None):
    """
    Contract a grid of X[l, r, u, d] tensors with open edges from the top row down.

    Returns:
        (log of |value| carried as scale, phase factor, BoundaryResult)
    """
    top = MatrixProductState(tuple(x[:, :, 0, :] for x in grid[0]))
    rows = [MatrixProductOperator(tuple(x.transpose(0, 1, 3, 2) for x in row)) for row in grid[1:]]
    result = sweep_rows(top, rows, dtilde, delta_k_tolerance, max_dtilde, stage="partition")
    closing = close_boundary(result.state)
    return result.log_scale + float(np.log(abs(closing))), closing / abs(closing), result


def classical_partition_2d(
    model: ClassicalModel,
    beta: float,
    dtilde: int,
    observables: Optional[Mapping[str, Mapping[Tuple[int, int], np.ndarray]]] = None,
    delta_k_tolerance: Optional[float] = None,
    max_dtilde: Optional[int] = None,
) -> PartitionResult:
    """
    log Z and thermal averages of a classical lattice model.

    Args:
        model: Lattice, levels and energies
        beta: Inverse temperature >= 0
        dtilde: Boundary bond dimension (exact once it reaches q^cols)
        observables: name -> {(row, col): per-level values O(s)}; each is
            evaluated as Z[O] / Z with its own contraction
        delta_k_tolerance: Raise dtilde automatically whenever a cut exceeds it
        max_dtilde: Limit of the automatic increase

    Returns:
        PartitionResult with the largest delta_K over all contractions
    """
    if beta < 0:
        raise DomainError(f"beta must be >= 0, got {beta}")
    if beta == 0.0 and not observables:
        return PartitionResult(model.sites * float(np.log(model.levels)), dtilde=dtilde)
    observables = observables or {}
    log_z, _, base = contract_grid(network_tensors(model, beta), dtilde, delta_k_tolerance, max_dtilde)
    delta_ks = list(base.delta_ks)
    values = {}
    for name, insertions in observables.items():
        log_o, phase, run = contract_grid(network_tensors(model, beta, insertions), base.dtilde,
                                          delta_k_tolerance, max_dtilde)
        values[name] = float((phase * np.exp(log_o - log_z)).real)
        delta_ks.extend(run.delta_ks)
    logger.debug("Classical partition function", rows=model.rows, cols=model.cols, beta=beta,
                 log_z=log_z, max_delta_k=max(delta_ks, default=0.0))
    return PartitionResult(log_z, values, max(delta_ks, default=0.0), tuple(delta_ks), base.dtilde)


def bulk_free_energy_density(
    build,
    sizes: Sequence[int],
    beta: float,
    dtilde: int,
) -> float:
    """
    Bulk free energy per site -a / beta from log Z(L) = a L^2 + b L + c on
    three consecutive square lattices; the second difference removes the
    open-boundary surface and corner terms.

    Args:
        build: L -> ClassicalModel on an L x L lattice
        sizes: Three consecutive sizes (L, L + 1, L + 2)
        beta: Inverse temperature > 0
        dtilde: Boundary bond dimension
    """
    if len(sizes) != 3 or sizes[1] - sizes[0] != 1 or sizes[2] - sizes[1] != 1:
        raise DomainError(f"need three consecutive lattice sizes, got {sizes}")
    if beta <= 0:
        raise DomainError(f"beta must be > 0, got {beta}")
    logs = [classical_partition_2d(build(size), beta, dtilde).log_z for size in sizes]
    curvature = 0.5 * (logs[2] - 2.0 * logs[1] + logs[0])
    return float(-curvature / beta)


# ----------------------------------------------------------------------
# Quantum chains
# ----------------------------------------------------------------------

def _vectorized_identity(n: int, d: int) -> MatrixProductState:
    return product_mps([np.eye(d, dtype=np.complex128).reshape(d * d)] * n)


def thermal_partition_network(
    spec: HamiltonianSpec,
    beta: float,
    trotter_steps: int,
    dtilde: int,
    order: int = 2,
) -> PartitionResult:
    """
    log Tr exp(-beta H) of a nearest-neighbour chain from M Trotter steps.

    Args:
        spec: Open nearest-neighbour chain
        beta: Inverse temperature >= 0
        trotter_steps: Number M of imaginary-time slices
        dtilde: Bond dimension of the folded boundary (operator x copy)
        order: Trotter order

    Returns:
        PartitionResult with the per-slice delta_K
    """
    if beta < 0:
        raise DomainError(f"beta must be >= 0, got {beta}")
    if trotter_steps < 1:
        raise DomainError(f"need at least one Trotter step, got {trotter_steps}")
    n, d = spec.n, spec.d
    if beta == 0.0:
        return PartitionResult(n * float(np.log(d)), dtilde=dtilde)
    scheme = TrotterScheme.imaginary_time(beta / trotter_steps, order=order)
    dims = [d] * n
    slice_mpos = [lift_to_purification(layer_to_mpo(layer, dims)) for layer in trotter_layers(spec, scheme)]
    rows = [w for _ in range(trotter_steps) for w in slice_mpos]
    identity = _vectorized_identity(n, d)
    result = sweep_rows(identity, rows, dtilde, stage="thermal_partition")
    closing = overlap(identity, result.state)
    # result.log_scale carries the norm of the starting identity as well
    log_z = result.log_scale + float(np.log(abs(closing)))
    logger.debug("Thermal partition network", n=n, beta=beta, steps=trotter_steps, log_z=log_z,
                 max_delta_k=result.max_delta_k)
    return PartitionResult(log_z, {}, result.max_delta_k, tuple(result.delta_ks), result.dtilde)
