"""
PEPS container and constructors.

Site tensors have shape (d, left, right, up, down); bonds on the open
edges of the lattice have extent 1. Site (i, j) is row i, column j and
carries the linear index i * cols + j, the order used by dense vectors
and by 2-D Hamiltonian specs.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from opt_einsum import contract, get_symbol

from config import settings
from exceptions import CapacityError, DimensionError
from modules.mpo import trap_potential
from modules.tensor_core import as_tensor
from utils.seeding import as_rng

PARTICLE = 0


@dataclass(frozen=True)
class Peps:
    """rows x cols grid of rank-5 tensors (d, l, r, u, dn)."""

    tensors: Tuple[Tuple[np.ndarray, ...], ...]

    def __post_init__(self):
        grid = tuple(tuple(as_tensor(a) for a in row) for row in self.tensors)
        object.__setattr__(self, "tensors", grid)
        if not grid or not grid[0]:
            raise DimensionError("a PEPS needs at least one site")
        rows, cols = len(grid), len(grid[0])
        for i, row in enumerate(grid):
            if len(row) != cols:
                raise DimensionError(f"row {i} has {len(row)} sites, expected {cols}")
            for j, a in enumerate(row):
                if a.ndim != 5:
                    raise DimensionError(f"site ({i}, {j}) must be rank 5 (d, l, r, u, dn), got {a.shape}")
                _, l, r, u, dn = a.shape
                if j == 0 and l != 1 or j == cols - 1 and r != 1:
                    raise DimensionError(f"site ({i}, {j}) must have extent 1 on the open left/right edge")
                if i == 0 and u != 1 or i == rows - 1 and dn != 1:
                    raise DimensionError(f"site ({i}, {j}) must have extent 1 on the open top/bottom edge")
                if j + 1 < cols and r != row[j + 1].shape[1]:
                    raise DimensionError(f"horizontal bond after ({i}, {j}) mismatch: {r} != {row[j + 1].shape[1]}")
                if i + 1 < rows and dn != grid[i + 1][j].shape[3]:
                    raise DimensionError(f"vertical bond below ({i}, {j}) mismatch: {dn} != {grid[i + 1][j].shape[3]}")

    @property
    def rows(self) -> int:
        return len(self.tensors)

    @property
    def cols(self) -> int:
        return len(self.tensors[0])

    @property
    def n(self) -> int:
        return self.rows * self.cols

    @property
    def phys_dims(self) -> Tuple[int, ...]:
        return tuple(a.shape[0] for row in self.tensors for a in row)

    @property
    def max_bond(self) -> int:
        return max(max(a.shape[1:]) for row in self.tensors for a in row)

    def site(self, i: int, j: int) -> np.ndarray:
        return self.tensors[i][j]

    def position(self, index: int) -> Tuple[int, int]:
        return divmod(index, self.cols)

    def with_sites(self, updates) -> "Peps":
        """New PEPS with {(i, j): tensor} replaced."""
        grid = [list(row) for row in self.tensors]
        for (i, j), tensor in updates.items():
            grid[i][j] = tensor
        return Peps(tuple(tuple(row) for row in grid))

    def scaled(self, factor: complex) -> "Peps":
        return self.with_sites({(0, 0): self.tensors[0][0] * factor})


def _bond_shape(rows: int, cols: int, i: int, j: int, bond: int, d: int) -> Tuple[int, ...]:
    return (
        d,
        1 if j == 0 else bond,
        1 if j == cols - 1 else bond,
        1 if i == 0 else bond,
        1 if i == rows - 1 else bond,
    )


def random_peps(rows: int, cols: int, d: int, bond: int, seed=None, complex_entries: bool = False) -> Peps:
    """I.i.d. normal entries scaled by 1/sqrt(bond^2)."""
    if rows < 1 or cols < 1 or d < 1 or bond < 1:
        raise DimensionError(f"random_peps needs positive sizes, got {rows}x{cols}, d={d}, D={bond}")
    rng = as_rng(seed)
    grid = []
    for i in range(rows):
        row = []
        for j in range(cols):
            shape = _bond_shape(rows, cols, i, j, bond, d)
            a = rng.standard_normal(shape)
            if complex_entries:
                a = a + 1j * rng.standard_normal(shape)
            row.append(a / bond)
        grid.append(tuple(row))
    return Peps(tuple(grid))


def product_peps(vectors: Sequence[Sequence[np.ndarray]]) -> Peps:
    """Bond-1 PEPS from a rows x cols grid of local vectors."""
    return Peps(tuple(tuple(as_tensor(v).reshape(-1, 1, 1, 1, 1) for v in row) for row in vectors))


def padded_to_bond(psi: Peps, bond: int, noise: float = 0.0, seed=None) -> Peps:
    """
    Embed every internal bond into extent `bond`.

    With noise = 0 the new slots are zero and the state is unchanged;
    otherwise every entry receives Gaussian noise of relative size `noise`
    so that sweeps can populate the new directions.
    """
    rng = as_rng(seed)
    grid = []
    for i, row in enumerate(psi.tensors):
        new_row = []
        for j, a in enumerate(row):
            shape = _bond_shape(psi.rows, psi.cols, i, j, bond, a.shape[0])
            if any(s < t for s, t in zip(shape, a.shape)):
                raise DimensionError(f"cannot pad site ({i}, {j}) of shape {a.shape} down to bond {bond}")
            padded = np.zeros(shape, dtype=np.complex128)
            padded[tuple(slice(0, s) for s in a.shape)] = a
            if noise > 0.0:
                padded += noise * float(np.max(np.abs(a))) * rng.standard_normal(shape)
            new_row.append(padded)
        grid.append(tuple(new_row))
    return Peps(tuple(grid))


def mott_peps(occupied: Sequence[Sequence[bool]], d: int = 2) -> Peps:
    """Product state with a particle (basis index 0) on every occupied site, empty (index 1) elsewhere."""
    basis = np.eye(d)
    return product_peps([[basis[PARTICLE] if flag else basis[1] for flag in row] for row in occupied])


def trap_mott_occupation(rows: int, cols: int, v0: float, mu: float) -> List[List[bool]]:
    """Zero-hopping ground state of the trapped hard-core boson model: occupied where V_i < mu."""
    potential = np.asarray(trap_potential(rows, cols, v0)).reshape(rows, cols)
    return [[bool(potential[i, j] < mu) for j in range(cols)] for i in range(rows)]


def _network_expression(psi: Peps) -> Tuple[str, List[np.ndarray]]:
    """Einsum string contracting every virtual bond and leaving the physical indices open."""
    rows, cols = psi.rows, psi.cols
    counter = iter(range(10 ** 6))
    phys = [[get_symbol(next(counter)) for _ in range(cols)] for _ in range(rows)]
    horizontal = [[get_symbol(next(counter)) for _ in range(cols + 1)] for _ in range(rows)]
    vertical = [[get_symbol(next(counter)) for _ in range(cols)] for _ in range(rows + 1)]
    inputs, operands = [], []
    for i in range(rows):
        for j in range(cols):
            inputs.append(phys[i][j] + horizontal[i][j] + horizontal[i][j + 1] + vertical[i][j] + vertical[i + 1][j])
            operands.append(psi.site(i, j))
    # open edges have extent 1 and are summed away
    output = "".join(phys[i][j] for i in range(rows) for j in range(cols))
    return ",".join(inputs) + "->" + output, operands


def peps_to_vector(psi: Peps, cap: Optional[int] = None) -> np.ndarray:
    """
    Dense amplitudes, site index i * cols + j, first site most significant.

    Raises:
        CapacityError: If the amplitude count exceeds the cap
    """
    cap = settings.peps_exact_max_amplitudes if cap is None else cap
    size = int(np.prod(psi.phys_dims))
    if size > cap:
        raise CapacityError(f"{size} amplitudes exceed the exact-contraction cap {cap}")
    expression, operands = _network_expression(psi)
    return np.asarray(contract(expression, *operands, optimize="greedy"), dtype=np.complex128).reshape(size)
