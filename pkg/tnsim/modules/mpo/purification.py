"""
Purified mixed states.

Each site carries the pair (system i, ancilla j) on one physical index
p = i * d_ancilla + j. Operators acting on the system are lifted to act
trivially on the ancilla.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from config import settings
from exceptions import CapacityError, DegenerateStateError, DimensionError
from modules.mps import MatrixProductState, norm_squared, product_mps, to_vector

from .operator import MatrixProductOperator


@dataclass(frozen=True)
class PurifiedState:
    """An MPS over system x ancilla sites."""

    state: MatrixProductState
    system_dims: Tuple[int, ...]
    ancilla_dims: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "system_dims", tuple(self.system_dims))
        object.__setattr__(self, "ancilla_dims", tuple(self.ancilla_dims))
        expected = tuple(s * a for s, a in zip(self.system_dims, self.ancilla_dims))
        if self.state.phys_dims != expected or len(self.system_dims) != self.state.n:
            raise DimensionError(
                f"purified dims {self.state.phys_dims} do not match system x ancilla {expected}"
            )

    @property
    def n(self) -> int:
        return self.state.n

    def with_state(self, state: MatrixProductState) -> "PurifiedState":
        return PurifiedState(state, self.system_dims, self.ancilla_dims)

    def reduced_density(self) -> np.ndarray:
        """Dense system density matrix Tr_anc |psi><psi| / <psi|psi>."""
        dim = int(np.prod(self.system_dims))
        if dim * int(np.prod(self.ancilla_dims)) > settings.dense_max_dim:
            raise CapacityError(f"purification of dimension {dim} too large for a dense reduction")
        norm = norm_squared(self.state)
        if norm == 0.0:
            raise DegenerateStateError("reduced density of a zero-norm purification")
        amplitudes = to_vector(self.state)
        shape = [x for pair in zip(self.system_dims, self.ancilla_dims) for x in pair]
        tensor = amplitudes.reshape(shape)
        n = self.n
        order = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
        m = tensor.transpose(order).reshape(dim, -1)
        return m @ m.conj().T / norm


def purified_identity(n: int, d: int) -> PurifiedState:
    """
    Normalized purification of I / d^n: every site is the maximally
    entangled pair sum_i |i>|i> / sqrt(d).
    """
    local = np.eye(d, dtype=np.complex128).reshape(d * d) / np.sqrt(d)
    return PurifiedState(product_mps([local] * n), (d,) * n, (d,) * n)


def purified_product(system_vectors: Sequence[np.ndarray], ancilla_vectors: Sequence[np.ndarray]) -> PurifiedState:
    """Product purification with independent system and ancilla vectors."""
    locals_ = [np.kron(np.asarray(s), np.asarray(a)) for s, a in zip(system_vectors, ancilla_vectors)]
    return PurifiedState(
        product_mps(locals_),
        tuple(len(s) for s in system_vectors),
        tuple(len(a) for a in ancilla_vectors),
    )


def lift_to_purification(op: MatrixProductOperator, ancilla_dims: Optional[Sequence[int]] = None) -> MatrixProductOperator:
    """O -> O x I on every (system, ancilla) site."""
    if ancilla_dims is None:
        ancilla_dims = op.in_dims
    sites = []
    for w, a in zip(op.sites, ancilla_dims):
        lifted = np.einsum("lrst,xy->lrsxty", w, np.eye(a))
        dl, dr, do, di = w.shape
        sites.append(lifted.reshape(dl, dr, do * a, di * a))
    return MatrixProductOperator(tuple(sites), op.boundary)
