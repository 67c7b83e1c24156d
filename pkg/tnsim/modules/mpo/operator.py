"""
Matrix product operators and their construction from Hamiltonian specs.

Site tensors have shape (D_left, D_right, d_out, d_in). Hamiltonian MPOs
built here always have open ends; a periodic wrap term is carried across
the chain on dedicated channels.
"""

from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from config import settings
from exceptions import CapacityError, DimensionError, UnsupportedRangeError
from modules.mps import Boundary, CanonicalForm, MatrixProductState
from modules.tensor_core import as_tensor, operator_schmidt
from utils.logging import get_logger

from .hamiltonian import HamiltonianSpec

logger = get_logger("tnsim.mpo")


@dataclass(frozen=True)
class MatrixProductOperator:
    """Chain of rank-4 operator tensors (D_left, D_right, d_out, d_in)."""

    sites: Tuple[np.ndarray, ...]
    boundary: Boundary = Boundary.OPEN

    def __post_init__(self):
        sites = tuple(as_tensor(w) for w in self.sites)
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        if not sites:
            raise DimensionError("a matrix product operator needs at least one site")
        for k, w in enumerate(sites):
            if w.ndim != 4:
                raise DimensionError(f"site {k} must be rank 4 (D_left, D_right, d_out, d_in), got {w.shape}")
        for k in range(len(sites) - 1):
            if sites[k].shape[1] != sites[k + 1].shape[0]:
                raise DimensionError(
                    f"bond ({k}, {k + 1}) mismatch: {sites[k].shape[1]} != {sites[k + 1].shape[0]}"
                )
        if self.boundary == Boundary.OPEN:
            if sites[0].shape[0] != 1 or sites[-1].shape[1] != 1:
                raise DimensionError("open operator chain must have outer bonds of extent 1")
        elif sites[-1].shape[1] != sites[0].shape[0]:
            raise DimensionError("wrap bond mismatch in periodic operator chain")

    @property
    def n(self) -> int:
        return len(self.sites)

    @property
    def out_dims(self) -> Tuple[int, ...]:
        return tuple(w.shape[2] for w in self.sites)

    @property
    def in_dims(self) -> Tuple[int, ...]:
        return tuple(w.shape[3] for w in self.sites)

    @property
    def bond_dims(self) -> Tuple[int, ...]:
        bonds = tuple(w.shape[1] for w in self.sites[:-1])
        if self.boundary == Boundary.PERIODIC:
            bonds = bonds + (self.sites[-1].shape[1],)
        return bonds

    @property
    def max_bond(self) -> int:
        return max(self.bond_dims, default=1)

    def adjoint(self) -> "MatrixProductOperator":
        return replace(self, sites=tuple(w.transpose(0, 1, 3, 2).conj() for w in self.sites))


# ----------------------------------------------------------------------
# Construction
# ----------------------------------------------------------------------

def product_mpo(ops: Sequence[np.ndarray]) -> MatrixProductOperator:
    """Bond-1 operator O_1 x ... x O_N."""
    return MatrixProductOperator(tuple(as_tensor(op)[None, None] for op in ops))


def identity_mpo(dims: Union[int, Sequence[int]], n: Optional[int] = None) -> MatrixProductOperator:
    """Identity on sites of the given dims (or n sites of a single dim)."""
    if isinstance(dims, int):
        dims = [dims] * int(n)
    return product_mpo([np.eye(d) for d in dims])


def _bond_channels(spec: HamiltonianSpec, i: int, j: int):
    op = spec.bond_operator(i, j)
    if not np.any(op):
        return np.zeros((0, spec.d, spec.d)), np.zeros((0, spec.d, spec.d))
    return operator_schmidt(op, spec.d, spec.d)


def nn_hamiltonian_mpo(spec: HamiltonianSpec) -> MatrixProductOperator:
    """
    Compile a nearest-neighbour chain Hamiltonian into an open MPO.

    The bulk tensor is lower-block-triangular: channel 0 carries the
    identity before any operator was placed, the last channel carries it
    after the term is complete, and each coupling channel c of bond
    (i, i + 1) places L_c on site i and R_c on site i + 1. A periodic wrap
    term (N - 1, 0) occupies extra channels that carry its R-part from
    site 0 through the whole chain to L on site N - 1.

    Args:
        spec: Hamiltonian with single-site and nearest-neighbour chain terms

    Returns:
        MatrixProductOperator with bond dimension 2 + number of channels

    Raises:
        UnsupportedRangeError: For longer-range terms or 2-D lattices
    """
    if spec.lattice is not None:
        raise UnsupportedRangeError("2-D lattices have no nearest-neighbour chain MPO; use the PEPS module")
    spec.require_nearest_neighbour()
    n, d = spec.n, spec.d
    eye = np.eye(d, dtype=np.complex128)

    if n == 1:
        return product_mpo([spec.site_operator(0)])

    bond_channels = [_bond_channels(spec, k, k + 1) for k in range(n - 1)]
    wrap_l, wrap_r = np.zeros((0, d, d)), np.zeros((0, d, d))
    if spec.boundary == Boundary.PERIODIC and n > 2:
        wrap_l, wrap_r = _bond_channels(spec, n - 1, 0)
    n_wrap = len(wrap_l)
    # bond k (between site k and k+1) layout: [start, channels(k), wraps, end]
    widths = [2 + len(bond_channels[k][0]) + n_wrap for k in range(n - 1)]

    sites = []
    for k in range(n):
        dl = 1 if k == 0 else widths[k - 1]
        dr = 1 if k == n - 1 else widths[k]
        w = np.zeros((dl, dr, d, d), dtype=np.complex128)
        end_col = dr - 1
        if k < n - 1:
            w[0, 0] += eye
        if k > 0:
            w[dl - 1, end_col] += eye
        w[0, end_col] += spec.site_operator(k)
        # open a coupling on the bond to the right, close the one from the left
        if k < n - 1:
            for c, left_op in enumerate(bond_channels[k][0]):
                w[0, 1 + c] += left_op
        if k > 0:
            for c, right_op in enumerate(bond_channels[k - 1][1]):
                w[1 + c, end_col] += right_op
        for c in range(n_wrap):
            if k == 0:
                w[0, 1 + len(bond_channels[0][0]) + c] += wrap_r[c]
            elif k == n - 1:
                w[1 + len(bond_channels[k - 1][0]) + c, end_col] += wrap_l[c]
            else:
                w[1 + len(bond_channels[k - 1][0]) + c, 1 + len(bond_channels[k][0]) + c] += eye
        sites.append(w)

    mpo = MatrixProductOperator(tuple(sites))
    logger.debug(f"Compiled {spec.name} MPO", n=n, d=d, max_bond=mpo.max_bond, wrap_channels=n_wrap)
    return mpo


def as_mpo(operator: Union[HamiltonianSpec, MatrixProductOperator]) -> MatrixProductOperator:
    """Accept either representation; term lists are compiled."""
    if isinstance(operator, MatrixProductOperator):
        return operator
    return nn_hamiltonian_mpo(operator)


# ----------------------------------------------------------------------
# Algebra
# ----------------------------------------------------------------------

def _check_shapes(a: MatrixProductOperator, b: MatrixProductOperator, need_in_out: bool) -> None:
    if a.n != b.n:
        raise DimensionError(f"operator chains differ in length: {a.n} != {b.n}")
    if need_in_out and a.in_dims != b.out_dims:
        raise DimensionError(f"cannot compose: {a.in_dims} != {b.out_dims}")
    if not need_in_out and (a.in_dims != b.in_dims or a.out_dims != b.out_dims):
        raise DimensionError("cannot add operators of different shapes")


def mpo_product(a: MatrixProductOperator, b: MatrixProductOperator) -> MatrixProductOperator:
    """Operator a @ b (b acts first); bond dimensions multiply."""
    _check_shapes(a, b, need_in_out=True)
    sites = []
    for wa, wb in zip(a.sites, b.sites):
        w = np.einsum("abst,xytu->axbysu", wa, wb)
        sites.append(w.reshape(wa.shape[0] * wb.shape[0], wa.shape[1] * wb.shape[1],
                               wa.shape[2], wb.shape[3]))
    return MatrixProductOperator(tuple(sites), a.boundary)


def mpo_sum(a: MatrixProductOperator, b: MatrixProductOperator) -> MatrixProductOperator:
    """Operator a + b by block-diagonal stacking of open chains."""
    _check_shapes(a, b, need_in_out=False)
    n = a.n
    if n == 1:
        return MatrixProductOperator((a.sites[0] + b.sites[0],))
    sites = []
    for k, (wa, wb) in enumerate(zip(a.sites, b.sites)):
        if k == 0:
            sites.append(np.concatenate([wa, wb], axis=1))
        elif k == n - 1:
            sites.append(np.concatenate([wa, wb], axis=0))
        else:
            w = np.zeros((wa.shape[0] + wb.shape[0], wa.shape[1] + wb.shape[1]) + wa.shape[2:],
                         dtype=np.complex128)
            w[: wa.shape[0], : wa.shape[1]] = wa
            w[wa.shape[0]:, wa.shape[1]:] = wb
            sites.append(w)
    return MatrixProductOperator(tuple(sites))


def mpo_scale(a: MatrixProductOperator, factor: complex) -> MatrixProductOperator:
    sites = list(a.sites)
    sites[0] = sites[0] * factor
    return replace(a, sites=tuple(sites))


def mpo_scale_shift(a: MatrixProductOperator, scale: complex = 1.0, shift: complex = 0.0) -> MatrixProductOperator:
    """scale * a + shift * I."""
    shifted = mpo_scale(a, scale)
    if shift == 0.0:
        return shifted
    return mpo_sum(shifted, mpo_scale(identity_mpo(list(a.out_dims)), shift))


# ----------------------------------------------------------------------
# Application and dense forms
# ----------------------------------------------------------------------

def apply_mpo(op: MatrixProductOperator, psi: MatrixProductState) -> MatrixProductState:
    """
    Exact product op|psi>; bond dimensions multiply, nothing is truncated.

    Raises:
        DimensionError: If the operator input dims differ from the state dims
    """
    if op.n != psi.n or op.in_dims != psi.phys_dims:
        raise DimensionError(f"operator dims {op.in_dims} do not match state dims {psi.phys_dims}")
    sites = []
    for a, w in zip(psi.sites, op.sites):
        b = np.einsum("abi,xyoi->axbyo", a, w)
        sites.append(b.reshape(a.shape[0] * w.shape[0], a.shape[1] * w.shape[1], w.shape[2]))
    boundary = psi.boundary
    if op.boundary == Boundary.PERIODIC:
        boundary = Boundary.PERIODIC
    return MatrixProductState(tuple(sites), boundary, CanonicalForm.NONE, None)


def to_dense(op: MatrixProductOperator) -> np.ndarray:
    """
    Full matrix of an operator chain, site 0 most significant.

    Raises:
        CapacityError: If the output dimension exceeds settings.dense_max_dim
    """
    dim_out, dim_in = int(np.prod(op.out_dims)), int(np.prod(op.in_dims))
    if max(dim_out, dim_in) > settings.dense_max_dim:
        raise CapacityError(f"dense operator of dimension {max(dim_out, dim_in)} exceeds cap {settings.dense_max_dim}")
    # m[left bond, right bond, out so far, in so far]
    m = op.sites[0]
    for w in op.sites[1:]:
        m = np.einsum("abST,bcst->acSsTt", m, w)
        m = m.reshape(m.shape[0], m.shape[1], m.shape[2] * m.shape[3], m.shape[4] * m.shape[5])
    return np.einsum("aaST->ST", m)
