"""
Matrix product state container and constructors.

Site tensors have shape (D_left, D_right, d). For an open chain the outer
bonds have extent 1; for a periodic chain the right bond of the last site
closes onto the left bond of the first.
"""

from dataclasses import dataclass, replace
from utils.compat import StrEnum
from typing import Optional, Sequence, Tuple

import numpy as np

from config import settings
from exceptions import CapacityError, DimensionError
from modules.tensor_core import as_tensor, truncated_svd
from utils.seeding import as_rng


class Boundary(StrEnum):
    """Boundary condition of a chain."""
    OPEN = "open"
    PERIODIC = "periodic"


class CanonicalForm(StrEnum):
    """
    Gauge marker of a state.

    LEFT / RIGHT: every site is a left / right isometry (state normalized).
    MIXED: sites left of `center` are left isometries, sites right of it are
    right isometries; the center carries the norm.
    """
    NONE = "none"
    LEFT = "left"
    RIGHT = "right"
    MIXED = "mixed"


@dataclass(frozen=True)
class MatrixProductState:
    """Chain of rank-3 site tensors (D_left, D_right, d)."""

    sites: Tuple[np.ndarray, ...]
    boundary: Boundary = Boundary.OPEN
    canonical: CanonicalForm = CanonicalForm.NONE
    center: Optional[int] = None

    def __post_init__(self):
        sites = tuple(as_tensor(a) for a in self.sites)
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        object.__setattr__(self, "canonical", CanonicalForm(self.canonical))
        if not sites:
            raise DimensionError("a matrix product state needs at least one site")
        for k, a in enumerate(sites):
            if a.ndim != 3:
                raise DimensionError(f"site {k} must be rank 3 (D_left, D_right, d), got {a.shape}")
        for k in range(len(sites) - 1):
            if sites[k].shape[1] != sites[k + 1].shape[0]:
                raise DimensionError(
                    f"bond ({k}, {k + 1}) mismatch: {sites[k].shape[1]} != {sites[k + 1].shape[0]}"
                )
        if self.boundary == Boundary.OPEN:
            if sites[0].shape[0] != 1 or sites[-1].shape[1] != 1:
                raise DimensionError("open chain must have outer bonds of extent 1")
        elif sites[-1].shape[1] != sites[0].shape[0]:
            raise DimensionError(
                f"wrap bond mismatch: {sites[-1].shape[1]} != {sites[0].shape[0]}"
            )
        if self.canonical == CanonicalForm.MIXED and not (
            self.center is not None and 0 <= self.center < len(sites)
        ):
            raise DimensionError(f"mixed canonical form needs a center in range, got {self.center}")

    @property
    def n(self) -> int:
        return len(self.sites)

    @property
    def phys_dims(self) -> Tuple[int, ...]:
        return tuple(a.shape[2] for a in self.sites)

    @property
    def bond_dims(self) -> Tuple[int, ...]:
        """Extents of the internal bonds (plus the wrap bond when periodic)."""
        bonds = tuple(a.shape[1] for a in self.sites[:-1])
        if self.boundary == Boundary.PERIODIC:
            bonds = bonds + (self.sites[-1].shape[1],)
        return bonds

    @property
    def max_bond(self) -> int:
        return max(self.bond_dims, default=1)

    def with_sites(self, sites: Sequence[np.ndarray], canonical=CanonicalForm.NONE,
                   center: Optional[int] = None) -> "MatrixProductState":
        return replace(self, sites=tuple(sites), canonical=canonical, center=center)

    def scaled(self, factor: complex) -> "MatrixProductState":
        """Multiply the state by a scalar (absorbed into the center or first site)."""
        k = self.center if self.center is not None else 0
        sites = list(self.sites)
        sites[k] = sites[k] * factor
        return replace(self, sites=tuple(sites))


def random_mps(
    n: int,
    d: int,
    bond: int,
    boundary: Boundary = Boundary.OPEN,
    seed=None,
    complex_entries: bool = False,
) -> MatrixProductState:
    """
    Random state with i.i.d. standard normal entries scaled by 1/sqrt(D).

    Args:
        n: Number of sites (>= 2)
        d: Physical dimension (>= 2)
        bond: Bond dimension D (>= 1)
        boundary: Open or periodic
        seed: Seed or numpy Generator
        complex_entries: Draw real and imaginary parts independently

    Returns:
        Unnormalized MatrixProductState
    """
    if n < 2 or d < 2 or bond < 1:
        raise DimensionError(f"random_mps needs n >= 2, d >= 2, D >= 1 (got {n}, {d}, {bond})")
    rng = as_rng(seed)
    boundary = Boundary(boundary)
    sites = []
    for k in range(n):
        left = 1 if (boundary == Boundary.OPEN and k == 0) else bond
        right = 1 if (boundary == Boundary.OPEN and k == n - 1) else bond
        shape = (left, right, d)
        a = rng.standard_normal(shape)
        if complex_entries:
            a = a + 1j * rng.standard_normal(shape)
        sites.append(a / np.sqrt(bond))
    return MatrixProductState(tuple(sites), boundary)


def product_mps(vectors: Sequence[np.ndarray]) -> MatrixProductState:
    """Bond-1 state from one local vector per site."""
    sites = [as_tensor(v).reshape(1, 1, -1) for v in vectors]
    return MatrixProductState(tuple(sites))


def basis_state(configuration: Sequence[int], d: int = 2) -> MatrixProductState:
    """Product state of computational basis vectors."""
    return product_mps([np.eye(d)[i] for i in configuration])


def aklt_mps(n: int, left: Sequence[complex] = (1.0, 0.0), right: Sequence[complex] = (1.0, 0.0)) -> MatrixProductState:
    """
    Spin-1 AKLT state on an open chain, D = 2.

    Physical basis ordered as S^z = +1, 0, -1. The boundary vectors select
    one of the four edge-spin ground states.
    """
    a = np.zeros((2, 2, 3), dtype=np.complex128)
    a[0, 1, 0] = np.sqrt(2.0 / 3.0)
    a[0, 0, 1] = -1.0 / np.sqrt(3.0)
    a[1, 1, 1] = 1.0 / np.sqrt(3.0)
    a[1, 0, 2] = -np.sqrt(2.0 / 3.0)
    v_left = as_tensor(left).reshape(1, 2)
    v_right = as_tensor(right).reshape(2, 1)
    sites = [a.copy() for _ in range(n)]
    sites[0] = np.einsum("xa,abs->xbs", v_left, a)
    sites[-1] = np.einsum("abs,by->ays", sites[-1], v_right)
    return MatrixProductState(tuple(sites))


def singlet_mps() -> MatrixProductState:
    """Two-qubit singlet (|01> - |10>)/sqrt(2) as a D = 2 open chain."""
    a0 = np.zeros((1, 2, 2), dtype=np.complex128)
    a0[0, 0, 0] = 1.0
    a0[0, 1, 1] = 1.0
    a1 = np.zeros((2, 1, 2), dtype=np.complex128)
    a1[0, 0, 1] = 1.0 / np.sqrt(2.0)
    a1[1, 0, 0] = -1.0 / np.sqrt(2.0)
    return MatrixProductState((a0, a1))


def to_vector(psi: MatrixProductState) -> np.ndarray:
    """
    Dense amplitudes, site 0 most significant.

    Raises:
        CapacityError: If the Hilbert space exceeds settings.dense_max_dim
    """
    dim = int(np.prod(psi.phys_dims))
    if dim > settings.dense_max_dim:
        raise CapacityError(f"dense state of dimension {dim} exceeds cap {settings.dense_max_dim}")
    # m[left bond, right bond, physical so far]
    m = psi.sites[0]
    for a in psi.sites[1:]:
        m = np.einsum("abI,bci->acIi", m, a).reshape(m.shape[0], a.shape[1], -1)
    return np.einsum("aaI->I", m)


def from_vector(
    vector: np.ndarray,
    dims: Sequence[int],
    max_bond: Optional[int] = None,
) -> MatrixProductState:
    """
    Encode dense amplitudes as an open-chain MPS by successive SVDs.

    Exact unless max_bond forces a truncation. The result is left-canonical
    up to the last site, which carries the norm.
    """
    vector = as_tensor(vector).ravel()
    if vector.size != int(np.prod(dims)):
        raise DimensionError(f"vector of length {vector.size} does not match dims {tuple(dims)}")
    sites = []
    rest = vector.reshape(1, -1)
    left = 1
    for d in dims[:-1]:
        m = rest.reshape(left * d, -1)
        (u, s, v), _ = truncated_svd(m, max_bond or m.shape[0])
        sites.append(u.reshape(left, d, -1).transpose(0, 2, 1))
        rest = s[:, None] * v
        left = u.shape[1]
    sites.append(rest.reshape(left, dims[-1], 1).transpose(0, 2, 1))
    return MatrixProductState(tuple(sites), canonical=CanonicalForm.MIXED, center=len(dims) - 1)
