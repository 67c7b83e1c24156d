"""
Sparse reference Hamiltonians for lattices beyond the dense cap.

Terms are assembled as Kronecker products of scipy.sparse matrices with
identities; the lowest eigenvalue comes from ARPACK. Used for the 4 x 4
PEPS benchmarks where the dense matrix no longer fits in memory.
"""

from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from config import settings
from exceptions import CapacityError
from modules.mpo import HamiltonianSpec
from modules.tensor_core import as_tensor


def _embedded_term(op: np.ndarray, sites: Sequence[int], n: int, d: int) -> sp.csr_matrix:
    """Term on one site or on two sites of a d^n register (first site major)."""
    op = as_tensor(op)
    if len(sites) == 1:
        (k,) = sites
        return sp.kron(sp.kron(sp.identity(d ** k), sp.csr_matrix(op)), sp.identity(d ** (n - k - 1)), format="csr")
    a, b = sites
    if a > b:
        a, b = b, a
        op = op.reshape(d, d, d, d).transpose(1, 0, 3, 2).reshape(d * d, d * d)
    # operator-Schmidt split so the two factors can sit on distant sites
    tensor = op.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)
    u, s, vh = np.linalg.svd(tensor)
    total = sp.csr_matrix((d ** n, d ** n), dtype=np.complex128)
    for c in np.flatnonzero(s > 1e-14 * max(s[0], 1e-300)):
        left = (u[:, c] * s[c]).reshape(d, d)
        right = vh[c].reshape(d, d)
        factor = sp.kron(sp.identity(d ** a), sp.csr_matrix(left))
        factor = sp.kron(factor, sp.identity(d ** (b - a - 1)))
        factor = sp.kron(factor, sp.csr_matrix(right))
        total = total + sp.kron(factor, sp.identity(d ** (n - b - 1)), format="csr")
    return total


def sparse_hamiltonian(spec: HamiltonianSpec) -> sp.csr_matrix:
    """
    Sparse matrix of every term in the spec.

    Raises:
        CapacityError: If d^n exceeds settings.sparse_max_dim
    """
    total = spec.d ** spec.n
    if total > settings.sparse_max_dim:
        raise CapacityError(f"sparse dimension {total} exceeds cap {settings.sparse_max_dim}")
    h = sp.csr_matrix((total, total), dtype=np.complex128)
    for term in spec.terms:
        h = h + _embedded_term(term.matrix, term.sites, spec.n, spec.d)
    return h


def sparse_ground_energy(spec: HamiltonianSpec, tol: float = 1e-12) -> float:
    """Lowest eigenvalue through ARPACK (dense fallback for tiny registers)."""
    h = sparse_hamiltonian(spec)
    if h.shape[0] <= 64:
        return float(np.linalg.eigvalsh(h.toarray())[0])
    value = eigsh(h, k=1, which="SA", tol=tol, return_eigenvectors=False)
    return float(np.min(value.real))
