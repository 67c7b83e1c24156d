"""
Tensor contraction and decomposition primitives.

Tensors are numpy arrays of dtype complex128. The linearization order of
every tensor in the engine is C order (row-major, last index fastest);
reshapes that merge indices therefore merge them left-major, e.g. a pair
(i, j) with extents (m, n) becomes the single index i * n + j.
Axes are numbered from 0.
"""

from typing import NamedTuple, Sequence, Tuple

import numpy as np
import scipy.linalg

from config import settings
from exceptions import DimensionError, NumericInputError
from utils.logging import get_logger

logger = get_logger("tensor_core.contract")


class SvdResult(NamedTuple):
    """Economical SVD: u @ diag(s) @ v reconstructs the input."""

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray


def as_tensor(x) -> np.ndarray:
    """Convert any array-like to a complex128 C-ordered tensor."""
    return np.ascontiguousarray(x, dtype=np.complex128)


def contract(
    x: np.ndarray,
    x_inds: Sequence[int],
    y: np.ndarray,
    y_inds: Sequence[int],
) -> np.ndarray:
    """
    Contract x and y over paired axes.

    The remaining axes of x come first (in their original order), followed
    by the remaining axes of y.

    Args:
        x: First tensor
        x_inds: Axes of x to contract
        y: Second tensor
        y_inds: Axes of y to contract, paired position-wise with x_inds

    Returns:
        Contracted tensor (0-d array for a full contraction)

    Raises:
        DimensionError: If the index lists are malformed or extents differ
    """
    x_inds = [int(i) for i in x_inds]
    y_inds = [int(i) for i in y_inds]
    if len(x_inds) != len(y_inds):
        raise DimensionError(f"index lists differ in length: {x_inds} vs {y_inds}")
    if len(set(x_inds)) != len(x_inds) or len(set(y_inds)) != len(y_inds):
        raise DimensionError(f"duplicate contraction index in {x_inds} / {y_inds}")
    for ix, iy in zip(x_inds, y_inds):
        if not (0 <= ix < x.ndim and 0 <= iy < y.ndim):
            raise DimensionError(f"index pair ({ix}, {iy}) out of range for ranks {x.ndim}, {y.ndim}")
        if x.shape[ix] != y.shape[iy]:
            raise DimensionError(
                f"extent mismatch on index pair ({ix}, {iy}): {x.shape[ix]} != {y.shape[iy]}"
            )
    return np.tensordot(x, y, axes=(x_inds, y_inds))


def svd_econ(m: np.ndarray) -> SvdResult:
    """
    Economical singular value decomposition of a matrix.

    Args:
        m: Rank-2 tensor

    Returns:
        SvdResult with inner dimension min(rows, cols)

    Raises:
        DimensionError: If m is not rank 2
        NumericInputError: If m has non-finite entries
    """
    if m.ndim != 2:
        raise DimensionError(f"svd_econ needs a rank-2 tensor, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NumericInputError("svd_econ input contains NaN or infinite entries")
    try:
        u, s, v = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError:
        # gesdd occasionally fails to converge; gesvd is slower but robust
        logger.warning("gesdd did not converge, retrying with gesvd", shape=m.shape)
        u, s, v = scipy.linalg.svd(m, full_matrices=False, lapack_driver="gesvd")
    return SvdResult(u, s, v)


def numerical_rank(s: np.ndarray, cutoff: float = None) -> int:
    """Number of singular values above cutoff * s[0]."""
    if s.size == 0 or s[0] == 0.0:
        return 0
    cutoff = settings.svd_zero_cutoff if cutoff is None else cutoff
    return int(np.count_nonzero(s > cutoff * s[0]))


def truncated_svd(m: np.ndarray, max_rank: int, cutoff: float = None) -> Tuple[SvdResult, float]:
    """
    SVD keeping at most max_rank non-zero singular values.

    Ties are broken by the order returned by LAPACK (lowest index kept).

    Returns:
        (kept factors, sum of squared discarded singular values)
    """
    u, s, v = svd_econ(m)
    keep = max(1, min(max_rank, numerical_rank(s, cutoff)))
    discarded = float(np.sum(s[keep:] ** 2))
    return SvdResult(u[:, :keep], s[:keep], v[:keep, :]), discarded


def operator_schmidt(
    op: np.ndarray,
    d_left: int,
    d_right: int,
    cutoff: float = 1e-12,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Split a two-site operator into channels: op = sum_c kron(L[c], R[c]).

    Args:
        op: (d_left*d_right) x (d_left*d_right) matrix, left site major
        d_left: Physical dimension of the left site
        d_right: Physical dimension of the right site
        cutoff: Channels with singular value below cutoff are dropped

    Returns:
        (L, R) with shapes (c, d_left, d_left) and (c, d_right, d_right)
    """
    dim = d_left * d_right
    if op.shape != (dim, dim):
        raise DimensionError(f"two-site operator must be {dim}x{dim}, got {op.shape}")
    # [(a b), (a' b')] -> [(a a'), (b b')]
    t = as_tensor(op).reshape(d_left, d_right, d_left, d_right).transpose(0, 2, 1, 3)
    u, s, v = svd_econ(t.reshape(d_left * d_left, d_right * d_right))
    keep = int(np.count_nonzero(s > cutoff))
    root = np.sqrt(s[:keep])
    left = (u[:, :keep] * root).T.reshape(keep, d_left, d_left)
    right = (root[:, None] * v[:keep, :]).reshape(keep, d_right, d_right)
    return left, right
