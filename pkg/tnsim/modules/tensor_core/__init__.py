"""
Tensor Core Module

Dense multilinear algebra shared by every other module.

Key Components:
- contract: pairwise contraction over named axes (remaining x axes first)
- svd_econ / truncated_svd: economical SVD with rank decisions
- operator_schmidt: channel decomposition of two-site operators
- eig_smallest / lanczos_smallest: smallest eigenpair, dense or iterative
- solve_hermitian: regularized Hermitian linear solve
"""

from .contract import (
    SvdResult,
    as_tensor,
    contract,
    numerical_rank,
    operator_schmidt,
    svd_econ,
    truncated_svd,
)
from .linalg import (
    EigenPair,
    PsdProjection,
    eig_smallest,
    lanczos_smallest,
    orthogonal_complement,
    project_psd,
    solve_hermitian,
)

__all__ = [
    "SvdResult",
    "as_tensor",
    "contract",
    "numerical_rank",
    "operator_schmidt",
    "svd_econ",
    "truncated_svd",
    "EigenPair",
    "PsdProjection",
    "eig_smallest",
    "lanczos_smallest",
    "orthogonal_complement",
    "project_psd",
    "solve_hermitian",
]
