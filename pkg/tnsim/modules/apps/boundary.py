"""
Row-by-row contraction of two-dimensional networks with a compressed boundary.

A boundary MPS (physical index = the open vertical bonds of the rows
absorbed so far) is pushed through one row MPO at a time and cut back to
bond Dtilde. The product T psi is never formed: the cut is fitted
variationally with the row operator inside the environments and
||T psi||^2 comes from <psi| T^dag T |psi> (the zip-up truncation weight
stands in when that contraction is too large). Every cut reports its
relative error

    delta_K = ||T psi - psi'||^2 / ||T psi||^2,

and the boundary is renormalized after each row so large networks never
overflow; the removed norms are accumulated as a log scale.

Partition functions (classical grids and the imaginary-time network of a
quantum chain) and the PEPS environments share this compressor.
"""

from dataclasses import dataclass, field
from typing import Iterable, List, Optional

import numpy as np

from exceptions import DegenerateStateError, DomainError
from modules.evolve import compress_product
from modules.mpo import MatrixProductOperator
from modules.mps import MatrixProductState, norm_squared
from utils.logging import get_logger, log_compression_event

logger = get_logger("tnsim.apps.boundary")


@dataclass
class BoundaryResult:
    """Normalized final boundary and its bookkeeping."""

    state: MatrixProductState
    log_scale: float
    delta_ks: List[float] = field(default_factory=list)
    history: List[MatrixProductState] = field(default_factory=list)
    history_scales: List[float] = field(default_factory=list)
    dtilde: int = 1

    @property
    def max_delta_k(self) -> float:
        return max(self.delta_ks, default=0.0)


def _normalize(psi: MatrixProductState):
    norm = np.sqrt(norm_squared(psi))
    if norm == 0.0:
        raise DegenerateStateError("boundary contraction produced a zero-norm boundary")
    return psi.scaled(1.0 / norm), float(np.log(norm))


def compress_boundary(row: MatrixProductOperator, boundary: MatrixProductState, dtilde: int):
    """
    Cut row|boundary> back to bond dtilde without forming the product.

    Returns:
        (compressed state, relative delta_K, ||row boundary||^2)
    """
    result = compress_product(row, boundary, dtilde)
    norm2 = float(result.target_norm_squared)
    delta_k = result.distance ** 2 / norm2 if norm2 > 0 else 0.0
    return result.state, float(delta_k), norm2


def sweep_rows(
    boundary: MatrixProductState,
    rows: Iterable[MatrixProductOperator],
    dtilde: int,
    delta_k_tolerance: Optional[float] = None,
    max_dtilde: Optional[int] = None,
    keep_history: bool = False,
    stage: str = "boundary",
) -> BoundaryResult:
    """
    Push a boundary MPS through row operators, compressing after each row.

    Args:
        boundary: Starting boundary (e.g. the first row of a grid as an MPS)
        rows: Row operators applied in order
        dtilde: Bond dimension of the compressed boundary
        delta_k_tolerance: If set, a cut whose delta_K exceeds it is redone
            with twice the bond until it passes or max_dtilde is reached
        max_dtilde: Upper limit of the automatic increase
        keep_history: Store the normalized boundary after every row
        stage: Label for the compression log events

    Returns:
        BoundaryResult; the contracted value is exp(log_scale) times the
        normalized state
    """
    if dtilde < 1:
        raise DomainError(f"Dtilde must be >= 1, got {dtilde}")
    max_dtilde = dtilde if max_dtilde is None else max(max_dtilde, dtilde)
    psi, log_scale = _normalize(boundary)
    result = BoundaryResult(psi, log_scale, dtilde=dtilde)
    if keep_history:
        result.history.append(psi)
        result.history_scales.append(log_scale)

    for index, row in enumerate(rows):
        compressed, delta_k, norm2 = compress_boundary(row, result.state, result.dtilde)
        while delta_k_tolerance is not None and delta_k > delta_k_tolerance and result.dtilde < max_dtilde:
            result.dtilde = min(2 * result.dtilde, max_dtilde)
            logger.info("Raising boundary bond", row=index, delta_k=delta_k, dtilde=result.dtilde)
            compressed, delta_k, norm2 = compress_boundary(row, result.state, result.dtilde)
        log_compression_event(stage, delta_k, result.dtilde, row=index)
        if norm2 <= 0.0:
            raise DegenerateStateError(f"row {index} annihilated the boundary")
        # the carried scale is the norm of the boundary actually kept
        compressed, log_norm = _normalize(compressed)
        result.state = compressed
        result.log_scale += log_norm
        result.delta_ks.append(delta_k)
        if keep_history:
            result.history.append(compressed)
            result.history_scales.append(result.log_scale)
    return result


def close_boundary(psi: MatrixProductState) -> complex:
    """Sum over the remaining physical indices (all of extent 1 after the last row)."""
    m = np.ones((1,), dtype=np.complex128)
    for a in psi.sites:
        m = m @ a.sum(axis=2)
    return complex(m[0])
