"""
Variational bond reduction of a state towards a fixed target.

The target is either a state or a product op|ket>. Products are never
formed: a zip-up pass gives the start and the sweeps carry the operator
inside the environments of <psi|op|ket>.
"""

from typing import List, NamedTuple, Optional, Tuple

import numpy as np
from opt_einsum import contract

from config import settings
from exceptions import DimensionError, UnsupportedGaugeError
from modules.mpo import MatrixProductOperator, apply_mpo
from modules.mps import (
    Boundary,
    CanonicalForm,
    MatrixProductState,
    canonicalize_with_norm,
    norm_squared,
    overlap,
    truncate,
)
from modules.mps.transfer import sandwich
from modules.optimize import SweepConfig, minimize_quadratic
from modules.tensor_core import truncated_svd
from utils.logging import log_compression_event


class CompressionResult(NamedTuple):
    state: MatrixProductState
    distance: float
    converged: bool
    history: List[float]
    target_norm_squared: Optional[float] = None
    norm_exact: bool = True


def state_distance(a: MatrixProductState, b: MatrixProductState) -> float:
    """||a - b|| from the three overlaps."""
    squared = overlap(b, b).real + overlap(a, a).real - 2.0 * overlap(a, b).real
    return float(np.sqrt(max(squared, 0.0)))


def compress_variational(
    target: MatrixProductState,
    bond: int,
    precision: Optional[float] = None,
    max_sweeps: Optional[int] = None,
    initial: Optional[MatrixProductState] = None,
) -> CompressionResult:
    """
    Best bond-D approximation of target in the 2-norm.

    The start is the Schmidt truncation of the target; every site solve
    then minimizes ||psi - target||^2 exactly, so the distance never
    increases from one site update to the next.

    Args:
        target: Open-boundary state of any bond
        bond: Bond dimension D of the result
        precision: Relative spread of the per-site objective that ends the sweeps
        max_sweeps: Sweep limit
        initial: Optional starting state (bond D)

    Returns:
        CompressionResult with the distance recomputed from overlaps
    """
    if target.boundary != Boundary.OPEN:
        raise UnsupportedGaugeError("variational compression needs an open chain")
    precision = settings.default_precision if precision is None else precision
    max_sweeps = settings.max_sweeps if max_sweeps is None else max_sweeps
    start = truncate(target, bond).state if initial is None else initial
    if target.max_bond <= bond and initial is None:
        distance = state_distance(start, target)
        return CompressionResult(start, distance, True, [])
    if target.n == 1:
        return CompressionResult(target, 0.0, True, [])

    start, _ = canonicalize_with_norm(start, CanonicalForm.RIGHT)
    cfg = SweepConfig(bond=bond, precision=precision, max_sweeps=max_sweeps)
    result = minimize_quadratic(None, [(target, None, 1.0)], start, cfg, solver="compression")
    distance = state_distance(result.state, target)
    log_compression_event("variational", distance, bond, sweeps=len(result.sweeps), converged=result.converged)
    return CompressionResult(result.state, distance, result.converged, result.history)


# ----------------------------------------------------------------------
# Products op|ket>
# ----------------------------------------------------------------------

def _check_product(op: MatrixProductOperator, ket: MatrixProductState) -> None:
    if ket.boundary != Boundary.OPEN or op.boundary != Boundary.OPEN:
        raise UnsupportedGaugeError("product compression needs open chains")
    if op.n != ket.n or op.in_dims != ket.phys_dims:
        raise DimensionError(f"operator dims {op.in_dims} do not match state dims {ket.phys_dims}")


def product_norm_entries(op: MatrixProductOperator, ket: MatrixProductState) -> int:
    """Largest intermediate of <ket| op^dag op |ket>."""
    return ket.max_bond ** 2 * op.max_bond ** 2 * max(op.out_dims)


def product_norm_squared(op: MatrixProductOperator, ket: MatrixProductState) -> float:
    """||op ket||^2 as <ket| op^dag op |ket>."""
    _check_product(op, ket)
    return float(sandwich(ket.sites, ket.sites, [op.adjoint().sites, op.sites]).real)


def product_overlap(psi: MatrixProductState, op: MatrixProductOperator, ket: MatrixProductState) -> complex:
    """<psi| op |ket>."""
    return sandwich(psi.sites, ket.sites, [op.sites])


def _zip_up(op: MatrixProductOperator, ket: MatrixProductState, bond: int) -> Tuple[MatrixProductState, float]:
    sites = []
    dropped = 0.0
    # carry[new bond, operator bond, ket bond]
    carry = np.ones((1, 1, 1), dtype=np.complex128)
    for k, (w, a) in enumerate(zip(op.sites, ket.sites)):
        local = contract("xwb,wvst,bct->xsvc", carry, w, a)
        x, s, v, c = local.shape
        if k == op.n - 1:
            sites.append(local.reshape(x, s, v * c).transpose(0, 2, 1))
            break
        (u, sv, vh), discarded = truncated_svd(local.reshape(x * s, v * c), bond)
        dropped += discarded
        kept = len(sv)
        sites.append(u.reshape(x, s, kept).transpose(0, 2, 1))
        carry = (sv[:, None] * vh).reshape(kept, v, c)
    return MatrixProductState(tuple(sites)), dropped


def zip_up(op: MatrixProductOperator, ket: MatrixProductState, bond: int) -> MatrixProductState:
    """
    op|ket> applied site by site from the left, each new bond cut to `bond`
    by an SVD as soon as it appears.
    """
    _check_product(op, ket)
    return _zip_up(op, ket, bond)[0]


def compress_product(
    op: MatrixProductOperator,
    ket: MatrixProductState,
    bond: int,
    precision: Optional[float] = None,
    max_sweeps: Optional[int] = None,
) -> CompressionResult:
    """
    Best bond-D approximation of op|ket> without forming the product.

    Args:
        op: Open MPO whose input dims match the ket
        ket: Open-boundary state
        bond: Bond dimension D of the result
        precision: Relative spread of the per-site objective that ends the sweeps
        max_sweeps: Sweep limit

    Returns:
        CompressionResult; the distance is ||psi - op ket|| from
        <psi|psi>, <psi|op|ket> and <ket|op^dag op|ket>. When that last
        contraction would exceed settings.product_norm_max_entries the
        zip-up truncation weight stands in for the distance and
        norm_exact is False.
    """
    _check_product(op, ket)
    precision = settings.default_precision if precision is None else precision
    max_sweeps = settings.max_sweeps if max_sweeps is None else max_sweeps
    if op.max_bond * ket.max_bond <= bond:
        exact = apply_mpo(op, ket)
        return CompressionResult(exact, 0.0, True, [], norm_squared(exact))

    start, dropped = _zip_up(op, ket, bond)
    norm_exact = product_norm_entries(op, ket) <= settings.product_norm_max_entries
    target_norm2 = product_norm_squared(op, ket) if norm_exact else norm_squared(start) + dropped
    if target_norm2 <= 0.0 or start.n == 1:
        return CompressionResult(start, 0.0, True, [], target_norm2, norm_exact)
    start, _ = canonicalize_with_norm(start, CanonicalForm.RIGHT)
    cfg = SweepConfig(bond=bond, precision=precision, max_sweeps=max_sweeps)
    result = minimize_quadratic(None, [(ket, op, 1.0)], start, cfg, solver="compression")
    psi = result.state
    if norm_exact:
        squared = norm_squared(psi) + target_norm2 - 2.0 * product_overlap(psi, op, ket).real
    else:
        squared = dropped
    distance = float(np.sqrt(max(squared, 0.0)))
    log_compression_event("product", distance, bond, sweeps=len(result.sweeps), converged=result.converged,
                          norm_exact=norm_exact)
    return CompressionResult(psi, distance, result.converged, result.history, target_norm2, norm_exact)
