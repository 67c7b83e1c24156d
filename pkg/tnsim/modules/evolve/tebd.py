"""
Gate application with Schmidt truncation.

The state is kept mixed canonical with the center moving along with the
active gate, so the singular values of every two-site block are the
Schmidt coefficients of the current cut and dropping the smallest ones
is the optimal local truncation.
"""

from typing import NamedTuple

import numpy as np

from exceptions import DimensionError, UnsupportedGaugeError
from modules.mps import (
    Boundary,
    CanonicalForm,
    MatrixProductState,
    canonicalize_with_norm,
    shift_center,
)
from modules.tensor_core import truncated_svd

from .trotter import GateLayer


class TebdResult(NamedTuple):
    state: MatrixProductState
    discarded_weight: float


def _mixed_sites(psi: MatrixProductState):
    if psi.canonical == CanonicalForm.MIXED:
        return list(psi.sites), psi.center
    if psi.canonical == CanonicalForm.RIGHT:
        return list(psi.sites), 0
    if psi.canonical == CanonicalForm.LEFT:
        return list(psi.sites), psi.n - 1
    state, norm = canonicalize_with_norm(psi, CanonicalForm.MIXED, 0)
    sites = list(state.sites)
    sites[0] = sites[0] * norm
    return sites, 0


def tebd_step(psi: MatrixProductState, layer: GateLayer, bond: int) -> TebdResult:
    """
    Apply a layer of non-overlapping gates and cut each touched bond to `bond`.

    Args:
        psi: Open-boundary state (any gauge; the norm is carried along)
        layer: Gate layer (one- or two-site gates)
        bond: Maximal bond dimension D

    Returns:
        TebdResult; discarded_weight is the sum over gates of the dropped
        squared Schmidt coefficients relative to the block weight
    """
    if psi.boundary != Boundary.OPEN:
        raise UnsupportedGaugeError("TEBD needs an open chain")
    if layer.is_mpo:
        raise DimensionError("tebd_step applies gate layers; compress MPO layers variationally")
    sites, center = _mixed_sites(psi)
    discarded = 0.0
    for gate in sorted(layer.gates, key=lambda g: g.sites[0]):
        if len(gate.sites) == 1:
            k = gate.sites[0]
            sites[k] = np.einsum("ts,abs->abt", gate.matrix, sites[k])
            continue
        k, j = gate.sites
        if j != k + 1:
            raise DimensionError(f"gate on {gate.sites} is not a neighbouring pair")
        center = shift_center(sites, center, k)
        a, b = sites[k], sites[k + 1]
        dl, d1, d2, dr = a.shape[0], a.shape[2], b.shape[2], b.shape[1]
        theta = np.einsum("abs,bct->astc", a, b)
        theta = np.einsum("uvst,astc->auvc", gate.matrix.reshape(d1, d2, d1, d2), theta)
        (u, s, v), dropped = truncated_svd(theta.reshape(dl * d1, d2 * dr), bond)
        total = float(np.sum(s ** 2)) + dropped
        if total > 0.0:
            discarded += dropped / total
        sites[k] = u.reshape(dl, d1, -1).transpose(0, 2, 1)
        sites[k + 1] = (s[:, None] * v).reshape(-1, d2, dr).transpose(0, 2, 1)
        center = k + 1
    return TebdResult(psi.with_sites(sites, CanonicalForm.MIXED, center), discarded)
