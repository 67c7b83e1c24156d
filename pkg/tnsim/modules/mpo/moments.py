"""Expectation values of MPOs and the first two Hamiltonian moments."""

from typing import List, NamedTuple, Union

import numpy as np

from exceptions import DegenerateStateError, DimensionError
from modules.mps import MatrixProductState, expect_two_site, norm_squared
from modules.mps.transfer import sandwich
from modules.tensor_core import as_tensor

from .hamiltonian import HamiltonianSpec
from .operator import MatrixProductOperator, as_mpo


class Moments(NamedTuple):
    e1: float
    e2: float

    @property
    def variance(self) -> float:
        return self.e2 - self.e1 ** 2


def _layer_sandwich(psi: MatrixProductState, op: MatrixProductOperator, power: int) -> complex:
    if op.n != psi.n or op.in_dims != psi.phys_dims:
        raise DimensionError(f"operator dims {op.in_dims} do not match state dims {psi.phys_dims}")
    return sandwich(psi.sites, psi.sites, [op.sites] * power)


def _norm(psi: MatrixProductState) -> float:
    norm = norm_squared(psi)
    if norm == 0.0:
        raise DegenerateStateError("moments of a zero-norm state")
    return norm


def mpo_expectation(psi: MatrixProductState, op: Union[HamiltonianSpec, MatrixProductOperator]) -> complex:
    """Normalized <psi|O|psi>."""
    return _layer_sandwich(psi, as_mpo(op), 1) / _norm(psi)


def h_moments(psi: MatrixProductState, spec: Union[HamiltonianSpec, MatrixProductOperator]) -> Moments:
    """
    <H> and <H^2> of a state, normalized by <psi|psi>.

    The second moment contracts two MPO layers, so no squared MPO is
    formed; the cost is O(N d^2 D^3 w^2) for MPO bond w.
    """
    op = as_mpo(spec)
    norm = _norm(psi)
    e1 = _layer_sandwich(psi, op, 1) / norm
    e2 = _layer_sandwich(psi, op, 2) / norm
    return Moments(float(e1.real), float(e2.real))


def apply_site_operator(psi: MatrixProductState, site: int, op: np.ndarray) -> MatrixProductState:
    """Act with a single-site operator; bond dimensions are unchanged."""
    op = as_tensor(op)
    d = psi.phys_dims[site]
    if op.shape[1] != d:
        raise DimensionError(f"operator of shape {op.shape} cannot act on site {site} of dim {d}")
    sites = list(psi.sites)
    sites[site] = np.einsum("ts,abs->abt", op, sites[site])
    return psi.with_sites(sites)


def bond_energies(psi: MatrixProductState, spec: HamiltonianSpec) -> List[float]:
    """Normalized <h_(i,j)> for every bond of a chain spec (wrap bond last)."""
    energies = []
    for i, j in spec.bonds():
        site = i if (j - i) % psi.n == 1 else j
        energies.append(float(expect_two_site(psi, site, spec.bond_operator(site, (site + 1) % psi.n)).real))
    return energies
