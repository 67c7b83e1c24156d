"""
Overlaps, expectation values and Schmidt spectra.

Expectation values follow the normalized convention (division by
<psi|psi>); the *_raw variants return the bare sandwich.
"""

from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Sequence

import numpy as np

from exceptions import DegenerateStateError, DimensionError, UnsupportedGaugeError
from modules.tensor_core import as_tensor, operator_schmidt, svd_econ

from .gauge import canonicalize
from .state import Boundary, CanonicalForm, MatrixProductState
from .transfer import sandwich


def _check_pair(a: MatrixProductState, b: MatrixProductState) -> None:
    if a.n != b.n or a.phys_dims != b.phys_dims:
        raise DimensionError(
            f"states differ in shape: n={a.n}/{b.n}, d={a.phys_dims}/{b.phys_dims}"
        )


def overlap(a: MatrixProductState, b: MatrixProductState, from_right: bool = False) -> complex:
    """<a|b> (antilinear in a)."""
    _check_pair(a, b)
    return sandwich(a.sites, b.sites, from_right=from_right)


def norm_squared(psi: MatrixProductState) -> float:
    return float(overlap(psi, psi).real)


def _product_layer(psi: MatrixProductState, ops: Mapping[int, np.ndarray]):
    layer = []
    for k, d in enumerate(psi.phys_dims):
        op = ops.get(k)
        if op is None:
            op = np.eye(d)
        op = as_tensor(op)
        if op.shape != (d, d):
            raise DimensionError(f"operator at site {k} must be {d}x{d}, got {op.shape}")
        layer.append(op.reshape(1, 1, d, d))
    return layer


def _as_site_map(ops) -> Dict[int, np.ndarray]:
    if isinstance(ops, Mapping):
        return dict(ops)
    return {k: op for k, op in enumerate(ops) if op is not None}


def expect_product_raw(psi: MatrixProductState, ops, from_right: bool = False) -> complex:
    """<psi| O_1 x ... x O_N |psi> without normalization."""
    layer = _product_layer(psi, _as_site_map(ops))
    return sandwich(psi.sites, psi.sites, [layer], from_right=from_right)


def expect_product(psi: MatrixProductState, ops, from_right: bool = False) -> complex:
    """
    Normalized expectation of a tensor product of local operators.

    Args:
        psi: State
        ops: Mapping site -> d x d operator, or a per-site list with None for identity
        from_right: Contract right-to-left

    Returns:
        <psi|O|psi> / <psi|psi>
    """
    norm = norm_squared(psi)
    if norm == 0.0:
        raise DegenerateStateError("expectation value of a zero-norm state")
    return expect_product_raw(psi, ops, from_right) / norm


def expect_two_site(psi: MatrixProductState, site: int, op: np.ndarray) -> complex:
    """Normalized expectation of a two-site operator on (site, site + 1)."""
    d_left, d_right = psi.phys_dims[site], psi.phys_dims[(site + 1) % psi.n]
    lefts, rights = operator_schmidt(as_tensor(op), d_left, d_right, cutoff=0.0)
    norm = norm_squared(psi)
    if norm == 0.0:
        raise DegenerateStateError("expectation value of a zero-norm state")
    total = 0.0 + 0.0j
    for left, right in zip(lefts, rights):
        total += expect_product_raw(psi, {site: left, (site + 1) % psi.n: right})
    return total / norm


def correlation(psi: MatrixProductState, op_a: np.ndarray, site_a: int,
                op_b: np.ndarray, site_b: int) -> complex:
    """<O_a O_b> - <O_a><O_b>."""
    if site_a == site_b:
        joint = expect_product(psi, {site_a: as_tensor(op_a) @ as_tensor(op_b)})
    else:
        joint = expect_product(psi, {site_a: op_a, site_b: op_b})
    return joint - expect_product(psi, {site_a: op_a}) * expect_product(psi, {site_b: op_b})


@dataclass(frozen=True)
class SchmidtSpectrum:
    """Schmidt coefficients of the cut after `bond` sites."""

    bond: int
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "coefficients", np.asarray(self.coefficients, dtype=float))

    @property
    def probabilities(self) -> np.ndarray:
        return self.coefficients ** 2

    def entropy(self) -> float:
        """Von Neumann entanglement entropy (natural log)."""
        p = self.probabilities
        p = p[p > 0.0]
        return float(max(0.0, -np.sum(p * np.log(p))))

    def renyi(self, alpha: float) -> float:
        """Renyi entropy log(sum p^alpha) / (1 - alpha); alpha = 1 is von Neumann."""
        if alpha < 0.0:
            raise ValueError(f"Renyi index must be non-negative, got {alpha}")
        if np.isclose(alpha, 1.0):
            return self.entropy()
        p = self.probabilities
        p = p[p > 0.0]
        return float(max(0.0, np.log(np.sum(p ** alpha)) / (1.0 - alpha)))

    def tail_weight(self, bond_dim: int) -> float:
        """Sum of squared coefficients beyond the first bond_dim."""
        return float(np.sum(self.probabilities[bond_dim:]))


def schmidt_spectrum(psi: MatrixProductState, bond: int) -> SchmidtSpectrum:
    """
    Schmidt coefficients of the bipartition (sites 1..k | k+1..N), 1-based k.

    Raises:
        UnsupportedGaugeError: For periodic states
    """
    if psi.boundary != Boundary.OPEN:
        raise UnsupportedGaugeError("Schmidt spectra need an open chain")
    if not 1 <= bond < psi.n:
        raise ValueError(f"bond must satisfy 1 <= k < {psi.n}, got {bond}")
    mixed = canonicalize(psi, CanonicalForm.MIXED, center=bond - 1)
    a = mixed.sites[bond - 1]
    dl, dr, d = a.shape
    s = svd_econ(a.transpose(0, 2, 1).reshape(dl * d, dr)).s
    return SchmidtSpectrum(bond=bond, coefficients=s)


def entanglement_profile(psi: MatrixProductState, alpha: Optional[float] = None) -> Sequence[float]:
    """Entropy (or Renyi-alpha entropy) at every bond of an open chain."""
    spectra = [schmidt_spectrum(psi, k) for k in range(1, psi.n)]
    if alpha is None:
        return [s.entropy() for s in spectra]
    return [s.renyi(alpha) for s in spectra]
