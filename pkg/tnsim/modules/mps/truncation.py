"""
Bond truncation and the a-priori approximation bounds.

truncate() right-canonicalizes once and then cuts every bond while
sweeping left to right, so each cut keeps the largest Schmidt
coefficients of the already-truncated state. The total discarded weight
bounds the error: ||psi - psi_D||^2 <= 2 * sum of discarded weights.
"""

from typing import NamedTuple, Sequence, Tuple, Union

import numpy as np

from exceptions import DomainError, UnsupportedGaugeError
from modules.tensor_core import truncated_svd

from .gauge import canonicalize_with_norm
from .measure import SchmidtSpectrum, norm_squared, overlap
from .state import Boundary, CanonicalForm, MatrixProductState


class TruncationResult(NamedTuple):
    state: MatrixProductState
    discarded_weight: float


class ApproximationBounds(NamedTuple):
    truncation_bound: float
    renyi_tail_bound: float


def truncate(psi: MatrixProductState, new_bond: int) -> TruncationResult:
    """
    Cut every bond of an open chain to at most new_bond.

    Args:
        psi: Open-boundary state (any gauge)
        new_bond: Target bond dimension D' >= 1

    Returns:
        TruncationResult; the state keeps the input norm and is mixed
        canonical with the center on the last site. discarded_weight is the
        sum over bonds of the squared dropped (relative) Schmidt coefficients.
    """
    if psi.boundary != Boundary.OPEN:
        raise UnsupportedGaugeError("truncation needs an open chain")
    if new_bond < 1:
        raise ValueError(f"bond dimension must be >= 1, got {new_bond}")
    right, norm = canonicalize_with_norm(psi, CanonicalForm.RIGHT)
    sites = list(right.sites)
    discarded = 0.0
    for k in range(psi.n - 1):
        dl, dr, d = sites[k].shape
        (u, s, v), dropped = truncated_svd(sites[k].transpose(0, 2, 1).reshape(dl * d, dr), new_bond)
        discarded += dropped
        sites[k] = u.reshape(dl, d, -1).transpose(0, 2, 1)
        sites[k + 1] = np.einsum("ab,bcs->acs", s[:, None] * v, sites[k + 1])
    last_norm = float(np.linalg.norm(sites[-1]))
    if last_norm > 0.0:
        sites[-1] = sites[-1] * (norm / last_norm)
    state = psi.with_sites(sites, CanonicalForm.MIXED, psi.n - 1)
    return TruncationResult(state, discarded)


def _probabilities(spectrum) -> Sequence[np.ndarray]:
    if isinstance(spectrum, SchmidtSpectrum):
        return [spectrum.probabilities]
    if isinstance(spectrum, np.ndarray) and spectrum.ndim == 1:
        return [np.sort(np.clip(spectrum.real, 0.0, None))[::-1]]
    return [s.probabilities if isinstance(s, SchmidtSpectrum) else np.asarray(s, dtype=float)
            for s in spectrum]


def renyi_from_probabilities(p: np.ndarray, alpha: float) -> float:
    p = p[p > 0.0]
    return float(np.log(np.sum(p ** alpha)) / (1.0 - alpha))


def approximation_bounds(
    spectrum: Union[SchmidtSpectrum, Sequence[SchmidtSpectrum], np.ndarray],
    bond_dim: int,
    alpha: float,
) -> ApproximationBounds:
    """
    A-priori error bounds for keeping bond_dim Schmidt values.

    truncation_bound = 2 * sum over cuts of eps(D), eps(D) the discarded weight.
    renyi_tail_bound = sum over cuts of
        exp(((1 - alpha) / alpha) * (S_alpha - log(D / (1 - alpha)))),
    an upper bound on each eps(D) from the Renyi-alpha entropy S_alpha.

    Args:
        spectrum: Schmidt spectrum, list of spectra, or density-matrix eigenvalues
        bond_dim: Kept dimension D >= 1
        alpha: Renyi index in (0, 1)

    Raises:
        DomainError: If alpha lies outside (0, 1)
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if bond_dim < 1:
        raise DomainError(f"bond dimension must be >= 1, got {bond_dim}")
    truncation = 0.0
    renyi_tail = 0.0
    for p in _probabilities(spectrum):
        p = np.sort(p)[::-1]
        truncation += 2.0 * float(np.sum(p[bond_dim:]))
        s_alpha = renyi_from_probabilities(p, alpha)
        renyi_tail += float(np.exp(((1.0 - alpha) / alpha) * (s_alpha - np.log(bond_dim / (1.0 - alpha)))))
    return ApproximationBounds(truncation, renyi_tail)


def truncation_bound_check(psi: MatrixProductState, new_bond: int) -> Tuple[float, float]:
    """(squared truncation error, 2 * discarded weight) for a normalized copy of psi."""
    scale = np.sqrt(norm_squared(psi))
    unit = psi.scaled(1.0 / scale)
    cut, weight = truncate(unit, new_bond)
    error = norm_squared(unit) + norm_squared(cut) - 2.0 * overlap(unit, cut).real
    return max(0.0, float(error)), 2.0 * weight
