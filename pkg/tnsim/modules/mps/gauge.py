"""
Gauge transformations: canonical forms and the Vidal (Gamma/Lambda) form.

Site-level QR moves use a positive diagonal in R, which makes the QR
unique for full-rank input: re-canonicalizing a canonical state is the
identity.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np

from exceptions import DegenerateStateError, UnsupportedGaugeError
from modules.tensor_core import numerical_rank, svd_econ

from .state import Boundary, CanonicalForm, MatrixProductState


def _qr_positive(m: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    q, r = np.linalg.qr(m)
    diag = np.diagonal(r)
    phases = np.where(np.abs(diag) > 0, diag / np.where(diag == 0, 1, np.abs(diag)), 1.0)
    return q * phases, phases.conj()[:, None] * r


def left_orthonormalize_site(a: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Split a = Q R with Q a left isometry (sum_i Q^i dag Q^i = I)."""
    dl, dr, d = a.shape
    q, r = _qr_positive(a.transpose(0, 2, 1).reshape(dl * d, dr))
    return q.reshape(dl, d, -1).transpose(0, 2, 1), r


def right_orthonormalize_site(a: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Split a = L Q with Q a right isometry (sum_i Q^i Q^i dag = I)."""
    dl, dr, d = a.shape
    q, r = _qr_positive(a.reshape(dl, dr * d).conj().T)
    return r.conj().T, q.conj().T.reshape(-1, dr, d)


def absorb_into_next(r: np.ndarray, a: np.ndarray) -> np.ndarray:
    return np.einsum("ab,bcs->acs", r, a)


def absorb_into_previous(a: np.ndarray, l: np.ndarray) -> np.ndarray:
    return np.einsum("abs,bc->acs", a, l)


def shift_center(sites: List[np.ndarray], center: int, target: int) -> int:
    """
    Move the orthogonality center of a mixed-canonical chain in place.

    Returns:
        The new center (== target)
    """
    while center < target:
        q, r = left_orthonormalize_site(sites[center])
        sites[center] = q
        sites[center + 1] = absorb_into_next(r, sites[center + 1])
        center += 1
    while center > target:
        l, q = right_orthonormalize_site(sites[center])
        sites[center] = q
        sites[center - 1] = absorb_into_previous(sites[center - 1], l)
        center -= 1
    return center


def _require_open(psi: MatrixProductState, what: str) -> None:
    if psi.boundary != Boundary.OPEN:
        raise UnsupportedGaugeError(f"{what} is not defined for periodic boundary conditions")


def canonicalize_with_norm(
    psi: MatrixProductState,
    direction: Union[str, CanonicalForm] = CanonicalForm.LEFT,
    center: Optional[int] = None,
) -> Tuple[MatrixProductState, float]:
    """
    Bring an open chain to left, right or mixed canonical form.

    Args:
        psi: Open-boundary state
        direction: "left", "right" or "mixed"
        center: Orthogonality center for the mixed form

    Returns:
        (normalized state in the requested form, norm of the input)

    Raises:
        UnsupportedGaugeError: For periodic states
        DegenerateStateError: For zero-norm states
    """
    _require_open(psi, "a canonical form")
    direction = CanonicalForm(direction)
    n = psi.n
    sites = list(psi.sites)

    if direction == CanonicalForm.LEFT:
        target = n - 1
    elif direction == CanonicalForm.RIGHT:
        target = 0
    elif direction == CanonicalForm.MIXED:
        if center is None or not 0 <= center < n:
            raise ValueError(f"mixed form needs a center in [0, {n}), got {center}")
        target = center
    else:
        raise ValueError(f"cannot canonicalize towards {direction}")

    # left part
    for k in range(target):
        q, r = left_orthonormalize_site(sites[k])
        sites[k] = q
        sites[k + 1] = absorb_into_next(r, sites[k + 1])
    # right part
    for k in range(n - 1, target, -1):
        l, q = right_orthonormalize_site(sites[k])
        sites[k] = q
        sites[k - 1] = absorb_into_previous(sites[k - 1], l)

    norm = float(np.linalg.norm(sites[target]))
    if norm == 0.0:
        raise DegenerateStateError("cannot canonicalize a zero-norm state")
    sites[target] = sites[target] / norm
    # the outermost site of a fully left/right form is an isometry as well
    if direction == CanonicalForm.LEFT:
        q, r = left_orthonormalize_site(sites[target])
        sites[target] = q * r[0, 0]
    elif direction == CanonicalForm.RIGHT:
        l, q = right_orthonormalize_site(sites[target])
        sites[target] = q * l[0, 0]

    form_center = target if direction == CanonicalForm.MIXED else None
    return psi.with_sites(sites, direction, form_center), norm


def canonicalize(
    psi: MatrixProductState,
    direction: Union[str, CanonicalForm] = CanonicalForm.LEFT,
    center: Optional[int] = None,
) -> MatrixProductState:
    """Normalized canonical form; see canonicalize_with_norm."""
    return canonicalize_with_norm(psi, direction, center)[0]


def is_canonical(psi: MatrixProductState, form: Union[str, CanonicalForm], center: int = 0,
                 tol: float = 1e-10) -> bool:
    """Check the isometry conditions of a canonical form directly."""
    form = CanonicalForm(form)
    n = psi.n
    left_sites = {CanonicalForm.LEFT: range(n), CanonicalForm.RIGHT: range(0),
                  CanonicalForm.MIXED: range(center)}[form]
    right_sites = {CanonicalForm.LEFT: range(0), CanonicalForm.RIGHT: range(n),
                   CanonicalForm.MIXED: range(center + 1, n)}[form]
    for k in left_sites:
        a = psi.sites[k]
        gram = np.einsum("abs,acs->bc", a.conj(), a)
        if not np.allclose(gram, np.eye(a.shape[1]), atol=tol):
            return False
    for k in right_sites:
        a = psi.sites[k]
        gram = np.einsum("abs,cbs->ac", a, a.conj())
        if not np.allclose(gram, np.eye(a.shape[0]), atol=tol):
            return False
    return True


@dataclass(frozen=True)
class VidalForm:
    """
    Gamma/Lambda parametrization: psi = G_0 L_1 G_1 L_2 ... G_{n-1}.

    lambdas[k - 1] holds the Schmidt coefficients of the cut after k sites.
    """

    gammas: Tuple[np.ndarray, ...]
    lambdas: Tuple["SchmidtSpectrum", ...]

    def to_mps(self) -> MatrixProductState:
        """Reassemble as a right-canonical state (B_k = G_k L_{k+1})."""
        sites = []
        for k, gamma in enumerate(self.gammas):
            if k < len(self.lambdas):
                sites.append(gamma * self.lambdas[k].coefficients[None, :, None])
            else:
                sites.append(gamma)
        return MatrixProductState(tuple(sites), canonical=CanonicalForm.RIGHT)


def vidal_gauge(psi: MatrixProductState) -> VidalForm:
    """
    Vidal form of an open chain.

    Singular values below the zero cutoff are dropped so that every
    Lambda is invertible.
    """
    from .measure import SchmidtSpectrum

    _require_open(psi, "the Vidal gauge")
    left, _ = canonicalize_with_norm(psi, CanonicalForm.LEFT)
    sites = list(left.sites)
    n = psi.n
    rights: List[np.ndarray] = [None] * n
    spectra: List[SchmidtSpectrum] = [None] * (n - 1)
    for k in range(n - 1, 0, -1):
        dl, dr, d = sites[k].shape
        u, s, v = svd_econ(sites[k].reshape(dl, dr * d))
        keep = max(1, numerical_rank(s))
        u, s, v = u[:, :keep], s[:keep], v[:keep, :]
        rights[k] = v.reshape(keep, dr, d)
        spectra[k - 1] = SchmidtSpectrum(bond=k, coefficients=s)
        sites[k - 1] = absorb_into_previous(sites[k - 1], u * s[None, :])
    rights[0] = sites[0]

    gammas = []
    for k in range(n):
        if k < n - 1:
            gammas.append(rights[k] / spectra[k].coefficients[None, :, None])
        else:
            gammas.append(rights[k])
    return VidalForm(tuple(gammas), tuple(spectra))
