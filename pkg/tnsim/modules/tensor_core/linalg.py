"""
Small Hermitian eigen- and linear solvers.

eig_smallest switches from a dense LAPACK solve to a restarted Lanczos
iteration with full reorthogonalization above settings.eig_dense_max_dim.
Effective operators can be handed over as scipy LinearOperators so the
iterative branch never materializes them.
"""

import warnings
from typing import Callable, NamedTuple, Optional, Union

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import LinearOperator, aslinearoperator

from config import settings
from exceptions import ConditioningError, DimensionError, NumericInputError, SingularSystemError
from utils.logging import get_logger

logger = get_logger("tensor_core.linalg")

MatrixLike = Union[np.ndarray, LinearOperator]


class EigenPair(NamedTuple):
    """Smallest eigenvalue and its eigenvector."""

    value: float
    vector: np.ndarray


class PsdProjection(NamedTuple):
    """Positive semi-definite part of a nearly Hermitian matrix."""

    matrix: np.ndarray
    hermitian_defect: float
    clipped_weight: float


def _check_hermitian(a: np.ndarray, name: str, tol: float = 1e-10) -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericInputError(f"{name} contains NaN or infinite entries")
    scale = max(1.0, float(np.max(np.abs(a))) if a.size else 1.0)
    if np.max(np.abs(a - a.conj().T), initial=0.0) > tol * scale:
        raise DimensionError(f"{name} is not Hermitian within {tol}")


def _start_vector(dim: int) -> np.ndarray:
    # deterministic and generically non-orthogonal to any eigenvector
    v = np.ones(dim, dtype=np.complex128) + 0.1 * np.cos(np.arange(dim))
    return v / np.linalg.norm(v)


def lanczos_smallest(
    matvec: Callable[[np.ndarray], np.ndarray],
    dim: int,
    v0: Optional[np.ndarray] = None,
    krylov_dim: Optional[int] = None,
    tol: Optional[float] = None,
    max_restarts: Optional[int] = None,
) -> EigenPair:
    """
    Smallest eigenpair of a Hermitian operator by restarted Lanczos.

    Each restart builds a fully reorthogonalized Krylov basis from the best
    Ritz vector of the previous one.

    Args:
        matvec: Function applying the operator to a vector
        dim: Operator dimension
        v0: Optional start vector (warm start)
        krylov_dim: Krylov basis size per restart
        tol: Residual tolerance relative to max(1, |value|)
        max_restarts: Restart limit

    Returns:
        EigenPair with unit-norm eigenvector
    """
    krylov_dim = min(dim, krylov_dim or settings.lanczos_krylov_dim)
    tol = settings.lanczos_tol if tol is None else tol
    max_restarts = max_restarts or settings.lanczos_max_restarts

    v = _start_vector(dim) if v0 is None else np.asarray(v0, dtype=np.complex128).ravel()
    norm = np.linalg.norm(v)
    if norm == 0.0:
        v, norm = _start_vector(dim), 1.0
    v = v / norm

    theta, ritz = 0.0, v
    for restart in range(max_restarts):
        basis = np.zeros((dim, krylov_dim), dtype=np.complex128)
        alpha, beta = [], []
        basis[:, 0] = v
        exhausted = False
        for j in range(krylov_dim):
            w = np.asarray(matvec(basis[:, j]), dtype=np.complex128).ravel()
            a = float(np.vdot(basis[:, j], w).real)
            alpha.append(a)
            # two passes of classical Gram-Schmidt against the whole basis
            for _ in range(2):
                w = w - basis[:, : j + 1] @ (basis[:, : j + 1].conj().T @ w)
            b = float(np.linalg.norm(w))
            if j == krylov_dim - 1:
                break
            if b < 1e-14 * max(1.0, abs(a)):
                exhausted = True
                break
            beta.append(b)
            basis[:, j + 1] = w / b

        m = len(alpha)
        if m == 1:
            values, vectors = np.array(alpha), np.ones((1, 1))
        else:
            values, vectors = scipy.linalg.eigh_tridiagonal(
                np.array(alpha), np.array(beta[: m - 1]), select="i", select_range=(0, 0)
            )
        theta = float(values[0])
        ritz = basis[:, :m] @ vectors[:, 0]
        ritz /= np.linalg.norm(ritz)
        residual = float(np.linalg.norm(np.asarray(matvec(ritz)).ravel() - theta * ritz))
        if exhausted or residual <= tol * max(1.0, abs(theta)):
            logger.debug(f"Lanczos converged after {restart + 1} restarts", residual=residual, dim=dim)
            return EigenPair(theta, ritz)
        v = ritz

    logger.warning("Lanczos hit the restart limit", dim=dim, residual=residual, value=theta)
    return EigenPair(theta, ritz)


def _check_metric(n: np.ndarray) -> None:
    w = scipy.linalg.eigvalsh(n)
    smallest, largest = float(w[0]), float(w[-1])
    if smallest <= 0.0 or largest / smallest > settings.conditioning_max:
        raise ConditioningError(
            f"metric is indefinite or ill-conditioned (smallest eigenvalue {smallest:.3e}, "
            f"largest {largest:.3e})",
            smallest_eigenvalue=smallest,
            largest_eigenvalue=largest,
        )


def eig_smallest(
    h: MatrixLike,
    n: Optional[np.ndarray] = None,
    projector: Optional[np.ndarray] = None,
    v0: Optional[np.ndarray] = None,
) -> EigenPair:
    """
    Algebraically smallest eigenpair of h x = lambda n x.

    With a projector P (isometry onto the admissible subspace) the problem
    P^dag h P y = lambda P^dag n P y is solved and x = P y is returned.

    Args:
        h: Hermitian matrix or LinearOperator
        n: Optional positive-definite metric
        projector: Optional isometry (dim x m)
        v0: Optional warm-start vector in the full space

    Returns:
        EigenPair, vector normalized so that x^dag n x = 1 (unit norm without n)

    Raises:
        ConditioningError: If the (projected) metric is indefinite or ill-conditioned
    """
    dim = h.shape[0]
    if isinstance(h, np.ndarray):
        h = np.asarray(h, dtype=np.complex128)
        _check_hermitian(h, "h")
    if n is not None:
        n = np.asarray(n, dtype=np.complex128)
        _check_hermitian(n, "n")
        if n.shape != (dim, dim):
            raise DimensionError(f"metric shape {n.shape} does not match h {h.shape}")

    if projector is not None:
        p = np.asarray(projector, dtype=np.complex128)
        if p.shape[0] != dim:
            raise DimensionError(f"projector rows {p.shape[0]} do not match dimension {dim}")
        if isinstance(h, np.ndarray):
            h_red = p.conj().T @ h @ p
        else:
            h_op = aslinearoperator(h)
            h_red = LinearOperator(
                (p.shape[1], p.shape[1]),
                matvec=lambda y: p.conj().T @ h_op.matvec(p @ y),
                dtype=np.complex128,
            )
        n_red = None if n is None else p.conj().T @ n @ p
        y0 = None if v0 is None else p.conj().T @ np.ravel(v0)
        value, y = _eig_smallest_unprojected(h_red, n_red, y0)
        return EigenPair(value, p @ y)

    return EigenPair(*_eig_smallest_unprojected(h, n, v0))


def _eig_smallest_unprojected(h: MatrixLike, n: Optional[np.ndarray], v0) -> EigenPair:
    dim = h.shape[0]
    if n is not None:
        _check_metric(n)

    if dim <= settings.eig_dense_max_dim:
        if not isinstance(h, np.ndarray):
            h = aslinearoperator(h).matmat(np.eye(dim, dtype=np.complex128))
        h = 0.5 * (h + h.conj().T)
        if n is not None:
            n = 0.5 * (n + n.conj().T)
        values, vectors = scipy.linalg.eigh(h, n, subset_by_index=[0, 0])
        return EigenPair(float(values[0]), vectors[:, 0])

    h_op = aslinearoperator(h)
    if n is None:
        return lanczos_smallest(h_op.matvec, dim, v0=v0)

    # generalized problem through the Cholesky factor n = L L^dag
    chol = scipy.linalg.cholesky(0.5 * (n + n.conj().T), lower=True)

    def matvec(y):
        x = scipy.linalg.solve_triangular(chol, y, lower=True, trans="C")
        return scipy.linalg.solve_triangular(chol, h_op.matvec(x), lower=True)

    y0 = None if v0 is None else chol.conj().T @ np.ravel(v0)
    value, y = lanczos_smallest(matvec, dim, v0=y0)
    x = scipy.linalg.solve_triangular(chol, y, lower=True, trans="C")
    return EigenPair(value, x)


def solve_hermitian(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    Solve a x = b for Hermitian positive semi-definite a.

    A plain Hermitian solve is tried first; if it fails or is flagged
    ill-conditioned a ridge eps * tr(a) / dim is added, and as a last resort
    the minimum-norm least-squares solution is taken.

    Raises:
        SingularSystemError: If no attempt reaches residual <= 1e-8 ||b||
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128).ravel()
    _check_hermitian(a, "a", tol=1e-8)
    if a.shape[0] != b.shape[0]:
        raise DimensionError(f"right-hand side of length {b.shape[0]} for a {a.shape} system")
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return np.zeros_like(b)

    def acceptable(x) -> bool:
        return bool(np.all(np.isfinite(x))) and np.linalg.norm(a @ x - b) <= 1e-8 * b_norm

    dim = a.shape[0]
    ridge = settings.ridge_epsilon * max(abs(np.trace(a).real), 1.0) / dim
    attempts = (
        ("direct", lambda: scipy.linalg.solve(a, b, assume_a="her")),
        ("ridge", lambda: scipy.linalg.solve(a + ridge * np.eye(dim), b, assume_a="her")),
        ("lstsq", lambda: scipy.linalg.lstsq(a, b, cond=1e-13)[0]),
    )
    for name, attempt in attempts:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
                x = attempt()
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning, ValueError):
            continue
        if acceptable(x):
            if name != "direct":
                logger.debug(f"Hermitian solve needed the {name} fallback", dim=dim)
            return x
    raise SingularSystemError(f"system of dimension {dim} is singular beyond regularization")


def project_psd(a: np.ndarray) -> PsdProjection:
    """
    Hermitian positive semi-definite part of a (negative eigenvalues clipped to 0).

    Returns:
        PsdProjection with the relative Hermiticity defect and the clipped weight
    """
    a = np.asarray(a, dtype=np.complex128)
    scale = float(np.linalg.norm(a)) or 1.0
    defect = float(np.linalg.norm(a - a.conj().T)) / scale
    herm = 0.5 * (a + a.conj().T)
    w, v = scipy.linalg.eigh(herm)
    clipped = float(-np.sum(w[w < 0.0])) / scale
    w = np.clip(w, 0.0, None)
    return PsdProjection((v * w) @ v.conj().T, defect, clipped)


def orthogonal_complement(vectors: np.ndarray) -> np.ndarray:
    """Isometry onto the orthogonal complement of the columns of vectors."""
    if vectors.size == 0:
        return np.eye(vectors.shape[0], dtype=np.complex128)
    return scipy.linalg.null_space(vectors.conj().T, rcond=1e-12).astype(np.complex128)
