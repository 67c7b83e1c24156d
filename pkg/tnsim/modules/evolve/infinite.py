"""
Infinite translation-invariant chains.

Two schemes are provided:

    channel_split  one uniform tensor A; every channel of commuting terms
                   is applied as an infinite MPO and the grown bond is cut
                   back with gauges built from the transfer-operator fixed
                   points, so the state stays exactly uniform
    even_odd       a two-site cell (A, B) in Gamma/Lambda form, updated with
                   gates on the AB and BA bonds

Transfer-operator fixed points: X_l solves sum_s A_s^dag X_l A_s = eta X_l
and X_r solves sum_s A_s X_r A_s^dag = eta X_r. With M = sqrt(X_l) sqrt(X_r)
= U S V^dag the Schmidt coefficients of every cut are S, and
G_r = X_l^-1/2 U_D sqrt(S_D), G_l = sqrt(S_D) V_D^dag X_r^-1/2 keep the D
largest of them: A -> G_l A G_r.
"""

from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg as sla
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigs

from config import settings
from exceptions import DimensionError, InvalidSchemeError, NumericalConsistencyError
from modules.mpo import HamiltonianSpec
from modules.tensor_core import operator_schmidt, truncated_svd
from utils.logging import get_logger

from .trotter import SchemeKind, group_channels

logger = get_logger("tnsim.evolve.infinite")

POSITIVITY_TOLERANCE = 1e-9
DEGENERACY_TOLERANCE = 1e-8
PSEUDO_INVERSE_CUTOFF = 1e-12
DENSE_TRANSFER_MAX = 64
ARNOLDI_VECTORS = 24


@dataclass
class UniformMps:
    """Uniform (one tensor) or two-site-cell (A, B with lambdas) infinite MPS."""

    tensors: Tuple[np.ndarray, ...]
    lambdas: Tuple[np.ndarray, ...] = ()
    fixed_points: Optional[Tuple[np.ndarray, np.ndarray]] = field(default=None, repr=False)

    @property
    def bond(self) -> int:
        return self.tensors[0].shape[0]

    @property
    def d(self) -> int:
        return self.tensors[0].shape[2]

    @property
    def is_cell(self) -> bool:
        return len(self.tensors) == 2


class ItebdResult(NamedTuple):
    energy_density: float
    state: UniformMps
    history: List[float]
    converged: bool
    degenerate: bool


# ----------------------------------------------------------------------
# Fixed points
# ----------------------------------------------------------------------

def _left_map(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    return sum(a[:, :, s].conj().T @ x @ a[:, :, s] for s in range(a.shape[2]))


def _right_map(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    return sum(a[:, :, s] @ x @ a[:, :, s].conj().T for s in range(a.shape[2]))


def _normalize_phase(x: np.ndarray) -> np.ndarray:
    trace = np.trace(x)
    if abs(trace) > 0:
        x = x * (abs(trace) / trace)
    return x / np.linalg.norm(x)


def _transfer_matrix(a: np.ndarray, which: str) -> np.ndarray:
    dim = a.shape[0]
    if which == "left":
        return np.einsum("abs,cds->bdac", a.conj(), a).reshape(dim * dim, dim * dim)
    return np.einsum("abs,cds->acbd", a, a.conj()).reshape(dim * dim, dim * dim)


def _power_fixed_point(a: np.ndarray, which: str, x: np.ndarray) -> Tuple[float, np.ndarray, bool]:
    apply = _left_map if which == "left" else _right_map
    eta = 0.0
    for _ in range(settings.power_max_iter):
        y = apply(a, x)
        eta = float(np.linalg.norm(y))
        if eta == 0.0:
            raise NumericalConsistencyError("transfer operator annihilated its fixed point")
        y = _normalize_phase(y)
        if np.linalg.norm(y - x) <= settings.power_tol:
            return eta, y, True
        x = y
    return eta, x, False


def fixed_point(a: np.ndarray, which: str, start: Optional[np.ndarray] = None) -> Tuple[float, np.ndarray]:
    """
    Dominant eigenvalue and Hermitian PSD fixed point of the left or right transfer map.

    Small bonds diagonalize the transfer matrix; larger ones run ARPACK
    from `start` (the previous fixed point, when the caller has one), with
    power iteration as the fallback.

    Raises:
        NumericalConsistencyError: If the fixed point is not positive
    """
    dim = a.shape[0]
    x = np.eye(dim, dtype=np.complex128) if start is None or start.shape != (dim, dim) else start
    x = _normalize_phase(x.astype(np.complex128))
    if dim * dim <= DENSE_TRANSFER_MAX:
        values, vectors = np.linalg.eig(_transfer_matrix(a, which))
        top = int(np.argmax(np.abs(values)))
        eta, x = float(abs(values[top])), _normalize_phase(vectors[:, top].reshape(dim, dim))
    else:
        apply = _left_map if which == "left" else _right_map
        op = LinearOperator((dim * dim, dim * dim), matvec=lambda v: apply(a, v.reshape(dim, dim)).ravel(),
                            dtype=np.complex128)
        try:
            values, vectors = eigs(op, k=1, which="LM", v0=x.ravel(), tol=settings.power_tol,
                                   ncv=min(dim * dim - 1, ARNOLDI_VECTORS))
            eta, x = float(abs(values[0])), _normalize_phase(vectors[:, 0].reshape(dim, dim))
        except ArpackNoConvergence:
            eta, x, converged = _power_fixed_point(a, which, x)
            if not converged:
                logger.warning("Transfer fixed point did not converge", which=which, dim=dim)
    if eta == 0.0:
        raise NumericalConsistencyError("transfer operator annihilated its fixed point")
    x = 0.5 * (x + x.conj().T)
    w = np.linalg.eigvalsh(x)
    if w[0] < -POSITIVITY_TOLERANCE * max(abs(w[-1]), 1e-300):
        raise NumericalConsistencyError(f"{which} fixed point is not positive (smallest eigenvalue {w[0]:.3e})")
    return eta, x


def transfer_spectrum(a: np.ndarray, count: int = 2) -> np.ndarray:
    """Largest-magnitude eigenvalues of sum_s A_s x conj(A_s), sorted by modulus."""
    dim = a.shape[0]
    if dim * dim <= 2 * count + 2:
        transfer = np.einsum("abs,cds->acbd", a, a.conj()).reshape(dim * dim, dim * dim)
        values = np.linalg.eigvals(transfer)
    else:
        op = LinearOperator((dim * dim, dim * dim),
                            matvec=lambda v: _right_map(a, v.reshape(dim, dim)).ravel(), dtype=np.complex128)
        values = eigs(op, k=count, which="LM", return_eigenvectors=False, tol=1e-10)
    return values[np.argsort(-np.abs(values))]


def _sqrt_and_inverse(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    w, v = np.linalg.eigh(x)
    w = np.clip(w, 0.0, None)
    root = np.sqrt(w)
    keep = root > PSEUDO_INVERSE_CUTOFF * max(root.max(), 1e-300)
    inverse = np.zeros_like(root)
    inverse[keep] = 1.0 / root[keep]
    return (v * root) @ v.conj().T, (v * inverse) @ v.conj().T


def _lift(x: Optional[np.ndarray], dim: int) -> Optional[np.ndarray]:
    """Previous fixed point on a bond grown by an MPO channel: X x I_w."""
    if x is None or dim % x.shape[0]:
        return None
    return np.kron(x, np.eye(dim // x.shape[0]))


def truncate_uniform(
    a: np.ndarray,
    bond: int,
    previous: Optional[Tuple[np.ndarray, np.ndarray]] = None,
    exact_fixed_points: bool = False,
):
    """
    Cut the bond of a uniform tensor to at most `bond` keeping the largest
    Schmidt coefficients; the result is normalized to transfer radius 1.

    Args:
        a: Uniform tensor (D', D', d), typically a state tensor times a channel
        bond: Bond dimension kept
        previous: (X_l, X_r) before the channel was applied; warm starts
        exact_fixed_points: Solve for the fixed points of the result instead
            of returning diag(S), which is exact only without truncation

    Returns:
        (new tensor, discarded relative weight, (X_l, X_r) of the new tensor)
    """
    dim = a.shape[0]
    eta, x_l = fixed_point(a, "left", _lift(None if previous is None else previous[0], dim))
    _, x_r = fixed_point(a, "right", _lift(None if previous is None else previous[1], dim))
    sqrt_l, inv_sqrt_l = _sqrt_and_inverse(x_l)
    sqrt_r, inv_sqrt_r = _sqrt_and_inverse(x_r)
    (u, s, vh), dropped = truncated_svd(sqrt_l @ sqrt_r, bond)
    total = float(np.sum(s ** 2)) + dropped
    root = np.sqrt(s)
    g_r = inv_sqrt_l @ (u * root[None, :])
    g_l = (root[:, None] * vh) @ inv_sqrt_r
    new = np.einsum("ab,bcs,cd->ads", g_l, a, g_r) / np.sqrt(eta)
    # the gauge maps both fixed points of the untruncated tensor to diag(S)
    schmidt = np.diag(s).astype(np.complex128)
    if exact_fixed_points:
        fixed = (fixed_point(new, "left", schmidt)[1], fixed_point(new, "right", schmidt)[1])
    else:
        fixed = (schmidt, schmidt)
    return new, (dropped / total if total > 0 else 0.0), fixed


def uniform_bond_energy(a: np.ndarray, h: np.ndarray, fixed: Optional[Tuple[np.ndarray, np.ndarray]] = None) -> float:
    """<h> on one bond of the uniform state, from the transfer fixed points."""
    d = a.shape[2]
    if fixed is None:
        _, x_l = fixed_point(a, "left")
        _, x_r = fixed_point(a, "right")
    else:
        x_l, x_r = fixed
    h4 = h.reshape(d, d, d, d)
    numerator = np.einsum("ik,ijs,jlt,kmu,mnv,stuv,nl->", x_l, a.conj(), a.conj(), a, a, h4, x_r, optimize=True)
    denominator = np.einsum("ik,ijs,jlt,kms,mnt,nl->", x_l, a.conj(), a.conj(), a, a, x_r, optimize=True)
    return float((numerator / denominator).real)


# ----------------------------------------------------------------------
# Channel split (uniform tensor)
# ----------------------------------------------------------------------

def uniform_channel_tensors(spec: HamiltonianSpec, tau: complex) -> List[np.ndarray]:
    """
    Bulk MPO tensors W (w, w, d, d) of exp(-tau * channel) for every
    channel of a translation-invariant chain, read off bond (0, 1) and site 0.
    """
    d = spec.d
    tensors = []
    for name, terms in group_channels(spec).items():
        if len({len(t.sites) for t in terms}) > 1:
            raise InvalidSchemeError(f"channel '{name}' mixes bond and site terms")
        two = [t for t in terms if len(t.sites) == 2 and set(t.sites) == {0, 1}]
        one = [t for t in terms if t.sites == (0,)]
        if one:
            op = sum(t.matrix for t in one)
            tensors.append(sla.expm(-tau * op)[None, None])
            continue
        if not two:
            continue
        channel_op = sum(t.matrix if t.sites == (0, 1) else
                         t.matrix.reshape(d, d, d, d).transpose(1, 0, 3, 2).reshape(d * d, d * d) for t in two)
        gate = sla.expm(-tau * channel_op)
        lefts, rights = operator_schmidt(gate, d, d)
        # site receives R from the bond on its left and L from the bond on its right
        tensors.append(np.einsum("aom,bmi->aboi", rights, lefts))
    return tensors


def _apply_channel(a: np.ndarray, w: np.ndarray) -> np.ndarray:
    b = np.einsum("abi,xyoi->axbyo", a, w)
    return b.reshape(a.shape[0] * w.shape[0], a.shape[1] * w.shape[1], w.shape[2])


# ----------------------------------------------------------------------
# Two-site cell (Gamma / Lambda)
# ----------------------------------------------------------------------

def _cell_update(gammas, lambdas, gate: np.ndarray, first: int, bond: int) -> float:
    """Gate on the bond (first, other): Vidal update in place, returns discarded weight."""
    second = 1 - first
    ga, gb = gammas[first], gammas[second]
    outer, inner = lambdas[second], lambdas[first]
    d = ga.shape[2]
    theta = np.einsum("a,abs,b,bct,c->astc", outer, ga, inner, gb, outer)
    theta = np.einsum("uvst,astc->auvc", gate.reshape(d, d, d, d), theta)
    dl, dr = theta.shape[0], theta.shape[3]
    (u, s, vh), dropped = truncated_svd(theta.reshape(dl * d, d * dr), bond)
    total = float(np.sum(s ** 2)) + dropped
    s = s / np.sqrt(np.sum(s ** 2))
    inv_outer = np.where(outer > PSEUDO_INVERSE_CUTOFF, 1.0 / np.where(outer > 0, outer, 1.0), 0.0)
    gammas[first] = (inv_outer[:, None, None] * u.reshape(dl, d, -1)).transpose(0, 2, 1)
    gammas[second] = (vh.reshape(-1, d, dr) * inv_outer[None, None, :]).transpose(0, 2, 1)
    lambdas[first] = s
    return dropped / total if total > 0 else 0.0


def _cell_energy(gammas, lambdas, h: np.ndarray) -> float:
    d = gammas[0].shape[2]
    energies = []
    for first in (0, 1):
        second = 1 - first
        outer, inner = lambdas[second], lambdas[first]
        theta = np.einsum("a,abs,b,bct,c->astc", outer, gammas[first], inner, gammas[second], outer)
        norm = np.vdot(theta, theta).real
        applied = np.einsum("uvst,astc->auvc", h.reshape(d, d, d, d), theta)
        energies.append(np.vdot(theta, applied).real / norm)
    return float(np.mean(energies))


# ----------------------------------------------------------------------
# Driver
# ----------------------------------------------------------------------

def _random_tensor(bond: int, d: int, seed) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.standard_normal((bond, bond, d)).astype(np.complex128)


def itebd(
    spec: HamiltonianSpec,
    kind: SchemeKind,
    bond: int,
    dt_schedule: Sequence[float],
    order: int = 2,
    tolerance: float = 1e-9,
    max_steps_per_dt: int = 2000,
    seed: Optional[int] = 0,
) -> ItebdResult:
    """
    Imaginary-time ground state of a translation-invariant chain.

    Args:
        spec: Chain spec whose terms are identical on every bond and site
            (a periodic ring of a few sites is a convenient description)
        kind: CHANNEL_SPLIT (uniform tensor) or EVEN_ODD (two-site cell)
        bond: Bond dimension D
        dt_schedule: Decreasing imaginary time steps; each runs until the
            energy density changes by less than tolerance per unit of
            imaginary time
        order: Trotter order (1 or 2)
        tolerance: Energy change rate |dE / dtau| that ends a schedule stage
        max_steps_per_dt: Step limit of one stage
        seed: Seed of the random starting tensor

    Returns:
        ItebdResult(energy_density, state, history, converged, degenerate)
    """
    kind = SchemeKind(kind)
    if order not in (1, 2):
        raise InvalidSchemeError(f"Trotter order must be 1 or 2, got {order}")
    if not dt_schedule:
        raise DimensionError("the time step schedule is empty")
    h_bond = spec.uniform_bond_operator()
    d = spec.d
    history: List[float] = []
    converged = True

    if kind == SchemeKind.CHANNEL_SPLIT:
        a = _random_tensor(bond, d, seed)
        a, _, fixed = truncate_uniform(a, bond)
        for dt in dt_schedule:
            half = uniform_channel_tensors(spec, dt / 2)
            full = uniform_channel_tensors(spec, dt)
            if order == 1:
                sequence = full
            else:
                sequence = half[:-1] + [full[-1]] + half[:-1][::-1]
            stage_converged = False
            for _ in range(max_steps_per_dt):
                for index, w in enumerate(sequence):
                    grown = _apply_channel(a, w)
                    # on-site channels keep the bond; the next cut re-gauges
                    if w.shape[0] == 1 and index < len(sequence) - 1:
                        a = grown
                        continue
                    a, _, fixed = truncate_uniform(grown, bond, fixed)
                energy = uniform_bond_energy(a, h_bond, fixed)
                if history and abs(history[-1] - energy) < tolerance * dt:
                    history.append(energy)
                    stage_converged = True
                    break
                history.append(energy)
            converged = converged and stage_converged
            logger.debug("iTEBD stage finished", dt=dt, energy=history[-1], converged=stage_converged)
        fixed = (fixed_point(a, "left", fixed[0])[1], fixed_point(a, "right", fixed[1])[1])
        history.append(uniform_bond_energy(a, h_bond, fixed))
        state = UniformMps((a,), fixed_points=fixed)
        spectrum = transfer_spectrum(a)
    else:
        gammas = [_random_tensor(bond, d, seed), _random_tensor(bond, d, None if seed is None else seed + 1)]
        lambdas = [np.ones(bond) / np.sqrt(bond), np.ones(bond) / np.sqrt(bond)]
        for dt in dt_schedule:
            gate_half = sla.expm(-0.5 * dt * h_bond)
            gate_full = sla.expm(-dt * h_bond)
            stage_converged = False
            for _ in range(max_steps_per_dt):
                if order == 1:
                    _cell_update(gammas, lambdas, gate_full, 0, bond)
                    _cell_update(gammas, lambdas, gate_full, 1, bond)
                else:
                    _cell_update(gammas, lambdas, gate_half, 0, bond)
                    _cell_update(gammas, lambdas, gate_full, 1, bond)
                    _cell_update(gammas, lambdas, gate_half, 0, bond)
                energy = _cell_energy(gammas, lambdas, h_bond)
                if history and abs(history[-1] - energy) < tolerance * dt:
                    history.append(energy)
                    stage_converged = True
                    break
                history.append(energy)
            converged = converged and stage_converged
            logger.debug("iTEBD cell stage finished", dt=dt, energy=history[-1], converged=stage_converged)
        state = UniformMps(tuple(gammas), tuple(lambdas))
        cell = np.einsum("abs,b,bct,c->acst", gammas[0], lambdas[0], gammas[1], lambdas[1])
        spectrum = transfer_spectrum(cell.reshape(cell.shape[0], cell.shape[1], d * d))

    degenerate = bool(len(spectrum) > 1 and abs(spectrum[1]) >= (1.0 - DEGENERACY_TOLERANCE) * abs(spectrum[0]))
    if degenerate:
        logger.warning("Dominant transfer eigenvalue is degenerate; state may break a symmetry",
                       ratio=float(abs(spectrum[1]) / abs(spectrum[0])))
    return ItebdResult(history[-1], state, history, converged, degenerate)
