"""
Dense reference computations for small systems.

Everything here works on full state vectors and matrices built by
Kronecker products from the term list, independent of the MPS and MPO
code paths.
"""

from typing import Callable, List, NamedTuple, Optional, Sequence

import numpy as np
from scipy import linalg as sla
from scipy.sparse.linalg import expm_multiply

from config import settings
from exceptions import CapacityError, DimensionError
from modules.mpo import HamiltonianSpec
from modules.tensor_core import as_tensor


class Spectrum(NamedTuple):
    energies: np.ndarray
    vectors: np.ndarray


class ThermalData(NamedTuple):
    beta: float
    log_z: float
    energy: float
    entropy: float
    free_energy_density: Optional[float]


def _check_dim(dim: int) -> None:
    if dim > settings.dense_max_dim:
        raise CapacityError(f"dense dimension {dim} exceeds cap {settings.dense_max_dim}")


def embed_operator(op: np.ndarray, sites: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Full matrix of an operator acting on `sites` (first site major) of a register."""
    n = len(dims)
    total = int(np.prod(dims))
    _check_dim(total)
    sites = list(sites)
    rest = [k for k in range(n) if k not in sites]
    rest_dim = int(np.prod([dims[k] for k in rest])) if rest else 1
    full = np.kron(as_tensor(op), np.eye(rest_dim))
    order = sites + rest
    shape = [dims[k] for k in order]
    full = full.reshape(shape + shape)
    inverse = np.argsort(order)
    full = full.transpose(list(inverse) + [n + i for i in inverse])
    return full.reshape(total, total)


def dense_hamiltonian(spec: HamiltonianSpec) -> np.ndarray:
    """Kronecker-sum matrix of every term in the spec."""
    dims = [spec.d] * spec.n
    total = spec.d ** spec.n
    _check_dim(total)
    h = np.zeros((total, total), dtype=np.complex128)
    for term in spec.terms:
        h += embed_operator(term.matrix, term.sites, dims)
    return h


def exact_spectrum(spec_or_matrix, count: Optional[int] = None) -> Spectrum:
    """Lowest `count` eigenpairs (all when None) of a Hermitian Hamiltonian."""
    h = dense_hamiltonian(spec_or_matrix) if isinstance(spec_or_matrix, HamiltonianSpec) else as_tensor(spec_or_matrix)
    if count is None:
        energies, vectors = sla.eigh(h)
    else:
        energies, vectors = sla.eigh(h, subset_by_index=[0, min(count, h.shape[0]) - 1])
    return Spectrum(energies, vectors)


def ground_energy(spec: HamiltonianSpec) -> float:
    return float(exact_spectrum(spec, 1).energies[0])


def dense_expectation(vector: np.ndarray, op: np.ndarray) -> complex:
    vector = as_tensor(vector)
    return complex(np.vdot(vector, op @ vector) / np.vdot(vector, vector))


def site_expectation(vector: np.ndarray, op: np.ndarray, site: int, dims: Sequence[int]) -> complex:
    return dense_expectation(vector, embed_operator(op, [site], dims))


def evolve_dense(h: np.ndarray, vector: np.ndarray, dt: complex, steps: int) -> List[np.ndarray]:
    """States exp(-dt H)^k |v> for k = 0..steps (real time: dt = i * delta)."""
    states = [as_tensor(vector)]
    current = states[0]
    for _ in range(steps):
        current = expm_multiply(-dt * h, current)
        states.append(current)
    return states


def propagator(h: np.ndarray, dt: complex) -> np.ndarray:
    return sla.expm(-dt * as_tensor(h))


def thermal_data(spec_or_matrix, beta: float, n: Optional[int] = None) -> ThermalData:
    """log Z, <H>, entropy and free energy density of exp(-beta H)."""
    energies = exact_spectrum(spec_or_matrix).energies
    if n is None:
        n = spec_or_matrix.n if isinstance(spec_or_matrix, HamiltonianSpec) else 1
    shift = energies.min() if beta > 0 else 0.0
    weights = np.exp(-beta * (energies - shift))
    z_shifted = weights.sum()
    log_z = float(np.log(z_shifted) - beta * shift)
    energy = float((weights * energies).sum() / z_shifted)
    entropy = log_z + beta * energy
    free = None if beta == 0 else -log_z / (beta * n)
    return ThermalData(beta, log_z, energy, entropy, free)


def resolvent_element(h: np.ndarray, ground: np.ndarray, f_dagger: np.ndarray, omega: float, eta: float) -> complex:
    """<psi| f (H - omega - i eta)^-1 f^dagger |psi>."""
    excited = f_dagger @ ground
    shifted = h - (omega + 1j * eta) * np.eye(h.shape[0])
    return complex(np.vdot(excited, np.linalg.solve(shifted, excited)))


def trotter_layers_dense(spec: HamiltonianSpec, dt: complex, order: int = 2) -> List[np.ndarray]:
    """
    Dense even/odd Trotter factors with the same single-site split the MPS
    layers use; the product of the list (applied left to right) is one step.
    """
    dims = [spec.d] * spec.n
    n = spec.n
    if n == 1:
        return [propagator(spec.site_operator(0), dt)]

    def bond_h(k: int) -> np.ndarray:
        eye = np.eye(spec.d)
        left = spec.site_operator(k) * (1.0 if k == 0 else 0.5)
        right = spec.site_operator(k + 1) * (1.0 if k + 1 == n - 1 else 0.5)
        return spec.bond_operator(k, k + 1) + np.kron(left, eye) + np.kron(eye, right)

    def layer(parity: int, tau: complex) -> np.ndarray:
        total = np.eye(spec.d ** n, dtype=np.complex128)
        for k in range(parity, n - 1, 2):
            total = embed_operator(sla.expm(-tau * bond_h(k)), [k, k + 1], dims) @ total
        return total

    if order == 1:
        return [layer(0, dt), layer(1, dt)]
    return [layer(0, dt / 2), layer(1, dt), layer(0, dt / 2)]


def trotter_step_dense(spec: HamiltonianSpec, dt: complex, order: int = 2) -> np.ndarray:
    step = np.eye(spec.d ** spec.n, dtype=np.complex128)
    for factor in trotter_layers_dense(spec, dt, order):
        step = factor @ step
    return step


def run_dense_trajectory(step: np.ndarray, vector: np.ndarray, steps: int,
                         observe: Callable[[np.ndarray], Sequence[float]]) -> np.ndarray:
    """Apply a fixed step matrix and record observe(normalized state) each time."""
    current = as_tensor(vector)
    rows = [observe(current / np.linalg.norm(current))]
    for _ in range(steps):
        current = step @ current
        rows.append(observe(current / np.linalg.norm(current)))
    return np.asarray(rows)


def dense_density_of_states(spec: HamiltonianSpec) -> np.ndarray:
    """All eigenvalues, sorted (the exact DOS support)."""
    return exact_spectrum(spec).energies


def check_vector(vector: np.ndarray, dims: Sequence[int]) -> np.ndarray:
    vector = as_tensor(vector).ravel()
    if vector.size != int(np.prod(dims)):
        raise DimensionError(f"vector of size {vector.size} does not match dims {tuple(dims)}")
    return vector
