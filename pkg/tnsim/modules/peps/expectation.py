"""
Expectation values of PEPS.

Approximate values contract the double-layer grid with the boundary
compressor; numerator and denominator always use the same Dtilde. The
exact path expands the state into its amplitude vector and is limited to
tiny lattices.
"""

from typing import List, Mapping, NamedTuple, Optional, Tuple

import numpy as np

from exceptions import DegenerateStateError, DimensionError, UnsupportedModelError
from modules.apps import contract_grid
from modules.mpo import HamiltonianSpec
from modules.tensor_core import as_tensor, operator_schmidt
from utils.logging import get_logger

from .environment import OperatorMap, Position, layer_grid
from .state import PARTICLE, Peps, peps_to_vector

logger = get_logger("tnsim.peps.expectation")


class ExpectationResult(NamedTuple):
    value: complex
    max_delta_k: float


class LocalPattern(NamedTuple):
    """One product of local operators in a Hamiltonian decomposition."""

    ops: Mapping[Position, np.ndarray]
    label: str


def default_dtilde(bond: int, kappa: int = 1) -> int:
    return max(1, kappa * bond * bond)


def _check_ops(psi: Peps, ops: OperatorMap) -> None:
    for (i, j), op in ops.items():
        if not (0 <= i < psi.rows and 0 <= j < psi.cols):
            raise DimensionError(f"operator position ({i}, {j}) outside the {psi.rows}x{psi.cols} lattice")
        d = psi.site(i, j).shape[0]
        if np.shape(op) != (d, d):
            raise DimensionError(f"operator at ({i}, {j}) must be {d}x{d}, got {np.shape(op)}")


def log_sandwich(psi: Peps, ops: Optional[OperatorMap], dtilde: int) -> Tuple[float, complex, float]:
    """(log |<psi|O|psi>|, phase, max delta_K) through boundary compression."""
    ops = {pos: as_tensor(op) for pos, op in (ops or {}).items()}
    _check_ops(psi, ops)
    log_value, phase, run = contract_grid(layer_grid(psi, psi, ops), dtilde)
    return log_value, phase, run.max_delta_k


def peps_expectation(psi: Peps, ops: OperatorMap, dtilde: int) -> ExpectationResult:
    """
    Normalized <psi| prod O |psi> / <psi|psi>.

    Args:
        psi: State
        ops: {(row, col): d x d operator}; missing sites carry the identity
        dtilde: Boundary bond dimension (exact at D^2 for up to three columns)

    Returns:
        ExpectationResult with the largest delta_K of both contractions
    """
    if dtilde < 1:
        raise DimensionError(f"Dtilde must be >= 1, got {dtilde}")
    log_norm, norm_phase, norm_dk = log_sandwich(psi, None, dtilde)
    if not np.isfinite(log_norm):
        raise DegenerateStateError("expectation value of a zero-norm PEPS")
    if not ops:
        return ExpectationResult(1.0 + 0.0j, norm_dk)
    log_value, phase, value_dk = log_sandwich(psi, ops, dtilde)
    value = phase / norm_phase * np.exp(log_value - log_norm)
    return ExpectationResult(complex(value), max(norm_dk, value_dk))


def peps_norm(psi: Peps, dtilde: int) -> float:
    """<psi|psi> through boundary compression."""
    log_norm, phase, _ = log_sandwich(psi, None, dtilde)
    return float((phase * np.exp(log_norm)).real)


def peps_exact_contract(psi: Peps, ops: Optional[OperatorMap] = None) -> complex:
    """
    Raw <psi| prod O |psi> by brute-force contraction.

    Raises:
        CapacityError: If the amplitude count exceeds settings.peps_exact_max_amplitudes
    """
    ops = {pos: as_tensor(op) for pos, op in (ops or {}).items()}
    _check_ops(psi, ops)
    vector = peps_to_vector(psi)
    tensor = vector.reshape(psi.phys_dims)
    acted = tensor
    for (i, j), op in ops.items():
        axis = i * psi.cols + j
        acted = np.moveaxis(np.tensordot(op, acted, axes=([1], [axis])), 0, axis)
    return complex(np.vdot(tensor, acted))


def normalized(psi: Peps, dtilde: int) -> Peps:
    """Rescale every site equally so that <psi|psi> = 1."""
    log_norm, _, _ = log_sandwich(psi, None, dtilde)
    if not np.isfinite(log_norm):
        raise DegenerateStateError("cannot normalize a zero-norm PEPS")
    factor = np.exp(-log_norm / (2 * psi.n))
    return Peps(tuple(tuple(a * factor for a in row) for row in psi.tensors))


def check_lattice(spec: HamiltonianSpec, psi: Peps) -> None:
    if spec.lattice is None:
        raise UnsupportedModelError("PEPS algorithms need a Hamiltonian on a 2-D lattice")
    if tuple(spec.lattice) != (psi.rows, psi.cols):
        raise DimensionError(f"Hamiltonian lattice {spec.lattice} does not match PEPS {psi.rows}x{psi.cols}")
    spec.require_nearest_neighbour()


def local_patterns(spec: HamiltonianSpec) -> List[LocalPattern]:
    """Split H into products of local operators: operator-Schmidt channels per bond, fields per site."""
    cols = spec.lattice[1]
    patterns = []
    for a, b in spec.bonds():
        lefts, rights = operator_schmidt(spec.bond_operator(a, b), spec.d, spec.d)
        for c, (left, right) in enumerate(zip(lefts, rights)):
            patterns.append(LocalPattern({divmod(a, cols): left, divmod(b, cols): right}, f"bond{a}-{b}:{c}"))
    for k in range(spec.n):
        op = spec.site_operator(k)
        if np.any(op):
            patterns.append(LocalPattern({divmod(k, cols): op}, f"site{k}"))
    return patterns


def peps_energy(psi: Peps, spec: HamiltonianSpec, dtilde: int) -> ExpectationResult:
    """<H> per full lattice, summed over the local patterns of H."""
    check_lattice(spec, psi)
    log_norm, norm_phase, max_dk = log_sandwich(psi, None, dtilde)
    energy = 0.0 + 0.0j
    for pattern in local_patterns(spec):
        log_value, phase, dk = log_sandwich(psi, pattern.ops, dtilde)
        energy += phase / norm_phase * np.exp(log_value - log_norm)
        max_dk = max(max_dk, dk)
    return ExpectationResult(complex(energy), max_dk)


def site_occupations(psi: Peps, dtilde: int) -> np.ndarray:
    """<n_ij> with n = |particle><particle| (rows x cols)."""
    occupations = np.zeros((psi.rows, psi.cols))
    for i in range(psi.rows):
        for j in range(psi.cols):
            d = psi.site(i, j).shape[0]
            number = np.zeros((d, d), dtype=np.complex128)
            number[PARTICLE, PARTICLE] = 1.0
            occupations[i, j] = peps_expectation(psi, {(i, j): number}, dtilde).value.real
    return occupations


def particle_number(psi: Peps, dtilde: int) -> float:
    return float(np.sum(site_occupations(psi, dtilde)))
