"""
Dynamical correlation functions from correction vectors.

For a real Hamiltonian and real ground state psi, the resolvent element

    g(omega) = <psi| f (H - omega - i eta)^-1 f^dag |psi>

splits into two real linear problems with W = (H - omega)^2 + eta^2:

    W chi_r = (H - omega) f^dag psi,    W chi_i = eta f^dag psi,

and g = <f^dag psi|chi_r> + i <f^dag psi|chi_i>. Both problems are
solved variationally with the shared quadratic ALS.

For eta much larger than the bandwidth g approaches i <f f^dag> / eta;
the imaginary part is positive with this sign of the broadening.
"""

from typing import NamedTuple, Optional, Union

import numpy as np

from exceptions import DomainError, UnsupportedModelError
from modules.mpo import (
    HamiltonianSpec,
    MatrixProductOperator,
    apply_site_operator,
    as_mpo,
    mpo_product,
    mpo_scale_shift,
)
from modules.mps import MatrixProductState, canonicalize, overlap
from modules.tensor_core import as_tensor
from utils.logging import get_logger
from utils.seeding import derive_rng

from .ground import initial_state
from .linear import minimize_quadratic
from .sweep import SweepConfig

logger = get_logger("tnsim.optimize.spectral")


class GreensFunctionResult(NamedTuple):
    g: complex
    chi_r: MatrixProductState
    chi_i: MatrixProductState
    norm_residual: float
    converged: bool


def _is_real_state(psi: MatrixProductState) -> bool:
    return all(np.allclose(a.imag, 0.0, atol=1e-12) for a in psi.sites)


def greens_function(
    psi0: MatrixProductState,
    spec: Union[HamiltonianSpec, MatrixProductOperator],
    excitation: np.ndarray,
    site: int,
    omega: float,
    eta: float,
    cfg: SweepConfig,
    start: Optional[MatrixProductState] = None,
) -> GreensFunctionResult:
    """
    Correction-vector evaluation of g(omega) for the excitation f^dag at a site.

    Args:
        psi0: Normalized real ground state
        spec: Real Hamiltonian (term list or MPO)
        excitation: Single-site operator f^dag
        site: Site the excitation acts on
        omega: Frequency
        eta: Broadening (> 0)
        cfg: Sweep parameters for both linear solves
        start: Optional starting state for the correction vectors

    Returns:
        GreensFunctionResult; norm_residual is
        ||(H - omega - i eta)(chi_r + i chi_i) - f^dag psi||^2

    Raises:
        DomainError: If eta <= 0
        UnsupportedModelError: If the Hamiltonian, state or excitation is complex
    """
    if not eta > 0:
        raise DomainError(f"broadening eta must be > 0, got {eta}")
    excitation = as_tensor(excitation)
    real_spec = spec.is_real() if isinstance(spec, HamiltonianSpec) else all(
        np.allclose(w.imag, 0.0) for w in spec.sites
    )
    if not (real_spec and _is_real_state(psi0) and np.allclose(excitation.imag, 0.0)):
        raise UnsupportedModelError("the correction-vector split needs a real Hamiltonian, state and excitation")

    operator = as_mpo(spec)
    shifted = mpo_scale_shift(operator, 1.0, -omega)
    weight = mpo_scale_shift(mpo_product(shifted, shifted), 1.0, eta ** 2)
    excited = apply_site_operator(psi0, site, excitation)
    b_norm = float(overlap(excited, excited).real)

    if start is None:
        start = initial_state(psi0.n, psi0.phys_dims[0], cfg.bond, derive_rng(cfg.seed, 0, 0))
    else:
        start = canonicalize(start, "right")
    real_part = minimize_quadratic(weight, [(excited, shifted, 1.0)], start, cfg, solver="chi_r")
    imag_part = minimize_quadratic(weight, [(excited, None, eta)], start, cfg, solver="chi_i")

    g = complex(overlap(excited, real_part.state) + 1j * overlap(excited, imag_part.state))
    # the two objectives at their optimum sum to -<b|b>
    residual = max(real_part.value + imag_part.value + b_norm, 0.0)
    logger.debug("Correction vectors solved", omega=omega, eta=eta, g=str(g), residual=residual)
    return GreensFunctionResult(g, real_part.state, imag_part.state, residual,
                                real_part.converged and imag_part.converged)
