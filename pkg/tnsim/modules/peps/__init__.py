"""
PEPS Module

Projected entangled-pair states on finite open lattices.

Key Components:
- Peps: grid of rank-5 site tensors (d, left, right, up, down)
- peps_expectation / peps_exact_contract: compressed and brute-force values
- SweepEnvironments: cached top/bottom boundaries for site sweeps
- peps_ground / peps_imaginary_ground: ground states by ALS and imaginary time
- peps_evolve_step: four-part Trotter step with variational bond reduction
"""

from .environment import (
    BoundaryEnv,
    Sandwich,
    SweepEnvironments,
    double_layer,
    layer_grid,
    quadratic_form,
    snake_order,
)
from .evolution import (
    GatedPeps,
    LatticePart,
    PepsStepResult,
    PepsTrajectoryRow,
    apply_gate,
    bond_schmidt_reduce,
    conditioned_fit,
    fit_peps,
    four_part_hamiltonians,
    joint_bond_matrix,
    peps_evolve_step,
    peps_time_evolution,
    schmidt_reduce,
)
from .expectation import (
    ExpectationResult,
    check_lattice,
    default_dtilde,
    local_patterns,
    normalized,
    particle_number,
    peps_energy,
    peps_exact_contract,
    peps_expectation,
    peps_norm,
    site_occupations,
)
from .ground import PepsGroundResult, peps_ground, peps_imaginary_ground
from .serialization import PEPS_FORMAT, load_peps, save_peps
from .state import (
    PARTICLE,
    Peps,
    mott_peps,
    padded_to_bond,
    peps_to_vector,
    product_peps,
    random_peps,
    trap_mott_occupation,
)

__all__ = [
    "BoundaryEnv",
    "Sandwich",
    "SweepEnvironments",
    "double_layer",
    "layer_grid",
    "quadratic_form",
    "snake_order",
    "LatticePart",
    "PepsStepResult",
    "PepsTrajectoryRow",
    "apply_gate",
    "bond_schmidt_reduce",
    "fit_peps",
    "GatedPeps",
    "conditioned_fit",
    "four_part_hamiltonians",
    "joint_bond_matrix",
    "peps_evolve_step",
    "peps_time_evolution",
    "schmidt_reduce",
    "ExpectationResult",
    "check_lattice",
    "default_dtilde",
    "local_patterns",
    "normalized",
    "particle_number",
    "peps_energy",
    "peps_exact_contract",
    "peps_expectation",
    "peps_norm",
    "site_occupations",
    "PepsGroundResult",
    "peps_ground",
    "peps_imaginary_ground",
    "PEPS_FORMAT",
    "load_peps",
    "save_peps",
    "PARTICLE",
    "Peps",
    "mott_peps",
    "padded_to_bond",
    "peps_to_vector",
    "product_peps",
    "random_peps",
    "trap_mott_occupation",
]
