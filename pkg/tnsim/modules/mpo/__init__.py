"""
MPO Module

Matrix product operators and Hamiltonian term lists.

Key Components:
- HamiltonianSpec / Term: one- and two-site term lists and named presets
- nn_hamiltonian_mpo: compile a nearest-neighbour chain into an MPO
- apply_mpo / to_dense: exact application and dense realization
- h_moments: <H> and <H^2> without forming H^2
- PurifiedState / purified_identity: system x ancilla purifications
"""

from .hamiltonian import (
    PRESETS,
    HamiltonianSpec,
    Term,
    aklt,
    build_preset,
    field_only,
    field_only_2d,
    hardcore_bosons_2d,
    heisenberg,
    heisenberg_2d,
    ising_transverse,
    spec_from_terms,
    swap_two_site,
    trap_potential,
    xx_field,
    xxz,
)
from .moments import Moments, apply_site_operator, bond_energies, h_moments, mpo_expectation
from .operator import (
    MatrixProductOperator,
    apply_mpo,
    as_mpo,
    identity_mpo,
    mpo_product,
    mpo_scale,
    mpo_scale_shift,
    mpo_sum,
    nn_hamiltonian_mpo,
    product_mpo,
    to_dense,
)
from .operators import (
    IDENTITY2,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    SPIN1_X,
    SPIN1_Y,
    SPIN1_Z,
    named_operator,
    spin_one_projector_two,
)
from .purification import (
    PurifiedState,
    lift_to_purification,
    purified_identity,
    purified_product,
)

__all__ = [
    "PRESETS",
    "HamiltonianSpec",
    "Term",
    "aklt",
    "build_preset",
    "field_only",
    "field_only_2d",
    "hardcore_bosons_2d",
    "heisenberg",
    "heisenberg_2d",
    "ising_transverse",
    "spec_from_terms",
    "swap_two_site",
    "trap_potential",
    "xx_field",
    "xxz",
    "Moments",
    "apply_site_operator",
    "bond_energies",
    "h_moments",
    "mpo_expectation",
    "MatrixProductOperator",
    "apply_mpo",
    "as_mpo",
    "identity_mpo",
    "mpo_product",
    "mpo_scale",
    "mpo_scale_shift",
    "mpo_sum",
    "nn_hamiltonian_mpo",
    "product_mpo",
    "to_dense",
    "IDENTITY2",
    "SIGMA_MINUS",
    "SIGMA_PLUS",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "SPIN1_X",
    "SPIN1_Y",
    "SPIN1_Z",
    "named_operator",
    "spin_one_projector_two",
    "PurifiedState",
    "lift_to_purification",
    "purified_identity",
    "purified_product",
]
