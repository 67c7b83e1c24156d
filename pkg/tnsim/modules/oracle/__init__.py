"""
Oracle Module

Dense and closed-form reference results used to validate the tensor
network algorithms on small systems.

Key Components:
- dense_hamiltonian / exact_spectrum: Kronecker-built matrices and eigenpairs
- evolve_dense / trotter_step_dense: exact and Trotterized dense dynamics
- thermal_data / resolvent_element: thermodynamics and Green's functions
- enumerate_log_z / onsager_free_energy_density: classical Ising references
- transverse_ising_energy_density: infinite-chain closed form
- sparse_hamiltonian / sparse_ground_energy: ARPACK references past the dense cap
"""

from .classical import (
    enumerate_log_z,
    ising_energy,
    onsager_free_energy_density,
    transverse_ising_energy_density,
)
from .dense import (
    Spectrum,
    ThermalData,
    check_vector,
    dense_density_of_states,
    dense_expectation,
    dense_hamiltonian,
    embed_operator,
    evolve_dense,
    exact_spectrum,
    ground_energy,
    propagator,
    resolvent_element,
    run_dense_trajectory,
    site_expectation,
    thermal_data,
    trotter_layers_dense,
    trotter_step_dense,
)
from .sparse import sparse_ground_energy, sparse_hamiltonian

__all__ = [
    "enumerate_log_z",
    "ising_energy",
    "onsager_free_energy_density",
    "transverse_ising_energy_density",
    "Spectrum",
    "ThermalData",
    "check_vector",
    "dense_density_of_states",
    "dense_expectation",
    "dense_hamiltonian",
    "embed_operator",
    "evolve_dense",
    "exact_spectrum",
    "ground_energy",
    "propagator",
    "resolvent_element",
    "run_dense_trajectory",
    "site_expectation",
    "thermal_data",
    "trotter_layers_dense",
    "trotter_step_dense",
    "sparse_ground_energy",
    "sparse_hamiltonian",
]
