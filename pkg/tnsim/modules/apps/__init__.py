"""
Apps Module

Applications built on chain evolution and boundary contraction.

Key Components:
- gibbs_state: purified thermal states with log Z, energy and entropy
- disorder_average: all disorder realizations evolved at once on ancillas
- density_of_states: windowed transform of Tr exp(-iHt)
- classical_partition_2d / thermal_partition_network: partition functions as 2-D networks
- sweep_rows: the shared delta_K-controlled boundary compressor
"""

from .boundary import BoundaryResult, close_boundary, compress_boundary, sweep_rows
from .disorder import (
    DisorderEvolution,
    DisorderResult,
    DisorderSpec,
    RandomTerm,
    ancilla_register,
    disorder_average,
    disorder_second_moment,
    enlarged_spec,
    enlarged_state,
    realization_average,
    realizations,
)
from .partition import (
    ClassicalModel,
    PartitionResult,
    bulk_free_energy_density,
    classical_partition_2d,
    contract_grid,
    ising_model,
    network_tensors,
    thermal_partition_network,
)
from .spectrum import DosResult, density_of_states, spectral_peaks, spectrum_from_samples, trace_samples
from .thermal import ThermalResult, gibbs_state, log_z_derivative, thermal_expectation

__all__ = [
    "BoundaryResult",
    "close_boundary",
    "compress_boundary",
    "sweep_rows",
    "DisorderEvolution",
    "DisorderResult",
    "DisorderSpec",
    "RandomTerm",
    "ancilla_register",
    "disorder_average",
    "disorder_second_moment",
    "enlarged_spec",
    "enlarged_state",
    "realization_average",
    "realizations",
    "ClassicalModel",
    "PartitionResult",
    "bulk_free_energy_density",
    "classical_partition_2d",
    "contract_grid",
    "ising_model",
    "network_tensors",
    "thermal_partition_network",
    "DosResult",
    "density_of_states",
    "spectral_peaks",
    "spectrum_from_samples",
    "trace_samples",
    "ThermalResult",
    "gibbs_state",
    "log_z_derivative",
    "thermal_expectation",
]
