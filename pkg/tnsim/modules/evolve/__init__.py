"""
Evolve Module

Real- and imaginary-time evolution of chains.

Key Components:
- TrotterScheme / trotter_layers: even/odd and commuting-channel splittings
- tebd_step: gate-by-gate application with SVD truncation
- compress_variational: best bond-D approximation of a grown state
- compress_product: the same for op|psi> without forming the product
- evolve: time stepping driver with observables and adaptive steps
- itebd: infinite translation-invariant chains
"""

from .compression import (
    CompressionResult,
    compress_product,
    compress_variational,
    product_norm_squared,
    state_distance,
    zip_up,
)
from .driver import (
    DT_FLOOR,
    Observable,
    Trajectory,
    TrajectoryRow,
    TruncationMethod,
    apply_layers,
    evolve,
)
from .infinite import (
    ItebdResult,
    UniformMps,
    fixed_point,
    itebd,
    transfer_spectrum,
    truncate_uniform,
    uniform_bond_energy,
    uniform_channel_tensors,
)
from .tebd import TebdResult, tebd_step
from .trotter import (
    EvolutionMode,
    Gate,
    GateLayer,
    SchemeKind,
    TrotterScheme,
    bond_hamiltonian,
    channel_mpo,
    check_channel,
    gate_mpo,
    group_channels,
    layer_to_mpo,
    trotter_layers,
    zz_channel_mpo,
    zz_channel_tensors,
)

__all__ = [
    "CompressionResult",
    "compress_product",
    "compress_variational",
    "product_norm_squared",
    "state_distance",
    "zip_up",
    "DT_FLOOR",
    "Observable",
    "Trajectory",
    "TrajectoryRow",
    "TruncationMethod",
    "apply_layers",
    "evolve",
    "ItebdResult",
    "UniformMps",
    "fixed_point",
    "itebd",
    "transfer_spectrum",
    "truncate_uniform",
    "uniform_bond_energy",
    "uniform_channel_tensors",
    "TebdResult",
    "tebd_step",
    "EvolutionMode",
    "Gate",
    "GateLayer",
    "SchemeKind",
    "TrotterScheme",
    "bond_hamiltonian",
    "channel_mpo",
    "check_channel",
    "gate_mpo",
    "group_channels",
    "layer_to_mpo",
    "trotter_layers",
    "zz_channel_mpo",
    "zz_channel_tensors",
]
