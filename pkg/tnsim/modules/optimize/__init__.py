"""
Optimize Module

Variational ground, excited and targeted states of chains.

Key Components:
- EnvironmentCache: cached partial contractions for single-site sweeps
- vmps_ground / lowest_states: ground and excited states of open chains
- vmps_ground_pbc: periodic chains with conditioned site metrics
- variance_window: energy error bars from <H^2> - <H>^2
- target_energy_state: eigenstate closest to a prescribed energy
- greens_function: correction-vector resolvent elements
- minimize_quadratic: shared quadratic-plus-linear ALS solver
"""

from .environments import EnvironmentCache
from .ground import (
    TargetStateResult,
    eigen_sweeps,
    initial_state,
    lowest_states,
    target_energy_state,
    vmps_ground,
)
from .linear import QuadraticResult, minimize_quadratic
from .periodic import RingEnvironments, conditioning_transform, site_problem, vmps_ground_pbc
from .spectral import GreensFunctionResult, greens_function
from .sweep import (
    GroundStateResult,
    SweepConfig,
    SweepRecord,
    SweepSchedule,
    sweep_converged,
)
from .variance import VarianceWindow, variance_window

__all__ = [
    "EnvironmentCache",
    "TargetStateResult",
    "eigen_sweeps",
    "initial_state",
    "lowest_states",
    "target_energy_state",
    "vmps_ground",
    "QuadraticResult",
    "minimize_quadratic",
    "RingEnvironments",
    "conditioning_transform",
    "site_problem",
    "vmps_ground_pbc",
    "GreensFunctionResult",
    "greens_function",
    "GroundStateResult",
    "SweepConfig",
    "SweepRecord",
    "SweepSchedule",
    "sweep_converged",
    "VarianceWindow",
    "variance_window",
]
