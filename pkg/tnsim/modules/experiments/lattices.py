"""
Lattice experiments.

Classical and quantum partition networks contracted with boundary MPS,
and the PEPS ground-state and quench runs on small square lattices.
"""

import numpy as np

from config import settings
from exceptions import ConfigError
from modules.apps import (
    ClassicalModel,
    bulk_free_energy_density,
    classical_partition_2d,
    ising_model,
    thermal_partition_network,
)
from modules.evolve import EvolutionMode
from modules.oracle import enumerate_log_z, onsager_free_energy_density, sparse_ground_energy, thermal_data
from modules.peps import check_lattice, default_dtilde, particle_number, peps_imaginary_ground, peps_time_evolution
from schemas import ErrorSource, ModelConfig

from .catalogue import experiment
from .context import RunContext, build_spec, initial_peps

ENUMERATION_MAX_SITES = 20


def _betas(ctx: RunContext) -> list:
    return ctx.get("betas") or [ctx["beta"]]


def classical_ising(model: ModelConfig) -> ClassicalModel:
    """Ising lattice of a model table with preset 'ising' (rows, cols, coupling, field)."""
    if model.preset != "ising":
        raise ConfigError(f"classical networks support the 'ising' preset, got '{model.preset}'", context="model.preset")
    params = dict(model.params)
    unknown = sorted(set(params) - {"rows", "cols", "coupling", "field"})
    if unknown or "rows" not in params or "cols" not in params:
        raise ConfigError(f"'ising' takes rows, cols, coupling and field (unknown: {unknown})", context="model.params")
    return ising_model(int(params["rows"]), int(params["cols"]), float(params.get("coupling", 1.0)),
                       float(params.get("field", 0.0)))


@experiment(
    "ising2d_partition",
    "Classical 2-D Ising partition function by boundary-MPS contraction",
    defaults={"dtilde": 32, "delta_k_tolerance": None, "sizes": None},
    required=("model", "beta|betas"),
)
def ising2d_partition(ctx: RunContext) -> None:
    model = classical_ising(ctx.cfg.model)
    params = ctx.cfg.model.params
    coupling = float(params.get("coupling", 1.0))
    zero_field = float(params.get("field", 0.0)) == 0.0
    sites = model.rows * model.cols
    for beta in _betas(ctx):
        tag = f"@beta={beta:g}"
        result = classical_partition_2d(model, beta, ctx["dtilde"], delta_k_tolerance=ctx["delta_k_tolerance"])
        ctx.record("log_z" + tag, result.log_z, ErrorSource.DELTA_K, delta_k=result.max_delta_k)
        if beta > 0:
            free = -result.log_z / (beta * sites)
            ctx.record("free_energy_density" + tag, free, ErrorSource.DELTA_K, delta_k=result.max_delta_k)
        if not (ctx.cfg.oracle and zero_field):
            continue
        if sites <= ENUMERATION_MAX_SITES:
            exact = enumerate_log_z(model.rows, model.cols, beta,
                                    np.full((model.rows, model.cols - 1), coupling),
                                    np.full((model.rows - 1, model.cols), coupling))
            ctx.record("log_z_oracle" + tag, exact, ErrorSource.ORACLE)
            ctx.record("log_z_relative_error" + tag, abs(result.log_z - exact) / max(abs(exact), 1e-300),
                       ErrorSource.ORACLE)
        if beta > 0:
            onsager = onsager_free_energy_density(beta, coupling)
            ctx.record("onsager_free_energy_density" + tag, onsager, ErrorSource.EXACT)
            ctx.record("onsager_difference" + tag, abs(free - onsager), ErrorSource.FINITE_SIZE)
            if ctx["sizes"]:
                bulk = bulk_free_energy_density(lambda size: ising_model(size, size, coupling), ctx["sizes"],
                                                beta, ctx["dtilde"])
                ctx.record("bulk_free_energy_density" + tag, bulk, ErrorSource.FINITE_SIZE)
                ctx.record("bulk_onsager_difference" + tag, abs(bulk - onsager), ErrorSource.FINITE_SIZE)


@experiment(
    "thermal_partition",
    "Quantum chain partition function as a 2-D network of Trotter slices",
    defaults={"trotter_steps": 32, "dtilde": 64, "order": 2},
    required=("model", "beta|betas"),
)
def thermal_partition(ctx: RunContext) -> None:
    spec = build_spec(ctx.cfg.model)
    for beta in _betas(ctx):
        tag = f"@beta={beta:g}"
        result = thermal_partition_network(spec, beta, ctx["trotter_steps"], ctx["dtilde"], ctx["order"])
        ctx.record("log_z" + tag, result.log_z, ErrorSource.TROTTER, delta_k=result.max_delta_k)
        if beta > 0:
            ctx.record("free_energy_density" + tag, -result.log_z / (beta * spec.n), ErrorSource.TROTTER,
                       delta_k=result.max_delta_k)
        if ctx.oracle_allowed(spec.d ** spec.n):
            exact = thermal_data(spec, beta).log_z
            ctx.record("log_z_oracle" + tag, exact, ErrorSource.ORACLE)
            ctx.record("log_z_relative_error" + tag, abs(result.log_z - exact) / max(abs(exact), 1e-300),
                       ErrorSource.ORACLE)


def _lattice_spec(ctx: RunContext):
    spec = build_spec(ctx.cfg.model)
    if spec.lattice is None:
        raise ConfigError(f"'{ctx.definition.name}' needs a 2-D lattice model", context="model")
    return spec


@experiment(
    "peps_hardcore_gs",
    "PEPS ground state by imaginary time through a bond-dimension ladder",
    defaults={"bond_ladder": [2, 3, 4, 5], "dt_schedule": [0.1, 0.03, 0.01], "steps_per_dt": 20, "kappa": 1,
              "polish_sweeps": 0, "precision": 1e-6, "order": 2},
    required=("model",),
)
def peps_hardcore_gs(ctx: RunContext) -> None:
    spec = _lattice_spec(ctx)
    rows, cols = spec.lattice
    psi0 = initial_peps(ctx.cfg.initial, rows, cols, trap=ctx.cfg.model.params)
    check_lattice(spec, psi0)
    result = peps_imaginary_ground(
        spec, psi0,
        bond_ladder=ctx["bond_ladder"],
        dt_schedule=ctx["dt_schedule"],
        steps_per_dt=ctx["steps_per_dt"],
        kappa=ctx["kappa"],
        polish_sweeps=ctx["polish_sweeps"],
        precision=ctx["precision"],
        order=ctx["order"],
    )
    dtilde = default_dtilde(ctx["bond_ladder"][-1], ctx["kappa"])
    ctx.record("energy", result.energy, ErrorSource.DELTA_K, delta_k=result.max_delta_k, converged=result.converged)
    ctx.record("particle_number", particle_number(result.state, dtilde), ErrorSource.DELTA_K,
               delta_k=result.max_delta_k, converged=result.converged)
    for k, energy in enumerate(result.history):
        ctx.record(f"stage_energy_{k}", energy, ErrorSource.DELTA_K, delta_k=result.max_delta_k)
    if ctx.oracle_allowed(spec.d ** spec.n, cap=settings.sparse_max_dim):
        exact = sparse_ground_energy(spec)
        ctx.record("energy_oracle", exact, ErrorSource.ORACLE)
        ctx.record("energy_error", abs(result.energy - exact), ErrorSource.ORACLE)


@experiment(
    "peps_quench",
    "PEPS real-time quench with the fit distance of every step per bond dimension",
    defaults={"bond_ladder": [2, 3], "dt": 0.05, "order": 2, "kappa": 1, "fit_sweeps": 4},
    required=("model", "t_total"),
)
def peps_quench(ctx: RunContext) -> None:
    spec = _lattice_spec(ctx)
    rows, cols = spec.lattice
    psi0 = initial_peps(ctx.cfg.initial, rows, cols, trap=ctx.cfg.model.params)
    check_lattice(spec, psi0)
    steps = int(round(ctx["t_total"] / ctx["dt"]))
    for bond in ctx["bond_ladder"]:
        dtilde = default_dtilde(bond, ctx["kappa"])
        _, rows_out = peps_time_evolution(psi0, spec, ctx["dt"], steps, bond, EvolutionMode.REAL, dtilde,
                                          track_particles=True, order=ctx["order"], fit_sweeps=ctx["fit_sweeps"])
        tag = f"D={bond}:"
        for row in rows_out:
            ctx.record(tag + "fit_distance", row.fit_distance, ErrorSource.FIT_DISTANCE, time_point=row.time,
                       delta_k=row.max_delta_k)
            ctx.record(tag + "particle_number", row.particle_number, ErrorSource.FIT_DISTANCE,
                       time_point=row.time, delta_k=row.max_delta_k)
        distances = [row.fit_distance for row in rows_out[1:]]
        drift = max(abs(row.particle_number - rows_out[0].particle_number) for row in rows_out)
        ctx.record(tag + "max_fit_distance", max(distances, default=0.0), ErrorSource.FIT_DISTANCE)
        ctx.record(tag + "mean_fit_distance", float(np.mean(distances)) if distances else 0.0,
                   ErrorSource.FIT_DISTANCE)
        ctx.record(tag + "particle_drift", drift, ErrorSource.FIT_DISTANCE)
