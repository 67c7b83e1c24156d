"""
Chain experiments.

Ground and excited states, periodic chains, quenches, the infinite
transverse-field Ising chain, Gibbs states, disorder averages, the
density of states and the a-priori bound checks. Each runner only
dispatches into the engine and turns its results into records.
"""

import numpy as np

from exceptions import ConfigError
from modules.apps import (
    DisorderEvolution,
    DisorderSpec,
    RandomTerm,
    density_of_states,
    disorder_average,
    gibbs_state,
    realization_average,
    spectral_peaks,
)
from modules.evolve import (
    EvolutionMode,
    Observable,
    SchemeKind,
    TrotterScheme,
    TruncationMethod,
    evolve,
    itebd,
)
from modules.mpo import SIGMA_X, SIGMA_Y, SIGMA_Z, HamiltonianSpec, Term, mpo_expectation, named_operator
from modules.mps import (
    aklt_mps,
    approximation_bounds,
    norm_squared,
    overlap,
    random_mps,
    schmidt_spectrum,
    to_vector,
    truncation_bound_check,
)
from modules.optimize import SweepConfig, lowest_states, variance_window, vmps_ground, vmps_ground_pbc
from modules.oracle import (
    dense_density_of_states,
    dense_hamiltonian,
    evolve_dense,
    exact_spectrum,
    site_expectation,
    thermal_data,
    transverse_ising_energy_density,
)
from schemas import ErrorSource, InitialKind
from utils.logging import get_logger
from utils.seeding import derive_rng

from .catalogue import experiment
from .context import RunContext, build_spec, initial_mps

logger = get_logger("tnsim.experiments.chains")

BOUND_SLACK = 1e-12


def _sweep_config(ctx: RunContext, bond: int = None) -> SweepConfig:
    return SweepConfig(
        bond=ctx["bond"] if bond is None else bond,
        precision=ctx["precision"],
        max_sweeps=ctx["max_sweeps"],
        seed=ctx.cfg.seed,
    )


def _open_chain(ctx: RunContext) -> HamiltonianSpec:
    spec = build_spec(ctx.cfg.model)
    if spec.lattice is not None:
        raise ConfigError(f"'{ctx.definition.name}' needs a chain, got a {spec.lattice} lattice", context="model")
    return spec


def _sz_observables(sites) -> list:
    return [Observable(f"sz_{k}", {k: SIGMA_Z}) for k in sites]


@experiment(
    "heisenberg_gs",
    "Lowest eigenstates of an open chain by alternating least squares, with variance windows",
    defaults={"bond": 5, "precision": 1e-5, "max_sweeps": 40, "states": 2},
    required=("model",),
)
def heisenberg_gs(ctx: RunContext) -> None:
    spec = _open_chain(ctx)
    results = lowest_states(spec, _sweep_config(ctx), ctx["states"])
    exact = None
    if ctx.oracle_allowed(spec.d ** spec.n):
        exact = exact_spectrum(spec, len(results)).energies
    for k, result in enumerate(results):
        window = variance_window(result.state, spec)
        ctx.record(f"E{k}", result.energy, ErrorSource.VARIANCE, epsilon=window.epsilon,
                   converged=result.converged)
        ctx.record(f"sweeps_{k}", len(result.history), ErrorSource.EXACT, converged=result.converged)
        if exact is not None:
            ctx.record(f"E{k}_oracle", exact[k], ErrorSource.ORACLE)
            ctx.record(f"E{k}_relative_error", abs(result.energy - exact[k]) / max(abs(exact[k]), 1e-300),
                       ErrorSource.ORACLE)
    ground = results[0].state
    for k in range(1, len(results)):
        state = results[k].state
        value = abs(overlap(state, ground)) / np.sqrt(norm_squared(state) * norm_squared(ground))
        ctx.record(f"overlap_{k}_0", value, ErrorSource.SWEEP, converged=results[k].converged)


@experiment(
    "aklt_check",
    "Spin-1 AKLT chain: variational energy at D = 2 and the exact AKLT state",
    defaults={"bond": 2, "precision": 1e-10, "max_sweeps": 20},
    required=("model",),
)
def aklt_check(ctx: RunContext) -> None:
    spec = _open_chain(ctx)
    result = vmps_ground(spec, _sweep_config(ctx))
    window = variance_window(result.state, spec)
    ctx.record("energy", result.energy, ErrorSource.VARIANCE, epsilon=window.epsilon, converged=result.converged)
    ctx.record("center_entropy", schmidt_spectrum(result.state, spec.n // 2).entropy(), ErrorSource.SWEEP,
               converged=result.converged)
    if spec.d == 3:
        ctx.record("aklt_state_energy", mpo_expectation(aklt_mps(spec.n), spec).real, ErrorSource.EXACT)
    if ctx.oracle_allowed(spec.d ** spec.n):
        exact = exact_spectrum(spec, 1).energies[0]
        ctx.record("energy_oracle", exact, ErrorSource.ORACLE)


@experiment(
    "heisenberg_pbc",
    "Periodic chain ground state with conditioned generalized site problems",
    defaults={"bond": 8, "precision": 1e-6, "max_sweeps": 20},
    required=("model",),
)
def heisenberg_pbc(ctx: RunContext) -> None:
    spec = _open_chain(ctx)
    result = vmps_ground_pbc(spec, _sweep_config(ctx))
    ctx.record("energy", result.energy, ErrorSource.SWEEP, converged=result.converged)
    ctx.record("energy_per_site", result.energy / spec.n, ErrorSource.SWEEP, converged=result.converged)
    ctx.record("sweeps", len(result.history), ErrorSource.EXACT, converged=result.converged)
    if ctx.oracle_allowed(spec.d ** spec.n):
        exact = exact_spectrum(spec, 1).energies[0]
        ctx.record("energy_oracle", exact, ErrorSource.ORACLE)
        ctx.record("relative_error", abs(result.energy - exact) / max(abs(exact), 1e-300), ErrorSource.ORACLE)


@experiment(
    "quench_flipped_spin",
    "Real-time evolution of a product state with one flipped spin (TEBD and/or variational)",
    defaults={"dt": 0.03, "bond": 5, "method": "both", "order": 2},
    required=("model", "t_total"),
)
def quench_flipped_spin(ctx: RunContext) -> None:
    spec = _open_chain(ctx)
    psi0 = initial_mps(ctx.cfg.initial, InitialKind.FLIPPED_CENTER, spec.n, spec.d)
    center = spec.n // 2
    observables = _sz_observables(k for k in (center - 1, center, center + 1) if 0 <= k < spec.n)
    methods = [TruncationMethod.TEBD, TruncationMethod.VARIATIONAL] if ctx["method"] == "both" \
        else [TruncationMethod(ctx["method"])]
    scheme = TrotterScheme.real_time(ctx["dt"], order=ctx["order"])

    trajectories = {}
    for method in methods:
        trajectory = evolve(psi0, spec, scheme, ctx["bond"], ctx["t_total"], EvolutionMode.REAL,
                            observables, method=method)
        trajectories[method] = trajectory
        source = ErrorSource.DISCARDED_WEIGHT if method == TruncationMethod.TEBD else ErrorSource.FIT_DISTANCE
        for row in trajectory.rows:
            for obs in observables:
                ctx.record(f"{method}:{obs.name}", row.values[obs.name], source, time_point=row.time,
                           discarded_weight=row.discarded_weight, delta_k=row.distance)

    if not ctx.oracle_allowed(spec.d ** spec.n):
        return
    h = dense_hamiltonian(spec)
    steps = len(next(iter(trajectories.values())).rows) - 1
    states = evolve_dense(h, to_vector(psi0), 1j * ctx["dt"], steps)
    dims = [spec.d] * spec.n
    exact = {}
    for obs in observables:
        (site, op), = obs.ops.items()
        exact[obs.name] = np.asarray([site_expectation(v, op, site, dims).real for v in states])
    for method, trajectory in trajectories.items():
        deviation = max(float(np.max(np.abs(trajectory.series(obs.name) - exact[obs.name]))) for obs in observables)
        ctx.record(f"{method}:max_deviation", deviation, ErrorSource.ORACLE)


@experiment(
    "tfi_itebd",
    "Infinite-chain imaginary-time evolution (iTEBD) of a translation-invariant model",
    defaults={"bond": 16, "dt_schedule": [0.1, 0.05, 0.01, 0.005, 0.001], "order": 2,
              "method": "channel_split", "precision": 1e-8, "max_sweeps": 2000},
    required=("model",),
)
def tfi_itebd(ctx: RunContext) -> None:
    spec = build_spec(ctx.cfg.model)
    result = itebd(spec, SchemeKind(ctx["method"]), ctx["bond"], ctx["dt_schedule"], order=ctx["order"],
                   tolerance=ctx["precision"], max_steps_per_dt=ctx["max_sweeps"], seed=ctx.seed(0, 0))
    ctx.record("energy_density", result.energy_density, ErrorSource.TROTTER, converged=result.converged)
    ctx.record("transfer_degenerate", float(result.degenerate), ErrorSource.EXACT)
    model = ctx.cfg.model
    if ctx.cfg.oracle and model.preset == "ising_transverse":
        exact = transverse_ising_energy_density(float(model.params["h"]), float(model.params.get("j", 1.0)))
        ctx.record("energy_density_exact", exact, ErrorSource.EXACT)
        ctx.record("energy_density_error", abs(result.energy_density - exact), ErrorSource.TROTTER,
                   converged=result.converged)


@experiment(
    "gibbs_chain",
    "Purified Gibbs states: log Z, energy, entropy and free energy per inverse temperature",
    defaults={"trotter_steps": 64, "bond": 32, "order": 2, "extrapolate": True},
    required=("model", "beta|betas"),
)
def gibbs_chain(ctx: RunContext) -> None:
    spec = _open_chain(ctx)
    betas = ctx.get("betas") or [ctx["beta"]]
    for beta in betas:
        result = gibbs_state(spec, beta, ctx["trotter_steps"], ctx["bond"], order=ctx["order"],
                             extrapolate=bool(ctx["extrapolate"]) and ctx["order"] == 2)
        tag = f"@beta={beta:g}"
        weight = result.discarded_weight
        ctx.record("log_z" + tag, result.log_z, ErrorSource.TROTTER, discarded_weight=weight)
        ctx.record("energy" + tag, result.energy, ErrorSource.TROTTER, discarded_weight=weight)
        ctx.record("entropy" + tag, result.entropy, ErrorSource.TROTTER, discarded_weight=weight)
        if result.free_energy_density is not None:
            ctx.record("free_energy_density" + tag, result.free_energy_density, ErrorSource.TROTTER,
                       discarded_weight=weight)
        ctx.record("entropy_identity_defect" + tag, result.entropy_identity_defect(), ErrorSource.EXACT)
        ctx.record("energy_consistency_defect" + tag, result.energy_consistency_defect(), ErrorSource.TROTTER)
        if result.trotter_error > 0:
            ctx.record("trotter_error_estimate" + tag, result.trotter_error, ErrorSource.TROTTER)
        if not result.entropy_in_range:
            logger.warning("Entropy outside its physical range", beta=beta, entropy=result.entropy)
        if ctx.oracle_allowed(spec.d ** spec.n) and beta > 0:
            exact = thermal_data(spec, beta)
            ctx.record("free_energy_density_oracle" + tag, exact.free_energy_density, ErrorSource.ORACLE)
            ctx.record("free_energy_relative_error" + tag,
                       abs(result.free_energy_density - exact.free_energy_density)
                       / max(abs(exact.free_energy_density), 1e-300), ErrorSource.ORACLE)


@experiment(
    "disorder_xx",
    "Disorder-averaged dynamics with one ancilla register per random site",
    defaults={"dt": 0.05, "bond": 64, "order": 2, "evolution": "real"},
    required=("model", "disorder", "t_total"),
)
def disorder_xx(ctx: RunContext) -> None:
    base = _open_chain(ctx)
    disorder = ctx.cfg.disorder
    sites = disorder.sites if disorder.sites is not None else list(range(base.n))
    try:
        operator = named_operator(disorder.operator)
    except KeyError as e:
        raise ConfigError(str(e.args[0]), context="disorder.operator")
    variables = [RandomTerm((s,), operator, tuple(disorder.values)) for s in sites]
    if disorder.probabilities is None:
        dspec = DisorderSpec.uniform(base, variables)
    else:
        dspec = DisorderSpec(base, tuple(variables), tuple(np.asarray(disorder.probabilities) for _ in sites))
    psi0 = initial_mps(ctx.cfg.initial, InitialKind.NEEL, base.n, base.d)
    observables = _sz_observables(range(base.n))
    evolution = DisorderEvolution(ctx["evolution"])
    scheme = TrotterScheme.real_time(ctx["dt"], order=ctx["order"])
    result = disorder_average(dspec, psi0, scheme, ctx["bond"], ctx["t_total"], observables, evolution,
                              initial_spec=base if evolution == DisorderEvolution.ADIABATIC else None)
    for k, t in enumerate(result.times):
        row = result.trajectory.rows[k]
        for obs in observables:
            ctx.record(f"avg_{obs.name}", result.values[obs.name][k], ErrorSource.DISCARDED_WEIGHT,
                       time_point=t, discarded_weight=row.discarded_weight)

    realizations = len(disorder.values) ** len(sites)
    if evolution != DisorderEvolution.REAL or not ctx.oracle_allowed(base.d ** base.n * realizations):
        return
    exact = realization_average(dspec, to_vector(psi0), ctx["dt"], len(result.times) - 1, observables,
                                order=ctx["order"])
    deviation = max(float(np.max(np.abs(result.values[o.name] - exact[o.name]))) for o in observables)
    ctx.record("max_deviation", deviation, ErrorSource.ORACLE)


@experiment(
    "dos_chain",
    "Density of states from the windowed transform of Tr exp(-iHt)",
    defaults={"dt": 0.05, "bond": 16, "window": "hann", "order": 2},
    required=("model", "t_total"),
)
def dos_chain(ctx: RunContext) -> None:
    spec = _open_chain(ctx)
    result = density_of_states(spec, ctx["t_total"], ctx["dt"], ctx["bond"], ctx["window"], ctx["order"])
    peaks = spectral_peaks(result)
    ctx.record("bin_width", result.bin_width, ErrorSource.EXACT)
    ctx.record("parseval_ratio", result.metadata["parseval_ratio"], ErrorSource.WINDOW)
    for k, omega in enumerate(peaks):
        ctx.record(f"peak_{k}", omega, ErrorSource.WINDOW, epsilon=result.bin_width)
    if ctx.oracle_allowed(spec.d ** spec.n) and len(peaks):
        energies = dense_density_of_states(spec)
        offsets = [float(np.min(np.abs(energies - omega))) / result.bin_width for omega in peaks]
        ctx.record("max_peak_offset_bins", max(offsets), ErrorSource.ORACLE)


def _random_chain_hamiltonian(n: int, rng: np.random.Generator) -> HamiltonianSpec:
    """Random real nearest-neighbour XYZ couplings with x and z fields."""
    terms = []
    for k in range(n - 1):
        for label, op in (("xx", SIGMA_X), ("yy", SIGMA_Y), ("zz", SIGMA_Z)):
            terms.append(Term((k, k + 1), np.kron(op, op), rng.normal(), label))
    for k in range(n):
        terms.append(Term((k,), SIGMA_X, rng.normal(), "x"))
        terms.append(Term((k,), SIGMA_Z, rng.normal(), "z"))
    return HamiltonianSpec(n, 2, tuple(terms), name="random_xyz")


@experiment(
    "bounds_suite",
    "Truncation bounds on random states and variance windows of random Hamiltonians",
    defaults={"instances": 100, "sizes": [10], "alphas": [0.25, 0.5, 0.75], "hamiltonians": 20,
              "hamiltonian_sites": 8, "bond": 16, "precision": 1e-8, "max_sweeps": 40},
)
def bounds_suite(ctx: RunContext) -> None:
    truncation_checks = truncation_violations = renyi_tail_checks = renyi_tail_violations = 0
    worst_ratio = 0.0
    for n in ctx["sizes"]:
        full_bond = 2 ** (n // 2)
        for i in range(ctx["instances"]):
            psi = random_mps(n, 2, full_bond, seed=derive_rng(ctx.cfg.seed, 2, i), complex_entries=True)
            psi = psi.scaled(1.0 / np.sqrt(norm_squared(psi)))
            for bond in range(1, full_bond):
                error, bound = truncation_bound_check(psi, bond)
                truncation_checks += 1
                truncation_violations += int(error > bound + BOUND_SLACK)
                if bound > 0:
                    worst_ratio = max(worst_ratio, error / bound)
            for cut in range(1, n):
                spectrum = schmidt_spectrum(psi, cut)
                for alpha in ctx["alphas"]:
                    for bond in range(1, full_bond):
                        renyi_tail_checks += 1
                        tail = approximation_bounds(spectrum, bond, alpha).renyi_tail_bound
                        renyi_tail_violations += int(spectrum.tail_weight(bond) > tail + BOUND_SLACK)
    ctx.record("truncation_checks", truncation_checks, ErrorSource.EXACT)
    ctx.record("truncation_violations", truncation_violations, ErrorSource.EXACT)
    ctx.record("truncation_worst_ratio", worst_ratio, ErrorSource.EXACT)
    ctx.record("renyi_tail_checks", renyi_tail_checks, ErrorSource.EXACT)
    ctx.record("renyi_tail_violations", renyi_tail_violations, ErrorSource.EXACT)

    n = ctx["hamiltonian_sites"]
    misses, converged = 0, True
    worst_gap = 0.0
    for i in range(ctx["hamiltonians"]):
        spec = _random_chain_hamiltonian(n, derive_rng(ctx.cfg.seed, 1, i))
        result = vmps_ground(spec, _sweep_config(ctx))
        converged = converged and result.converged
        window = variance_window(result.state, spec)
        exact = exact_spectrum(spec, 1).energies[0]
        slack = 1e-9 * max(abs(exact), 1.0)
        if not window.contains(exact, slack):
            misses += 1
            logger.warning("Ground energy outside the variance window", instance=i, energy=window.energy,
                           epsilon=window.epsilon, exact=exact)
        worst_gap = max(worst_gap, window.energy - exact)
    ctx.record("variance_checks", ctx["hamiltonians"], ErrorSource.EXACT)
    ctx.record("variance_window_misses", misses, ErrorSource.VARIANCE, converged=converged)
    ctx.record("variance_worst_gap", worst_gap, ErrorSource.VARIANCE, converged=converged)
