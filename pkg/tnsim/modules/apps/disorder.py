"""
Disorder averages by evolving all realizations at once.

Every random coupling r_l with finite support Gamma_l gets an ancilla of
dimension |Gamma_l| on the site that hosts it. The ancilla register starts
in sum_r sqrt(p(r)) |r> and the random term r_l O becomes O x R_l with
R_l = diag(Gamma_l); the ancilla basis is conserved, so measuring O x 1
on the enlarged chain returns sum_r p(r) <psi_r(t)|O|psi_r(t)>.

Ancillas are padded to the largest support (unused levels carry zero
amplitude) so the enlarged chain has one local dimension. The second
moment sum_r p(r) <O>_r^2 runs two system copies against one register.
"""

import itertools
from dataclasses import dataclass, field, replace
from utils.compat import StrEnum
from typing import Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from exceptions import DimensionError, DomainError, UnsupportedDistributionError
from modules.evolve import EvolutionMode, Observable, Trajectory, TrotterScheme, evolve
from modules.mpo import HamiltonianSpec, Term
from modules.mps import MatrixProductState, from_vector, product_mps
from modules.oracle import (
    dense_expectation,
    embed_operator,
    run_dense_trajectory,
    site_expectation,
    trotter_step_dense,
)
from modules.tensor_core import as_tensor
from utils.logging import get_logger

logger = get_logger("tnsim.apps.disorder")

PROBABILITY_TOLERANCE = 1e-12
RANDOM_LABEL = "random"


class DisorderEvolution(StrEnum):
    REAL = "real"
    ADIABATIC = "adiabatic"


@dataclass(frozen=True)
class RandomTerm:
    """value * operator on `sites`, value drawn from `values`; the ancilla lives on sites[0]."""

    sites: Tuple[int, ...]
    operator: np.ndarray = field(repr=False)
    values: Tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(int(s) for s in self.sites))
        object.__setattr__(self, "operator", as_tensor(self.operator))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.values:
            raise DimensionError(f"random term on {self.sites} has an empty support")

    @property
    def host(self) -> int:
        return self.sites[0]


@dataclass(frozen=True)
class DisorderSpec:
    """
    Base Hamiltonian plus random terms with a product or tabulated distribution.

    marginals[v] are the probabilities of variable v (product case);
    joint has one axis per variable (tabulated case). Exactly one is set.
    """

    base: HamiltonianSpec
    variables: Tuple[RandomTerm, ...]
    marginals: Optional[Tuple[np.ndarray, ...]] = None
    joint: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        hosts = [v.host for v in self.variables]
        if len(set(hosts)) != len(hosts):
            raise DimensionError(f"each site hosts at most one random variable, got hosts {hosts}")
        for v in self.variables:
            if not 0 <= v.host < self.base.n:
                raise DimensionError(f"random term on {v.sites} lies outside the chain")
        if (self.marginals is None) == (self.joint is None):
            raise UnsupportedDistributionError("give either per-variable marginals or one joint table")
        if self.marginals is not None:
            marginals = tuple(np.asarray(p, dtype=float) for p in self.marginals)
            if len(marginals) != len(self.variables):
                raise DimensionError("one marginal per random variable is required")
            for var, p in zip(self.variables, marginals):
                if p.shape != (len(var.values),):
                    raise DimensionError(f"marginal of {var.sites} must have {len(var.values)} entries")
                _check_probabilities(p)
            object.__setattr__(self, "marginals", marginals)
        else:
            joint = np.asarray(self.joint, dtype=float)
            if joint.shape != tuple(len(v.values) for v in self.variables):
                raise DimensionError(f"joint table shape {joint.shape} does not match the supports")
            _check_probabilities(joint)
            object.__setattr__(self, "joint", joint)

    @classmethod
    def uniform(cls, base: HamiltonianSpec, variables: Sequence[RandomTerm]) -> "DisorderSpec":
        return cls(base, tuple(variables), tuple(np.full(len(v.values), 1.0 / len(v.values)) for v in variables))

    @classmethod
    def from_distribution(cls, base: HamiltonianSpec, variables: Sequence[RandomTerm], distribution) -> "DisorderSpec":
        """distribution: list of marginals, a joint array, or a mapping outcome index tuple -> p."""
        variables = tuple(variables)
        if isinstance(distribution, Mapping):
            joint = np.zeros(tuple(len(v.values) for v in variables))
            for outcome, p in distribution.items():
                joint[tuple(outcome)] = p
            return cls(base, variables, joint=joint)
        if isinstance(distribution, np.ndarray):
            if len(variables) == 1 and distribution.ndim == 1:
                return cls(base, variables, marginals=(distribution,))
            if distribution.ndim == len(variables):
                return cls(base, variables, joint=distribution)
        if isinstance(distribution, (list, tuple)):
            return cls(base, variables, marginals=tuple(distribution))
        raise UnsupportedDistributionError(
            f"distribution of type {type(distribution).__name__} is neither a product nor a table"
        )

    @property
    def ancilla_dim(self) -> int:
        return max((len(v.values) for v in self.variables), default=1)

    def probability(self, outcome: Sequence[int]) -> float:
        if self.joint is not None:
            return float(self.joint[tuple(outcome)])
        return float(np.prod([p[i] for p, i in zip(self.marginals, outcome)]))


def _check_probabilities(p: np.ndarray) -> None:
    if np.any(p < 0) or abs(float(p.sum()) - 1.0) > PROBABILITY_TOLERANCE:
        raise DomainError(f"probabilities must be non-negative and sum to 1, got sum {p.sum()}")


# ----------------------------------------------------------------------
# Enlarged chain
# ----------------------------------------------------------------------

def _interleave_copies(first: np.ndarray, second: np.ndarray, k: int, d: int) -> np.ndarray:
    """first on copy 1 and second on copy 2 of k sites, site index = c1 * d + c2."""
    full = np.kron(first, second).reshape((d,) * (4 * k))
    out_axes = [a for j in range(k) for a in (j, k + j)]
    in_axes = [a for j in range(k) for a in (2 * k + j, 3 * k + j)]
    size = (d * d) ** k
    return full.transpose(out_axes + in_axes).reshape(size, size)


def _doubled(op: np.ndarray, k: int, d: int) -> np.ndarray:
    eye = np.eye(d ** k)
    return _interleave_copies(op, eye, k, d) + _interleave_copies(eye, op, k, d)


def _with_register(op: np.ndarray, k: int, d: int, register: np.ndarray, m: int) -> np.ndarray:
    """op on the system factors, register on the first site's ancilla, identity elsewhere."""
    if k == 1:
        return np.kron(op, register)
    op4 = op.reshape(d, d, d, d)
    full = np.einsum("abAB,xX,yY->axbyAXBY", op4, register, np.eye(m))
    size = (d * m) ** 2
    return full.reshape(size, size)


def _padded(values: Sequence[float], m: int) -> np.ndarray:
    out = np.zeros(m)
    out[: len(values)] = values
    return out


def enlarged_spec(dspec: DisorderSpec, copies: int = 1, base: Optional[HamiltonianSpec] = None) -> HamiltonianSpec:
    """
    Nearest-neighbour model on system (x copies) x ancilla sites.

    Args:
        dspec: Disorder specification
        copies: 1, or 2 for second moments
        base: Replacement for dspec.base (e.g. the start of an adiabatic ramp)
    """
    if copies not in (1, 2):
        raise DomainError(f"copies must be 1 or 2, got {copies}")
    base = dspec.base if base is None else base
    m = dspec.ancilla_dim
    d = base.d
    system = base
    if copies == 2:
        system = HamiltonianSpec(
            base.n, d * d,
            tuple(Term(t.sites, _doubled(t.operator, len(t.sites), d), t.coupling, t.label) for t in base.terms),
            base.boundary, base.lattice, f"{base.name}_doubled",
        )
    ds = system.d
    spec = system.with_ancilla(m)
    extra = []
    for var in dspec.variables:
        k = len(var.sites)
        op = var.operator if copies == 1 else _doubled(var.operator, k, d)
        register = np.diag(_padded(var.values, m))
        extra.append(Term(var.sites, _with_register(op, k, ds, register, m), 1.0, RANDOM_LABEL))
    return spec.with_terms(extra)


def ancilla_register(dspec: DisorderSpec) -> MatrixProductState:
    """sum_r sqrt(p(r)) |r> over every site (|0> on sites without a variable)."""
    n, m = dspec.base.n, dspec.ancilla_dim
    hosted = {v.host: index for index, v in enumerate(dspec.variables)}
    if dspec.marginals is not None:
        vectors = []
        for site in range(n):
            if site in hosted:
                vectors.append(_padded(np.sqrt(dspec.marginals[hosted[site]]), m))
            else:
                vectors.append(np.eye(m)[0])
        return product_mps(vectors)
    amplitudes = np.zeros((m,) * n, dtype=np.complex128)
    order = [hosted.get(site) for site in range(n)]
    for outcome in itertools.product(*(range(len(v.values)) for v in dspec.variables)):
        index = tuple(0 if var is None else outcome[var] for var in order)
        amplitudes[index] = np.sqrt(dspec.joint[outcome])
    return from_vector(amplitudes.ravel(), [m] * n)


def _merge(system: MatrixProductState, register: MatrixProductState) -> MatrixProductState:
    sites = []
    for a, b in zip(system.sites, register.sites):
        merged = np.einsum("abs,xyj->axbysj", a, b)
        sites.append(merged.reshape(a.shape[0] * b.shape[0], a.shape[1] * b.shape[1], a.shape[2] * b.shape[2]))
    return MatrixProductState(tuple(sites))


def enlarged_state(dspec: DisorderSpec, psi0: MatrixProductState, copies: int = 1) -> MatrixProductState:
    """psi0 (x psi0) x ancilla register, site by site."""
    if psi0.n != dspec.base.n or set(psi0.phys_dims) != {dspec.base.d}:
        raise DimensionError("initial state does not match the disordered chain")
    system = psi0
    if copies == 2:
        system = _merge(psi0, psi0)
    return _merge(system, ancilla_register(dspec))


# ----------------------------------------------------------------------
# Averages
# ----------------------------------------------------------------------

@dataclass
class DisorderResult:
    times: np.ndarray
    values: Dict[str, np.ndarray]
    trajectory: Trajectory


def _lift_observables(observables: Sequence[Observable], m: int, copies: int) -> List[Observable]:
    lifted = []
    for obs in observables:
        ops = {}
        for site, op in obs.ops.items():
            op = as_tensor(op)
            system = op if copies == 1 else np.kron(op, op)
            ops[site] = np.kron(system, np.eye(m))
        lifted.append(Observable(obs.name, ops))
    return lifted


def _run(dspec, psi0, scheme, bond, t_total, observables, evolution, initial_spec, copies) -> DisorderResult:
    evolution = DisorderEvolution(evolution)
    spec = enlarged_spec(dspec, copies)
    hamiltonian_at: Optional[Callable[[float], HamiltonianSpec]] = None
    if evolution == DisorderEvolution.ADIABATIC:
        if initial_spec is None:
            raise DomainError("an adiabatic ramp needs the initial Hamiltonian")
        if t_total <= 0:
            raise DomainError(f"an adiabatic ramp needs a positive duration, got {t_total}")
        if (initial_spec.n, initial_spec.d) != (dspec.base.n, dspec.base.d):
            raise DimensionError("the initial Hamiltonian acts on a different chain")
        start = _without_random_terms(enlarged_spec(dspec, copies, base=initial_spec))

        def hamiltonian_at(time: float) -> HamiltonianSpec:
            s = min(max(time / t_total, 0.0), 1.0)
            return start.scaled(1.0 - s).with_terms(spec.scaled(s).terms)

    lifted = _lift_observables(observables, dspec.ancilla_dim, copies)
    trajectory = evolve(enlarged_state(dspec, psi0, copies), spec, scheme, bond, t_total,
                        mode=EvolutionMode.REAL, observables=lifted, hamiltonian_at=hamiltonian_at)
    values = {obs.name: trajectory.series(obs.name) for obs in observables}
    logger.debug("Disorder average", variables=len(dspec.variables), copies=copies,
                 steps=len(trajectory.rows) - 1, evolution=evolution.value)
    return DisorderResult(trajectory.times, values, trajectory)


def _without_random_terms(spec: HamiltonianSpec) -> HamiltonianSpec:
    return replace(spec, terms=tuple(t for t in spec.terms if t.label != RANDOM_LABEL))


def disorder_average(
    dspec: DisorderSpec,
    psi0: MatrixProductState,
    scheme: TrotterScheme,
    bond: int,
    t_total: float,
    observables: Sequence[Observable],
    evolution: DisorderEvolution = DisorderEvolution.REAL,
    initial_spec: Optional[HamiltonianSpec] = None,
) -> DisorderResult:
    """
    <<O(t)>> = sum_r p(r) <psi_r(t)|O|psi_r(t)> for every observable.

    Args:
        dspec: Random model
        psi0: Initial system state (same for every realization)
        scheme: Real-time Trotter scheme
        bond: Bond dimension of the enlarged chain
        t_total: Evolution time (ramp duration for ADIABATIC)
        observables: Products of single-site system operators
        evolution: REAL quench, or ADIABATIC ramp from initial_spec to the
            disordered Hamiltonian, H(t) = (1 - t/T) H_0 + (t/T) H
        initial_spec: Start of the adiabatic ramp

    Returns:
        DisorderResult with one averaged series per observable
    """
    return _run(dspec, psi0, scheme, bond, t_total, observables, evolution, initial_spec, copies=1)


def disorder_second_moment(
    dspec: DisorderSpec,
    psi0: MatrixProductState,
    scheme: TrotterScheme,
    bond: int,
    t_total: float,
    observables: Sequence[Observable],
    evolution: DisorderEvolution = DisorderEvolution.REAL,
    initial_spec: Optional[HamiltonianSpec] = None,
) -> DisorderResult:
    """sum_r p(r) <O(t)>_r^2 from two system copies sharing one register."""
    return _run(dspec, psi0, scheme, bond, t_total, observables, evolution, initial_spec, copies=2)


# ----------------------------------------------------------------------
# Realizations
# ----------------------------------------------------------------------

def realizations(dspec: DisorderSpec) -> Iterator[Tuple[float, HamiltonianSpec]]:
    """(p(r), H_r) for every outcome with p(r) > 0."""
    supports = [range(len(v.values)) for v in dspec.variables]
    for outcome in itertools.product(*supports):
        p = dspec.probability(outcome)
        if p <= 0.0:
            continue
        terms = [Term(v.sites, v.operator, v.values[i], RANDOM_LABEL) for v, i in zip(dspec.variables, outcome)]
        yield p, dspec.base.with_terms(terms)


def realization_average(
    dspec: DisorderSpec,
    vector: np.ndarray,
    dt: float,
    steps: int,
    observables: Sequence[Observable],
    order: int = 2,
    squared: bool = False,
) -> Dict[str, np.ndarray]:
    """
    Dense reference: average of per-realization Trotter trajectories.

    Args:
        dspec: Random model
        vector: Dense initial state
        dt: Real time step (same even/odd scheme as the ancilla run)
        steps: Number of steps
        observables: Single-site operator products
        order: Trotter order
        squared: Average <O>_r^2 instead of <O>_r
    """
    n, d = dspec.base.n, dspec.base.d
    dims = [d] * n

    def observe(state: np.ndarray) -> List[float]:
        row = []
        for obs in observables:
            value = 1.0 + 0.0j
            if len(obs.ops) == 1:
                (site, op), = obs.ops.items()
                value = site_expectation(state, as_tensor(op), site, dims)
            else:
                total = np.eye(d ** n, dtype=np.complex128)
                for site, op in obs.ops.items():
                    total = embed_operator(as_tensor(op), [site], dims) @ total
                value = dense_expectation(state, total)
            row.append(value.real ** 2 if squared else value.real)
        return row

    total = None
    for p, spec in realizations(dspec):
        step = trotter_step_dense(spec, 1j * dt, order)
        series = run_dense_trajectory(step, vector, steps, observe)
        total = p * series if total is None else total + p * series
    return {obs.name: total[:, index] for index, obs in enumerate(observables)}
