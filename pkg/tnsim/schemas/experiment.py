"""
Pydantic schemas for experiment configuration files.

A configuration file is TOML: either one experiment at the top level or
a batch under [[experiments]]. Unknown keys are rejected everywhere and
every number must be finite. Physical parameters have no defaults;
algorithmic parameters fall back to the defaults of the experiment.
"""

import math
from utils.compat import StrEnum
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


def _check_finite(value: Any, path: str = "") -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        raise ValueError(f"{path or 'value'} must be finite, got {value}")
    if isinstance(value, (list, tuple)):
        for k, item in enumerate(value):
            _check_finite(item, f"{path}[{k}]")
    if isinstance(value, dict):
        for key, item in value.items():
            _check_finite(item, f"{path}.{key}" if path else str(key))
    return value


class ResultFormat(StrEnum):
    CSV = "csv"
    JSON_LINES = "jsonl"


class StrictModel(BaseModel):
    """Base for configuration tables: no unknown keys, finite numbers only."""

    model_config = ConfigDict(extra="forbid")

    @field_validator("*", mode="after")
    @classmethod
    def finite_numbers(cls, value, info):
        return _check_finite(value, info.field_name)


ParamValue = Union[bool, int, float, str, List[float], List[int]]


class TermConfig(StrictModel):
    """One Hamiltonian term: named operators on one or two sites."""

    sites: List[int] = Field(..., min_length=1, max_length=2, description="Site indices (0-based)")
    ops: List[str] = Field(..., min_length=1, max_length=2, description="Operator names, one per site")
    coupling: float = Field(default=1.0, description="Prefactor of the term")

    @model_validator(mode="after")
    def ops_match_sites(self):
        if len(self.ops) != len(self.sites):
            raise ValueError(f"term on sites {self.sites} lists {len(self.ops)} operators")
        return self


class ModelConfig(StrictModel):
    """Hamiltonian: a named preset with parameters, or an explicit term table."""

    preset: Optional[str] = Field(None, description="Preset name (heisenberg, aklt, ...)")
    params: Dict[str, ParamValue] = Field(default_factory=dict, description="Preset arguments")
    terms: Optional[List[TermConfig]] = Field(None, description="Explicit term table")
    n: Optional[int] = Field(None, ge=1, description="Number of sites of a term table")
    d: int = Field(default=2, ge=1, description="Local dimension of a term table")
    boundary: str = Field(default="open", description="open or periodic (term tables)")
    lattice: Optional[List[int]] = Field(None, min_length=2, max_length=2, description="rows, cols")

    @model_validator(mode="after")
    def preset_or_terms(self):
        if (self.preset is None) == (self.terms is None):
            raise ValueError("give exactly one of 'preset' or 'terms'")
        if self.terms is not None and self.n is None:
            raise ValueError("a term table needs 'n'")
        return self


class InitialKind(StrEnum):
    """Named product start states."""

    ALL_UP = "all_up"
    FLIPPED_CENTER = "flipped_center"
    NEEL = "neel"
    TRAP_MOTT = "trap_mott"


class InitialStateConfig(StrictModel):
    """Product start state; trap_mott occupies the sites with V < mu."""

    kind: InitialKind = Field(..., description="all_up, flipped_center, neel or trap_mott")
    v0: Optional[float] = Field(None, description="Trap strength (trap_mott)")
    mu: Optional[float] = Field(None, description="Chemical potential (trap_mott)")

    @model_validator(mode="after")
    def trap_parameters(self):
        if self.kind == InitialKind.TRAP_MOTT and (self.v0 is None or self.mu is None):
            raise ValueError("trap_mott needs v0 and mu")
        return self


class DisorderConfig(StrictModel):
    """Random single-site field drawn independently on the listed sites."""

    values: List[float] = Field(..., min_length=1, description="Support of the random field")
    probabilities: Optional[List[float]] = Field(None, description="Weights (default uniform)")
    operator: str = Field(default="sz", description="Operator the field multiplies")
    sites: Optional[List[int]] = Field(None, description="Random sites (default all)")

    @model_validator(mode="after")
    def matching_weights(self):
        if self.probabilities is not None:
            if len(self.probabilities) != len(self.values):
                raise ValueError("one probability per value is required")
            if any(p < 0 for p in self.probabilities) or abs(sum(self.probabilities) - 1.0) > 1e-12:
                raise ValueError("probabilities must be non-negative and sum to 1")
        return self


class AlgorithmConfig(StrictModel):
    """Algorithm and run parameters; unset fields take the experiment defaults."""

    bond: Optional[int] = Field(None, ge=1, description="Bond dimension D")
    bond_ladder: Optional[List[int]] = Field(None, description="Increasing bond dimensions")
    dtilde: Optional[int] = Field(None, ge=1, description="Boundary bond dimension")
    dt: Optional[float] = Field(None, ge=0, description="Time step")
    dt_schedule: Optional[List[float]] = Field(None, description="Decreasing imaginary time steps")
    t_total: Optional[float] = Field(None, ge=0, description="Total evolution time")
    steps: Optional[int] = Field(None, ge=0, description="Number of time steps")
    beta: Optional[float] = Field(None, ge=0, description="Inverse temperature")
    betas: Optional[List[float]] = Field(None, description="Several inverse temperatures")
    trotter_steps: Optional[int] = Field(None, ge=1, description="Trotter steps M")
    order: Optional[int] = Field(None, ge=1, le=2, description="Trotter order")
    extrapolate: Optional[bool] = Field(None, description="Richardson-extrapolate Trotter steps M and M // 2")
    method: Optional[str] = Field(None, description="tebd, variational or both")
    precision: Optional[float] = Field(None, gt=0, description="Sweep convergence precision")
    max_sweeps: Optional[int] = Field(None, ge=1, description="Sweep limit")
    states: Optional[int] = Field(None, ge=1, description="Number of lowest states")
    instances: Optional[int] = Field(None, ge=1, description="Random instances")
    alphas: Optional[List[float]] = Field(None, description="Renyi indices")
    sizes: Optional[List[int]] = Field(None, description="Lattice sizes")
    window: Optional[str] = Field(None, description="Spectral window")
    kappa: Optional[int] = Field(None, ge=1, description="Dtilde = kappa * D^2")
    steps_per_dt: Optional[int] = Field(None, ge=1, description="Imaginary time steps per schedule entry")
    polish_sweeps: Optional[int] = Field(None, ge=0, description="ALS sweeps after imaginary time")
    fit_sweeps: Optional[int] = Field(None, ge=1, description="ALS sweeps per PEPS sub-step")
    delta_k_tolerance: Optional[float] = Field(None, gt=0, description="Largest accepted boundary delta_K")
    evolution: Optional[str] = Field(None, description="real or adiabatic (disorder)")
    hamiltonians: Optional[int] = Field(None, ge=1, description="Random Hamiltonians of the variance check")
    hamiltonian_sites: Optional[int] = Field(None, ge=2, description="Chain length of the random Hamiltonians")


class ExperimentConfig(StrictModel):
    """One experiment run."""

    experiment: str = Field(..., description="Catalogue name")
    label: Optional[str] = Field(None, description="Name used for the output file")
    model: Optional[ModelConfig] = Field(None, description="Hamiltonian")
    algorithm: AlgorithmConfig = Field(default_factory=AlgorithmConfig)
    initial: Optional[InitialStateConfig] = Field(None, description="Start state")
    disorder: Optional[DisorderConfig] = Field(None, description="Random field")
    seed: int = Field(default=0, ge=0, description="Master seed")
    output: Optional[str] = Field(None, description="Result file (default: <output_dir>/<label>.<format>)")
    format: ResultFormat = Field(default=ResultFormat.CSV, description="csv or jsonl")
    oracle: bool = Field(default=True, description="Compare against dense oracles when feasible")

    @property
    def name(self) -> str:
        return self.label or self.experiment


class BatchConfig(StrictModel):
    """Several experiments from one file."""

    experiments: List[ExperimentConfig] = Field(..., min_length=1)
