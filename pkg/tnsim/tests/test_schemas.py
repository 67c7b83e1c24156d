"""Tests for the configuration and result schemas."""

import math

import pytest
from pydantic import ValidationError

from schemas import (
    AlgorithmConfig,
    BatchConfig,
    DisorderConfig,
    ErrorSource,
    ExperimentConfig,
    InitialKind,
    InitialStateConfig,
    ModelConfig,
    ResultFormat,
    ResultRecord,
    TermConfig,
    RESULTS_SCHEMA_VERSION,
)


class TestModelConfig:
    def test_preset_table(self):
        model = ModelConfig(preset="heisenberg", params={"n": 6, "j": 1.0})
        assert model.params["n"] == 6
        assert model.boundary == "open"

    def test_preset_and_terms_are_exclusive(self):
        with pytest.raises(ValidationError, match="exactly one"):
            ModelConfig(preset="heisenberg", terms=[{"sites": [0], "ops": ["sz"]}], n=2)
        with pytest.raises(ValidationError, match="exactly one"):
            ModelConfig()

    def test_term_table_needs_site_count(self):
        with pytest.raises(ValidationError, match="'n'"):
            ModelConfig(terms=[{"sites": [0, 1], "ops": ["sz", "sz"]}])

    def test_unknown_keys_are_rejected(self):
        with pytest.raises(ValidationError):
            ModelConfig(preset="heisenberg", size=4)

    def test_non_finite_parameters_are_rejected(self):
        with pytest.raises(ValidationError, match="finite"):
            ModelConfig(preset="heisenberg", params={"n": 4, "j": math.nan})


class TestTermConfig:
    def test_operator_count_must_match_sites(self):
        with pytest.raises(ValidationError, match="lists 1 operators"):
            TermConfig(sites=[0, 1], ops=["sz"])

    def test_default_coupling(self):
        assert TermConfig(sites=[2], ops=["sx"]).coupling == 1.0

    def test_three_site_terms_are_rejected(self):
        with pytest.raises(ValidationError):
            TermConfig(sites=[0, 1, 2], ops=["sz", "sz", "sz"])


class TestAlgorithmConfig:
    def test_all_fields_optional(self):
        assert AlgorithmConfig().model_dump(exclude_none=True) == {}

    def test_infinite_time_is_rejected(self):
        with pytest.raises(ValidationError, match="finite"):
            AlgorithmConfig(t_total=math.inf)

    def test_negative_step_is_rejected(self):
        with pytest.raises(ValidationError):
            AlgorithmConfig(dt=-0.1)

    def test_order_range(self):
        with pytest.raises(ValidationError):
            AlgorithmConfig(order=3)

    def test_non_finite_list_entry(self):
        with pytest.raises(ValidationError, match="finite"):
            AlgorithmConfig(betas=[0.5, math.inf])


class TestInitialAndDisorder:
    def test_trap_mott_needs_trap_parameters(self):
        with pytest.raises(ValidationError, match="v0 and mu"):
            InitialStateConfig(kind="trap_mott", v0=36.0)
        assert InitialStateConfig(kind="trap_mott", v0=36.0, mu=3.4).kind == InitialKind.TRAP_MOTT

    def test_unknown_start_state(self):
        with pytest.raises(ValidationError):
            InitialStateConfig(kind="ferro")

    def test_probabilities_must_match_values(self):
        with pytest.raises(ValidationError, match="one probability per value"):
            DisorderConfig(values=[-0.5, 0.5], probabilities=[1.0])

    def test_probabilities_must_sum_to_one(self):
        with pytest.raises(ValidationError, match="sum to 1"):
            DisorderConfig(values=[-0.5, 0.5], probabilities=[0.5, 0.6])

    def test_disorder_defaults(self):
        disorder = DisorderConfig(values=[-0.5, 0.5])
        assert disorder.operator == "sz"
        assert disorder.sites is None


class TestExperimentConfig:
    def test_name_prefers_label(self):
        cfg = ExperimentConfig(experiment="heisenberg_gs", label="chain10")
        assert cfg.name == "chain10"
        assert ExperimentConfig(experiment="heisenberg_gs").name == "heisenberg_gs"

    def test_defaults(self):
        cfg = ExperimentConfig(experiment="dos_chain")
        assert cfg.format == ResultFormat.CSV
        assert cfg.seed == 0
        assert cfg.oracle

    def test_negative_seed_is_rejected(self):
        with pytest.raises(ValidationError):
            ExperimentConfig(experiment="dos_chain", seed=-1)

    def test_nested_tables(self):
        cfg = ExperimentConfig.model_validate({
            "experiment": "quench_flipped_spin",
            "model": {"preset": "heisenberg", "params": {"n": 10}},
            "algorithm": {"bond": 5, "t_total": 1.5},
            "format": "jsonl",
        })
        assert cfg.algorithm.bond == 5
        assert cfg.format == ResultFormat.JSON_LINES

    def test_empty_batch_is_rejected(self):
        with pytest.raises(ValidationError):
            BatchConfig(experiments=[])


class TestResultRecord:
    def test_defaults(self):
        record = ResultRecord(experiment="x", metric="E0", value=-1.0, error_source=ErrorSource.VARIANCE)
        assert record.schema_version == RESULTS_SCHEMA_VERSION
        assert record.converged
        assert record.wall_time is None

    def test_unknown_error_source(self):
        with pytest.raises(ValidationError):
            ResultRecord(experiment="x", metric="E0", value=-1.0, error_source="guess")

    def test_extra_fields_are_rejected(self):
        with pytest.raises(ValidationError):
            ResultRecord(experiment="x", metric="E0", value=-1.0, error_source="exact", note="hi")
