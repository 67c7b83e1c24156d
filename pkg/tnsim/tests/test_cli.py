"""Tests for the command-line entry point and its exit codes."""

import pytest

from config import settings
from main import EXIT_CONFIG, EXIT_INTERNAL, EXIT_OK, EXIT_UNCONVERGED, main
from modules.experiments import read_results

CHAIN_CONFIG = """
experiment = "heisenberg_gs"
label = "chain"

[model]
preset = "heisenberg"
params = { n = 4 }

[algorithm]
bond = 4
precision = 1e-10
"""

UNCONVERGED_CONFIG = """
experiment = "heisenberg_gs"
label = "short"

[model]
preset = "heisenberg"
params = { n = 6 }

[algorithm]
bond = 4
precision = 1e-14
max_sweeps = 1
states = 1
"""

BATCH_CONFIG = """
[[experiments]]
experiment = "heisenberg_gs"
label = "left"
format = "jsonl"
model = { preset = "heisenberg", params = { n = 4 } }
algorithm = { bond = 4, states = 1 }

[[experiments]]
experiment = "ising2d_partition"
label = "ising"
model = { preset = "ising", params = { rows = 2, cols = 2 } }
algorithm = { beta = 0.7, dtilde = 4 }
"""


@pytest.fixture
def write_config(tmp_path):
    def write(text: str, name: str = "run.toml"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return write


class TestListAndDescribe:
    def test_list(self, capsys):
        assert main(["list"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "heisenberg_gs" in out
        assert "peps_quench" in out

    def test_describe(self, capsys):
        assert main(["describe", "gibbs_chain"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "required: model, beta|betas" in out
        assert "trotter_steps = 64" in out

    def test_describe_unknown(self, capsys):
        assert main(["describe", "nonsense"]) == EXIT_CONFIG
        assert "valid names" in capsys.readouterr().err


class TestRun:
    def test_success(self, output_dir, write_config, capsys):
        assert main(["run", write_config(CHAIN_CONFIG)]) == EXIT_OK
        assert "chain: " in capsys.readouterr().out
        metrics = {r.metric for r in read_results(output_dir / "chain.csv")}
        assert {"E0", "E1", "overlap_1_0"} <= metrics

    def test_output_dir_flag(self, output_dir, write_config, tmp_path):
        target = tmp_path / "elsewhere"
        assert main(["run", write_config(CHAIN_CONFIG), "--output-dir", str(target)]) == EXIT_OK
        assert (target / "chain.csv").exists()

    def test_batch(self, output_dir, write_config, monkeypatch):
        monkeypatch.setattr(settings, "threads", 1)
        assert main(["run", write_config(BATCH_CONFIG), "--threads", "2"]) == EXIT_OK
        assert (output_dir / "left.jsonl").exists()
        ising = {r.metric: r.value for r in read_results(output_dir / "ising.csv")}
        assert ising["log_z@beta=0.7"] == pytest.approx(ising["log_z_oracle@beta=0.7"], rel=1e-10)

    def test_unconverged(self, output_dir, write_config):
        assert main(["run", write_config(UNCONVERGED_CONFIG)]) == EXIT_UNCONVERGED
        assert (output_dir / "short.csv").exists()

    def test_unconverged_allowed(self, output_dir, write_config):
        assert main(["run", write_config(UNCONVERGED_CONFIG), "--allow-unconverged"]) == EXIT_OK


class TestRunErrors:
    def test_unknown_key(self, output_dir, write_config, capsys):
        text = CHAIN_CONFIG.replace("bond = 4", "bond = 4\nbonds = 5")
        assert main(["run", write_config(text)]) == EXIT_CONFIG
        assert "algorithm.bonds" in capsys.readouterr().err

    def test_missing_required_input(self, output_dir, write_config, capsys):
        text = 'experiment = "gibbs_chain"\n[model]\npreset = "heisenberg"\nparams = { n = 4 }\n'
        assert main(["run", write_config(text)]) == EXIT_CONFIG
        assert "beta|betas" in capsys.readouterr().err

    def test_unknown_experiment(self, output_dir, write_config):
        assert main(["run", write_config('experiment = "nope"\n')]) == EXIT_CONFIG

    def test_bad_thread_count(self, output_dir, write_config, monkeypatch):
        monkeypatch.setattr(settings, "threads", 1)
        assert main(["run", write_config(CHAIN_CONFIG), "--threads", "0"]) == EXIT_CONFIG

    def test_missing_file(self, output_dir, tmp_path):
        assert main(["run", str(tmp_path / "absent.toml")]) == EXIT_CONFIG

    def test_internal_error(self, output_dir, write_config, mocker, capsys):
        mocker.patch("modules.experiments.service.ExperimentService.run_and_emit",
                     side_effect=RuntimeError("boom"))
        assert main(["run", write_config(CHAIN_CONFIG)]) == EXIT_INTERNAL
        assert "internal error: boom" in capsys.readouterr().err
