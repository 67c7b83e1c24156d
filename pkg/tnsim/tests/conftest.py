"""Shared fixtures for the tnsim test suite."""

import numpy as np
import pytest

from config import settings
from modules.experiments import reset_experiment_service


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def output_dir(tmp_path, monkeypatch):
    """Point result files at a temporary directory and start a fresh service."""
    monkeypatch.setattr(settings, "output_dir", str(tmp_path))
    reset_experiment_service()
    yield tmp_path
    reset_experiment_service()


def random_hermitian(rng, dim: int) -> np.ndarray:
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (a + a.conj().T)
