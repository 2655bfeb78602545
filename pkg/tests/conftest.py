import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from coeffs.families import coefficient_family  # noqa: E402
from simulate.initial_law import InitialLaw  # noqa: E402
from simulate.noise import NoiseBundle, TimeGrid  # noqa: E402


@pytest.fixture(autouse=True)
def isolated_dirs(tmp_path, monkeypatch):
    """Keep logs and outputs of every test inside its own tmp directory."""
    monkeypatch.setenv("LOGS_DIR", str(tmp_path / "logs"))
    monkeypatch.setenv("DATA_DIR", str(tmp_path / "data"))
    monkeypatch.delenv("MFSIM_THREADS", raising=False)


@pytest.fixture
def grid():
    return TimeGrid(horizon=1.0, n_steps=20)


@pytest.fixture
def noise(grid):
    return NoiseBundle.generate(grid, 64, 1, 1, seed=7)


@pytest.fixture
def gaussian_initial():
    return InitialLaw(kind="gaussian", dim=1, mean=0.0, std=1.0)


@pytest.fixture
def shift_model():
    """X_t = X_0 + W_t."""
    return coefficient_family("constant", {"sigma": 1.0, "alpha": 0.0, "b": 0.0}, d=1)


@pytest.fixture
def ou_model():
    return coefficient_family("mean_reversion_to_conditional_mean",
                              {"beta": 1.0, "sigma0": 1.0, "alpha0": 0.5}, d=1)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
