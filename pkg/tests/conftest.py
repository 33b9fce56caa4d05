"""Pytest configuration and fixtures."""

from pathlib import Path

import pytest

from fou_periodic.basis import PeriodicDrift
from fou_periodic.fbm import FbmPath, generate_fbm_path
from fou_periodic.process import simulate_exact

DEMO_CONFIG = """
[model]
basis = constant, cos:1
mu = 1.0, 0.5
alpha = 0.5
H = 0.7

[grid]
dt = 2^-6
horizons = 2, 3

[mc]
replications = 4
base_seed = 12345

[tests]
limit_draws = 60
limit_dt = 2^-6

[output]
directory = results
"""


@pytest.fixture(autouse=True)
def clear_env_vars(monkeypatch):
    """Keep the caller's FOU_THREADS out of the tests."""
    monkeypatch.delenv("FOU_THREADS", raising=False)


@pytest.fixture
def constant_drift():
    """L(t) = 1."""
    return PeriodicDrift.from_spec(["constant"], [1.0])


@pytest.fixture
def mixed_drift():
    """L(t) = 1 + 0.5 sqrt(2) cos(2 pi t) - 0.3 sqrt(2) sin(2 pi t)."""
    return PeriodicDrift.from_spec(["constant", "cos:1", "sin:1"], [1.0, 0.5, -0.3])


@pytest.fixture
def noisy_path(mixed_drift):
    """One seeded path, H = 0.7, alpha = 0.5, n = 6, dt = 2^-8."""
    bh = generate_fbm_path(0.7, 6 * 256, 2.0**-8, seed=7)
    return simulate_exact(mixed_drift, 0.5, bh)


@pytest.fixture
def zero_noise_path():
    """Noise-free path of L = 1 + 0.5 sqrt(2) cos(2 pi t), alpha = 0.5, n = 8, dt = 2^-12."""
    drift = PeriodicDrift.from_spec(["constant", "cos:1"], [1.0, 0.5])
    return simulate_exact(drift, 0.5, FbmPath.zero(0.7, 8 * 4096, 2.0**-12))


@pytest.fixture
def demo_config(tmp_path) -> Path:
    """A small experiment config file."""
    path = tmp_path / "demo.cfg"
    path.write_text(DEMO_CONFIG)
    return path
