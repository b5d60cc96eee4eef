# tests/conftest.py
"""Shared fixtures and the slow-test gate"""

import os

import numpy as np
import pytest

from flmreg.features.fda_core.models import FunctionalDataset, Grid
from flmreg.features.simgen.schemas import SimDesign


def pytest_collection_modifyitems(config, items):
    if os.getenv("FLMREG_RUN_SLOW") == "1":
        return
    skip_slow = pytest.mark.skip(reason="set FLMREG_RUN_SLOW=1 to run full Monte-Carlo checks")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def grid20():
    return Grid.midpoint(20)


@pytest.fixture
def random_data(grid20):
    """n=30 smooth random curves with a noisy linear response"""
    rng = np.random.default_rng(11)
    t = grid20.points
    basis = np.vstack([np.ones_like(t)] + [np.sqrt(2) * np.cos(j * np.pi * t) for j in range(2, 9)])
    scores = rng.standard_normal((30, basis.shape[0])) / np.arange(1, basis.shape[0] + 1)
    X = scores @ basis + 0.05 * rng.standard_normal((30, grid20.m))
    beta = np.sin(2 * np.pi * t) + t
    y = 0.7 + X @ beta / grid20.m + 0.1 * rng.standard_normal(30)
    return FunctionalDataset(grid20, y, X)


@pytest.fixture
def rank_one_data(grid20):
    """X_i = z_i * phi with a noiseless response"""
    rng = np.random.default_rng(5)
    phi = np.sqrt(2) * np.cos(2 * np.pi * grid20.points)
    z = rng.standard_normal(12)
    X = np.outer(z, phi)
    y = 2.0 + 1.5 * z
    return FunctionalDataset(grid20, y, X)


@pytest.fixture
def small_design():
    return SimDesign(alpha_decay=2.0, n=40, m=20, n_components=10, seed=3)
