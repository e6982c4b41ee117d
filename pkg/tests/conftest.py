import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from measure_model import VelocityLengthMeasure, moments  # noqa: E402
from sampler import GasParameters, PointConfiguration, sample  # noqa: E402


@pytest.fixture
def setup_a():
    return VelocityLengthMeasure.two_velocity(1.0, 0.5, 1.0)


@pytest.fixture
def setup_b():
    return VelocityLengthMeasure([-1.0, 0.0, 1.0], [0.5, 0.5, 0.5], [1 / 3] * 3, 1.0)


@pytest.fixture
def m_a(setup_a):
    return moments(setup_a)


@pytest.fixture
def mixed_measure():
    """Three atoms with one negative length, sigma > -1."""
    return VelocityLengthMeasure([-0.7, 0.2, 1.3], [0.4, -0.3, 0.9], [0.3, 0.5, 0.2], 1.7)


@pytest.fixture
def small_configs(mixed_measure):
    """Random configurations of at most 100 particles on [-5, 5]."""
    configs = []
    rng = np.random.default_rng(2024)
    for i in range(100):
        eps = float(rng.uniform(0.05, 0.5))
        X = sample(GasParameters(eps, -5.0, 5.0, seed=11, trial_index=i), mixed_measure)
        if X.n > 100:
            keep = np.sort(rng.choice(X.n, 100, replace=False))
            X = PointConfiguration(X.ids[keep], X.x[keep], X.atom[keep], mixed_measure.v, mixed_measure.r,
                                   eps, X.window)
        configs.append(X)
    return configs
