import numpy as np
import pytest

from nlhardy.quad import QuadConfig


@pytest.fixture
def cfg():
    """Fast default Monte Carlo configuration for unit tests."""
    return QuadConfig(samples=30_000, seed=1234)


@pytest.fixture
def rng():
    return np.random.default_rng(987654321)
