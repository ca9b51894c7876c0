import numpy as np
import pytest

from tfch.spectral_field import Grid


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def unit_grid():
    return Grid(32, 32, 1.0, 1.0)
