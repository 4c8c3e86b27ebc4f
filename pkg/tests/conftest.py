import numpy as np
import pytest

from gaussqcr.modes import Grid


@pytest.fixture(scope="session")
def grid():
    return Grid.uniform(-8.0, 8.0, 1024)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
