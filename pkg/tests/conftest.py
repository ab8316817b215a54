import numpy as np
import pytest

from madelung_lab.grid import Grid


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def g1():
    return Grid.uniform(64)


@pytest.fixture
def g2():
    return Grid.uniform(32, dim=2)
