import numpy as np
import pytest

from steerbeam import ArrayGeometry, Roi, StftConfig


@pytest.fixture
def cfg():
    return StftConfig()


@pytest.fixture
def geom():
    return ArrayGeometry()


@pytest.fixture
def roi():
    return Roi()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
