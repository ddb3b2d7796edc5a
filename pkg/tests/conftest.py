import numpy as np
import pytest

from fractorus.grids import FracParams, TorusGrid
from fractorus.nonlinearity import NonlinearitySpec


@pytest.fixture
def grid64():
    return TorusGrid(N=1, T=2 * np.pi, n=64)


@pytest.fixture
def grid2d():
    return TorusGrid(N=2, T=2 * np.pi, n=16)


@pytest.fixture
def params_half():
    return FracParams(s=0.5, m=1.0)


@pytest.fixture
def cubic():
    return NonlinearitySpec(kind="pure_power", p=3.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
