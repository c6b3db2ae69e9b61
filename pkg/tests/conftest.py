import math
import os
import sys

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "../src")))

from dynamics import make_propagator  # noqa: E402
from model import ChainState, ModelParams  # noqa: E402

TWO_PI = 2.0 * math.pi


def chain_propagator(omega0: float, g: float = 2.0, level: int = 0, n_max: int = 128, p: int = 1):
    params = ModelParams(omega=1.0, omega0=omega0, g=g, n_max=n_max)
    return make_propagator(params, p, ChainState.basis(p, level, n_max))


@pytest.fixture(scope="session")
def free_prop():
    """g/ω = 2, ω₀ = 0, |+,0_b⟩."""
    return chain_propagator(0.0)


@pytest.fixture(scope="session")
def prop_03():
    return chain_propagator(0.3)


@pytest.fixture(scope="session")
def prop_05():
    return chain_propagator(0.5)


@pytest.fixture
def vacuum():
    return ChainState.basis(1, 0, 64)
