import numpy as np
import pytest
from hypothesis import settings

from closedtraj import Params
from closedtraj.averaging import design_perturbation, target_from_roots

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def fig1():
    return Params(5.0, 4.0)


@pytest.fixture
def unit_params():
    return Params(1.0, 0.0, 1.0)


@pytest.fixture
def cubic(unit_params):
    # averaged function r^3 - r, single simple root at r = 1
    return design_perturbation(unit_params, target_from_roots([1.0]))


@pytest.fixture
def quintic(unit_params):
    # averaged function r^5 - 5 r^3 + 4 r, roots 1 and 2
    return design_perturbation(unit_params, target_from_roots([1.0, 2.0]))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
