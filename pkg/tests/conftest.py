import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hypercurv import SpaceForm, build_grid

settings.register_profile("repo", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


@pytest.fixture(scope="session")
def hyperbolic():
    return SpaceForm(-1)


@pytest.fixture(scope="session")
def spherical():
    return SpaceForm(1)


@pytest.fixture(scope="session")
def circle64():
    return build_grid(1, 64)


@pytest.fixture(scope="session")
def sphere16():
    return build_grid(2, 16)


def max_err(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
