import numpy as np
import pytest

from crlab.models.reinhardt import random_points as reinhardt_points
from crlab.models.reinhardt import reinhardt_chart
from crlab.models.sphere import random_points as sphere_points
from crlab.models.sphere import sphere_chart
from crlab.quotient import build_quotient


@pytest.fixture(scope="session")
def quotient():
    return build_quotient()


@pytest.fixture(scope="session")
def sphere():
    return sphere_chart()


@pytest.fixture(scope="session")
def reinhardt():
    return reinhardt_chart()


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def sphere_pts():
    return sphere_points(np.random.default_rng(11), 5)


@pytest.fixture(scope="session")
def reinhardt_pts():
    return reinhardt_points(np.random.default_rng(12), 5)
