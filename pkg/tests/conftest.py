import zlib

import numpy as np
import pytest

from lattice_pvss.crs import crs_gen
from lattice_pvss.params import ParamRequest, derive_params
from lattice_pvss.pke import PkeParams

DESK = ParamRequest(n=8, t=3, v=16, reps=16)


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: headline acceptance criteria")


@pytest.fixture(scope="session")
def desk():
    return derive_params(DESK)


@pytest.fixture(scope="session")
def pke_params(desk):
    return PkeParams.from_params(desk)


@pytest.fixture(scope="session")
def tcrs(desk):
    """Trapdoored CRS, needed wherever BadChallenge or inversion is exercised."""
    return crs_gen(desk, "trapdoored", np.random.default_rng(101))


@pytest.fixture(scope="session")
def rcrs(desk):
    return crs_gen(desk, "real", np.random.default_rng(202))


@pytest.fixture
def rng(request):
    # stable per test, independent across tests
    return np.random.default_rng(zlib.crc32(request.node.nodeid.encode()))
