import pytest

from wavepred.analysis import solution
from wavepred.filters import build_filter
from wavepred.operators import ModelSystem, connection_table


@pytest.fixture(scope="session")
def fb():
    return build_filter(4)


@pytest.fixture(scope="session")
def ct(fb):
    return connection_table(fb)


@pytest.fixture(scope="session")
def osc():
    return ModelSystem.harmonic(1.0)


@pytest.fixture(scope="session")
def solve(fb, osc):
    def get(M, halfwidth=8.0):
        return solution(osc, fb, M, halfwidth)
    return get
