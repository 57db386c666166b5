import numpy as np
import pytest

from selfair import RateDistribution


def det(rate):
    return RateDistribution.deterministic(rate)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def two_one():
    """Two users with constant rates 2 and 1."""
    return [det(2.0), det(1.0)]


@pytest.fixture
def coin_pair():
    """Two i.i.d. users on rates {1, 2} with equal probability."""
    d = RateDistribution((1.0, 2.0), (0.5, 0.5))
    return [d, d]


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k[2:])):
        terminalreporter.write_line(ACCEPTANCE[key])
