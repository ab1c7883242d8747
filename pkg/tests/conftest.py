import numpy as np
import pytest

from weightspace.sequences import build_sequence
from weightspace.weights import WeightFunction

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def mstar():
    return build_sequence("mstar", K=2000, rho=1.0)


@pytest.fixture(scope="session")
def mstar_wf(mstar):
    return WeightFunction.from_sequence(mstar)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
