import numpy as np
import pytest

from colombeau.testobjects import make_bump, make_mollifier


@pytest.fixture(scope="session")
def bump():
    return make_bump(1.0, 1)


@pytest.fixture(scope="session")
def moll2():
    return make_mollifier(2)


@pytest.fixture(scope="session")
def moll4():
    return make_mollifier(4)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
