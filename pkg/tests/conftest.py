import numpy as np
import pytest

from maglattice.config import table1_spec
from maglattice.magnetostatics import build_prisms
from maglattice.traps import extract_sites


@pytest.fixture(scope="session")
def t1_spec():
    return table1_spec()


@pytest.fixture(scope="session")
def t1_prisms(t1_spec):
    return build_prisms(t1_spec)


@pytest.fixture(scope="session")
def t1_sites(t1_prisms, t1_spec):
    return extract_sites(t1_prisms, t1_spec)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
