import numpy as np
import pytest

from lvg.graph import WeightedGraph
from lvg.lattice import lattice_window


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


@pytest.fixture
def window3():
    return lattice_window(3, ghost=True)


@pytest.fixture
def path_ab():
    return WeightedGraph({0: 1.0, 1: 1.0}, [(0, 1, 1.0)])


def pytest_terminal_summary(terminalreporter):
    import test_acceptance
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
