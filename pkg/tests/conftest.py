import numpy as np
import pytest

from rbwalk.graph import complete_graph, cycle_graph, plastic_graph, random_strongly_connected


def random_graphs(count=20, seed=2024, max_n=8):
    rng = np.random.default_rng(seed)
    graphs = []
    for k in range(count):
        n = int(rng.integers(2, max_n + 1))
        density = float(rng.uniform(0.1, 0.5))
        graphs.append(random_strongly_connected(n, density, seed=[seed, k]))
    return graphs


@pytest.fixture
def k3():
    return complete_graph(3)


@pytest.fixture
def two_cycle():
    return cycle_graph(2)


@pytest.fixture
def plastic():
    return plastic_graph()


@pytest.fixture(scope="session")
def test_graphs():
    return [complete_graph(3), cycle_graph(2), plastic_graph()] + random_graphs()


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
