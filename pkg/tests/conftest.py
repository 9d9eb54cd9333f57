import pytest

from commhide.detection import Partition
from commhide.graph import Graph, generate_planted_partition

acceptance_lines: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)


def clique_edges(nodes):
    nodes = list(nodes)
    return [(u, v) for i, u in enumerate(nodes) for v in nodes[i + 1:]]


@pytest.fixture
def two_triangles():
    """Two triangles joined by a single bridge; the classic split is obvious."""
    return Graph(6, clique_edges([0, 1, 2]) + clique_edges([3, 4, 5]) + [(2, 3)])


@pytest.fixture
def two_5cliques():
    return Graph(10, clique_edges(range(5)) + clique_edges(range(5, 10)) + [(0, 5)])


@pytest.fixture
def clique_ring():
    """Four 6-cliques chained in a ring by single bridges.

    Unlike two equal cliques, a node here can be pulled into a neighboring
    clique with a realistic number of added links, so this is the benchmark
    for target-node attacks in unit tests.
    """
    edges = []
    for b in range(4):
        edges += clique_edges(range(6 * b, 6 * b + 6))
    for b in range(4):
        edges.append((6 * b, 6 * ((b + 1) % 4) + 3))
    return Graph(24, edges)


@pytest.fixture
def asym_cliques():
    """A 10-clique and a 4-clique joined by one bridge.

    The light foreign community makes a modularity detector willing to adopt
    a heavy-clique member after only a few added cross links, so target-node
    baselines have room to succeed here.
    """
    return Graph(14, clique_edges(range(10)) + clique_edges(range(10, 14))
                 + [(0, 10)])


@pytest.fixture(scope="session")
def planted_small():
    """Planted partition 4 x 16, dense enough for quick attack runs."""
    return generate_planted_partition([16] * 4, 0.4, 0.03, seed=11)


@pytest.fixture(scope="session")
def planted_432():
    """The 4 x 32 benchmark used throughout the acceptance runs."""
    return generate_planted_partition([32] * 4, 0.3, 0.02, seed=5)


@pytest.fixture
def triangle_split(two_triangles):
    return Partition([0, 0, 0, 1, 1, 1])
