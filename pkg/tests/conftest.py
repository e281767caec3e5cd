import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from dpgemb.graph import from_edges  # noqa: E402


@pytest.fixture
def triangle():
    return from_edges(3, [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def path3():
    return from_edges(3, [(0, 1), (1, 2)])


@pytest.fixture
def star():
    # center 0, leaves 1..3
    return from_edges(4, [(0, 1), (0, 2), (0, 3)])


@st.composite
def graphs(draw, min_nodes=3, max_nodes=12):
    n = draw(st.integers(min_nodes, max_nodes))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), min_size=1, max_size=len(pairs), unique=True))
    return from_edges(n, chosen)


def ring_plus_rewiring(n, k, p, seed):
    import networkx as nx

    G = nx.watts_strogatz_graph(n, k, p, seed=seed)
    return from_edges(n, list(G.edges()))


def random_connected(n, p, seed, max_degree=None):
    import networkx as nx

    rng = np.random.default_rng(seed)
    max_degree = n - 2 if max_degree is None else max_degree
    while True:
        G = nx.gnp_random_graph(n, p, seed=int(rng.integers(2**31)))
        if nx.is_connected(G) and max(d for _, d in G.degree()) <= max_degree:
            return from_edges(n, list(G.edges()))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
