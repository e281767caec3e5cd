import io

import numpy as np
import pytest
from hypothesis import given, settings

from conftest import graphs
from dpgemb.graph import (
    GraphFormatError,
    degree,
    from_edges,
    has_edge,
    load_edge_list,
    write_edge_list,
    write_relabel_map,
)


def load(text, **kw):
    return load_edge_list(io.StringIO(text), **kw)


class TestLoadEdgeList:
    def test_simple_path(self):
        g = load("0 1\n1 2\n")
        assert (g.num_nodes, g.num_edges) == (3, 2)

    def test_self_loop_dropped(self):
        g = load("0 0\n0 1\n")
        assert (g.num_nodes, g.num_edges) == (2, 1)
        assert g.self_loops_dropped == 1

    def test_symmetric_duplicate(self):
        g = load("0 1\n1 0\n")
        assert (g.num_nodes, g.num_edges) == (2, 1)

    def test_comments_and_blank_lines(self):
        g = load("# header\n\n0 1\n# mid\n1 2\n")
        assert g.num_edges == 2

    def test_non_numeric_without_relabel(self):
        with pytest.raises(GraphFormatError):
            load("a b\n")

    def test_relabel_maps_strings(self):
        g = load("alice bob\nbob carol\n", relabel=True)
        assert g.labels == ("alice", "bob", "carol")
        assert has_edge(g, 0, 1) and has_edge(g, 1, 2)
        buf = io.StringIO()
        write_relabel_map(g, buf)
        assert buf.getvalue() == "alice\t0\nbob\t1\ncarol\t2\n"

    def test_empty(self):
        with pytest.raises(GraphFormatError):
            load("# nothing\n")

    def test_only_self_loops_is_empty(self):
        with pytest.raises(GraphFormatError):
            load("3 3\n")

    def test_single_token_line(self):
        with pytest.raises(GraphFormatError):
            load("0 1\n2\n")

    def test_declared_count_mismatch(self):
        with pytest.raises(GraphFormatError):
            load("0 5\n", num_nodes=3)

    def test_declared_count_adds_isolated(self):
        g = load("0 1\n", num_nodes=4)
        assert g.num_nodes == 4
        assert degree(g, 3) == 0


def test_has_edge(triangle, path3):
    assert has_edge(triangle, 0, 1)
    assert not has_edge(triangle, 0, 0)
    assert not has_edge(path3, 0, 2)


def test_degree(star):
    assert degree(star, 0) == 3
    assert degree(star, 1) == 1
    with pytest.raises(IndexError):
        degree(star, 4)
    with pytest.raises(IndexError):
        has_edge(star, 0, 9)


@settings(max_examples=60, deadline=None)
@given(graphs())
def test_graph_invariants(g):
    assert g.degrees.sum() == 2 * g.num_edges
    assert np.all(g.edges[:, 0] < g.edges[:, 1])
    for i in range(g.num_nodes):
        nb = g.neighbors(i)
        assert np.all(np.diff(nb) > 0)
        assert not has_edge(g, i, i)
        for j in range(g.num_nodes):
            assert has_edge(g, i, j) == has_edge(g, j, i)


@settings(max_examples=40, deadline=None)
@given(graphs())
def test_round_trip_is_identity(g):
    buf = io.StringIO()
    write_edge_list(g, buf)
    buf.seek(0)
    again = load_edge_list(buf, num_nodes=g.num_nodes)
    assert again == g


def test_from_edges_rejects_out_of_range():
    with pytest.raises(GraphFormatError):
        from_edges(2, [(0, 2)])
