import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import graphs
from dpgemb.graph import from_edges
from dpgemb.proximity import (
    ProximityKind,
    ProximityMatrix,
    deepwalk_proximity,
    degree_proximity,
    load_proximity,
    negative_weight,
    negative_weights,
    sampler_mass_violations,
    save_proximity,
    transition_matrix,
)


def brute_transition_mean(adj, T):
    adj = np.asarray(adj, dtype=float)
    deg = adj.sum(axis=1)
    trans = np.zeros_like(adj)
    for i in range(len(adj)):
        if deg[i]:
            trans[i] = adj[i] / deg[i]
    acc = np.zeros_like(adj)
    power = np.eye(len(adj))
    for _ in range(T):
        power = power @ trans
        acc += power
    acc /= T
    np.fill_diagonal(acc, 0.0)
    return acc


class TestDegreeProximity:
    def test_triangle(self, triangle):
        P = degree_proximity(triangle)
        off = ~np.eye(3, dtype=bool)
        assert np.all(P.values[off] == 4) and np.all(np.diag(P.values) == 0)
        assert P.min_positive == 4

    def test_star(self, star):
        P = degree_proximity(star)
        assert P.values[0, 1] == 3
        assert P.values[1, 2] == 1
        assert P.min_positive == 1

    def test_path(self, path3):
        # brute-force product table of degrees (1, 2, 1)
        P = degree_proximity(path3)
        assert P.values[0, 1] == 2 and P.values[0, 2] == 1
        assert P.row_sums[0] == 3

    def test_no_edges(self):
        with pytest.raises(ValueError):
            degree_proximity(from_edges(3, []))


class TestDeepWalkProximity:
    def test_path_window_one(self, path3):
        P = deepwalk_proximity(path3, 1)
        assert P.values[0, 1] == 1.0
        assert P.values[1, 0] == 0.5
        assert P.values[0, 2] == 0.0

    def test_path_window_two(self, path3):
        P = deepwalk_proximity(path3, 2)
        np.testing.assert_allclose(P.values, brute_transition_mean(path3.to_dense(), 2))
        assert P.values[0, 1] == pytest.approx(0.5)
        assert P.values[0, 2] == pytest.approx(0.25)
        assert P.min_positive == pytest.approx(0.25)

    def test_regular_window_one(self):
        cycle = from_edges(6, [(i, (i + 1) % 6) for i in range(6)])
        P = deepwalk_proximity(cycle, 1)
        A = cycle.to_dense()
        np.testing.assert_allclose(P.values, A / 2)

    def test_zero_window(self, path3):
        with pytest.raises(ValueError):
            deepwalk_proximity(path3, 0)

    def test_isolated_rows_are_zero(self):
        g = from_edges(4, [(0, 1), (1, 2)])
        P = deepwalk_proximity(g, 3)
        assert np.all(P.values[3] == 0) and np.all(P.values[:, 3] == 0)

    @settings(max_examples=30, deadline=None)
    @given(graphs(), st.integers(1, 6))
    def test_matches_dense_matrix_powers(self, g, T):
        P = deepwalk_proximity(g, T)
        np.testing.assert_allclose(P.values, brute_transition_mean(g.to_dense(), T), atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(graphs(), st.integers(1, 6))
    def test_powers_are_row_stochastic(self, g, T):
        trans = transition_matrix(g).toarray()
        power = np.eye(g.num_nodes)
        nonisolated = g.degrees > 0
        for _ in range(T):
            power = trans @ power
            np.testing.assert_allclose(power.sum(axis=1)[nonisolated], 1.0, atol=1e-9)


class TestNegativeWeight:
    def test_path_window_two(self, path3):
        # stored row a is (0, 0.5, 0.25): sum 0.75, so w_a = 3 * 0.25 / 0.75
        P = deepwalk_proximity(path3, 2)
        assert P.row_sums[0] == pytest.approx(0.75)
        assert negative_weight(P, 0) == pytest.approx(1.0)

    def test_uniform(self):
        n, c = 5, 0.3
        P = ProximityMatrix(c * (1 - np.eye(n)), ProximityKind.DEGREE)
        for i in range(n):
            assert negative_weight(P, i) == pytest.approx(n / (n - 1))

    def test_triangle_degree(self, triangle):
        assert negative_weight(degree_proximity(triangle), 0) == pytest.approx(1.5)

    def test_zero_row(self):
        g = from_edges(4, [(0, 1), (1, 2)])
        with pytest.raises(ValueError):
            negative_weight(deepwalk_proximity(g, 2), 3)

    def test_support_restricted(self, path3):
        P = deepwalk_proximity(path3, 2)
        w = negative_weights(P, np.array([0, 1]), np.array([1, 2]))
        # center 0 carries p01 = 0.5, center 1 carries p12 = 0.25
        np.testing.assert_allclose(w, [3 * 0.25 / 0.5, 3 * 0.25 / 0.25, 0.0])

    @settings(max_examples=30, deadline=None)
    @given(graphs(), st.floats(0.01, 100))
    def test_scale_invariance(self, g, c):
        P = deepwalk_proximity(g, 3)
        np.testing.assert_allclose(negative_weights(P.scaled(c)), negative_weights(P), rtol=1e-12)


def test_mass_violations_reported(star):
    # star rows sum to 9 (center) and 5 (leaves), both above min(P) = 1
    assert sampler_mass_violations(degree_proximity(star)).size == 0
    P = ProximityMatrix(np.array([[0, 1.0], [1.0, 0]]), ProximityKind.DEGREE)
    # min/rowsum = 1 is not inside the open interval
    np.testing.assert_array_equal(sampler_mass_violations(P), [0, 1])


@settings(max_examples=30, deadline=None)
@given(graphs())
def test_matrix_invariants(g):
    P = degree_proximity(g)
    np.testing.assert_array_equal(P.values, P.values.T)
    assert np.all(np.diag(P.values) == 0)
    assert P.min_positive > 0
    assert np.array_equal(P.row_sums, P.values.sum(axis=1))
    assert degree_proximity(g).min_positive == P.min_positive


def test_cache_round_trip(tmp_path, path3):
    P = deepwalk_proximity(path3, 2)
    save_proximity(P, tmp_path / "p.bin")
    Q = load_proximity(tmp_path / "p.bin")
    assert Q.kind is ProximityKind.DEEPWALK and Q.window == 2
    np.testing.assert_array_equal(P.values, Q.values)
    (tmp_path / "bad.bin").write_bytes(b"nope")
    with pytest.raises(ValueError):
        load_proximity(tmp_path / "bad.bin")
