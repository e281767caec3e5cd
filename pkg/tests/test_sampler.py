import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import graphs
from dpgemb.graph import from_edges, has_edge
from dpgemb.sampler import (
    SamplingError,
    SubgraphSet,
    draw_negatives,
    generate_subgraphs,
    read_subgraphs,
    sample_batch,
    write_subgraphs,
)


def test_path_negative_is_forced(path3):
    # center 0 has a single non-neighbour: node 2
    negs = draw_negatives(path3, np.array([0]), 1, np.random.default_rng(0))
    assert negs.tolist() == [[2]]


def test_path_generation_fails_on_dominating_center(path3):
    # edge (1, 2) is centered at 1, which is adjacent to every other node
    with pytest.raises(SamplingError, match="node 1"):
        generate_subgraphs(path3, 1, seed=0)


def test_complete_graph_has_no_negatives(triangle):
    with pytest.raises(SamplingError):
        generate_subgraphs(triangle, 1, seed=0)


def test_star_leaf_center(star):
    negs = draw_negatives(star, np.array([1] * 50), 2, np.random.default_rng(3))
    assert set(negs.ravel().tolist()) == {2, 3}


def test_without_rejection_any_node_allowed(triangle):
    S = generate_subgraphs(triangle, 4, seed=1, reject=False)
    assert len(S) == 3 and S.k == 4
    assert S.negatives.min() >= 0 and S.negatives.max() < 3


def test_both_directions(star):
    star2 = from_edges(5, [(0, 1), (0, 2), (0, 3), (3, 4)])
    S = generate_subgraphs(star2, 1, seed=0, both_directions=True)
    assert len(S) == 2 * star2.num_edges
    assert sorted(zip(S.centers.tolist(), S.positives.tolist())) == sorted(
        [(0, 1), (0, 2), (0, 3), (3, 4), (1, 0), (2, 0), (3, 0), (4, 3)]
    )


def test_bad_k(star):
    with pytest.raises(ValueError):
        generate_subgraphs(star, 0)


@settings(max_examples=60, deadline=None)
@given(graphs(min_nodes=4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_samples_satisfy_invariants(g, k, seed):
    try:
        S = generate_subgraphs(g, k, seed=seed)
    except SamplingError as exc:
        dominated = (g.degrees[g.edges[:, 0]] >= g.num_nodes - 1).any()
        assert dominated or "retry budget" in str(exc)
        return
    assert len(S) == g.num_edges
    for s in S:
        assert has_edge(g, s.center, s.positive)
        assert len(s.negatives) == k
        for n in s.negatives:
            assert n != s.center and not has_edge(g, s.center, n)


def test_reproducible():
    g = from_edges(8, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7)])
    a = generate_subgraphs(g, 3, seed=42)
    b = generate_subgraphs(g, 3, seed=42)
    np.testing.assert_array_equal(a.negatives, b.negatives)
    ia, _ = sample_batch(len(a), 4, seed=7)
    ib, _ = sample_batch(len(a), 4, seed=7)
    np.testing.assert_array_equal(ia, ib)


def test_negative_frequencies_uniform():
    # center 0 of a 12-cycle has 9 valid negatives
    g = from_edges(12, [(i, (i + 1) % 12) for i in range(12)])
    draws = 18000
    negs = draw_negatives(g, np.zeros(draws, dtype=np.int64), 1, np.random.default_rng(11)).ravel()
    valid = sorted(set(range(12)) - {0, 1, 11})
    counts = np.bincount(negs, minlength=12)
    assert counts[[0, 1, 11]].sum() == 0
    expected = draws / len(valid)
    sd = np.sqrt(draws * (1 / len(valid)) * (1 - 1 / len(valid)))
    assert np.all(np.abs(counts[valid] - expected) <= 3 * sd)


class TestSampleBatch:
    def test_exhaustive(self):
        idx, gamma = sample_batch(10, 10, seed=0)
        assert sorted(idx.tolist()) == list(range(10)) and gamma == 1.0

    def test_arxiv_ratio(self):
        idx, gamma = sample_batch(14496, 128, seed=0)
        assert len(set(idx.tolist())) == 128
        assert gamma == pytest.approx(0.00883, abs=5e-6)

    def test_deterministic_single(self):
        assert sample_batch(5, 1, seed=3)[0][0] == sample_batch(5, 1, seed=3)[0][0]

    def test_too_large(self):
        with pytest.raises(ValueError):
            sample_batch(5, 6)


def test_cache_round_trip():
    g = from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)])
    S = generate_subgraphs(g, 2, seed=0)
    buf = io.StringIO()
    write_subgraphs(S, buf)
    assert buf.getvalue().splitlines()[0].split()[:2] == ["0", "1"]
    buf.seek(0)
    T = read_subgraphs(buf)
    for arr in ("centers", "positives", "negatives"):
        np.testing.assert_array_equal(getattr(S, arr), getattr(T, arr))
    assert SubgraphSet.from_samples(list(S)).negatives.tolist() == S.negatives.tolist()
