"""Structural-equivalence and link-prediction metrics, plus fixed-point diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist
from scipy.special import expit
from scipy.stats import rankdata

from .graph import Graph, from_edges
from .proximity import ProximityMatrix

EXACT_STRUCEQU_LIMIT = 5000


class MetricError(ValueError):
    pass


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    a = a - a.mean()
    b = b - b.mean()
    da, db = np.sqrt(a @ a), np.sqrt(b @ b)
    if da == 0 or db == 0:
        raise MetricError("zero variance in a distance series; correlation undefined")
    return float(np.clip((a @ b) / (da * db), -1.0, 1.0))


def struc_equ(
    g: Graph,
    emb: np.ndarray,
    num_pairs: int | None = None,
    seed: int | None = None,
) -> float:
    """Pearson correlation of adjacency-row and embedding-row Euclidean distances.

    Exact over all unordered pairs unless ``num_pairs`` is given (or the graph
    exceeds ``EXACT_STRUCEQU_LIMIT`` nodes), in which case that many random
    pairs are used.
    """
    emb = np.asarray(emb, dtype=np.float64)
    n = g.num_nodes
    if emb.shape[0] != n:
        raise MetricError(f"embedding has {emb.shape[0]} rows, graph has {n} nodes")
    if n < 3:
        raise MetricError("need at least 3 nodes")
    if num_pairs is None and n > EXACT_STRUCEQU_LIMIT:
        num_pairs = 1_000_000
    if num_pairs is None:
        return _pearson(pdist(g.to_dense()), pdist(emb))

    rng = np.random.default_rng(seed)
    i = rng.integers(0, n, size=num_pairs)
    j = rng.integers(0, n - 1, size=num_pairs)
    j = j + (j >= i)
    adj = g.to_sparse()
    diff = adj[i] - adj[j]
    da = np.sqrt(np.asarray(diff.multiply(diff).sum(axis=1)).ravel())
    de = np.linalg.norm(emb[i] - emb[j], axis=1)
    return _pearson(da, de)


@dataclass(frozen=True, eq=False)
class LinkSplit:
    train_graph: Graph
    test_pos: np.ndarray
    test_neg: np.ndarray
    train_neg: np.ndarray


def _sample_non_edges(g: Graph, count: int, rng: np.random.Generator) -> np.ndarray:
    n = g.num_nodes
    available = n * (n - 1) // 2 - g.num_edges
    if count > available:
        raise MetricError(f"need {count} non-edges but the graph has only {available}")
    edge_keys = set((g.edges[:, 0] * n + g.edges[:, 1]).tolist())
    if count * 2 > available:
        iu, ju = np.triu_indices(n, k=1)
        keys = iu * n + ju
        keys = keys[~np.isin(keys, list(edge_keys))]
        chosen = rng.choice(keys, size=count, replace=False)
    else:
        chosen_set: dict[int, None] = {}
        while len(chosen_set) < count:
            a = rng.integers(0, n, size=2 * (count - len(chosen_set)))
            b = rng.integers(0, n, size=a.shape[0])
            for x, y in zip(np.minimum(a, b).tolist(), np.maximum(a, b).tolist()):
                key = x * n + y
                if x != y and key not in edge_keys and key not in chosen_set:
                    chosen_set[key] = None
                    if len(chosen_set) == count:
                        break
        chosen = np.fromiter(chosen_set, dtype=np.int64, count=count)
    return np.stack([chosen // n, chosen % n], axis=1)


def split_links(g: Graph, test_fraction: float = 0.1, seed: int | None = None) -> LinkSplit:
    """Random edge split with equally many non-edge negatives per side.

    Negatives are distinct non-edges of ``g`` (no self pairs); test and train
    negatives do not overlap.
    """
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    m = g.num_edges
    n_test = max(1, int(round(test_fraction * m)))
    if n_test >= m:
        raise MetricError("split leaves no training edges")
    perm = rng.permutation(m)
    test_pos = g.edges[np.sort(perm[:n_test])]
    train_edges = g.edges[np.sort(perm[n_test:])]
    neg = _sample_non_edges(g, n_test + train_edges.shape[0], rng)
    train_graph = from_edges(g.num_nodes, train_edges, labels=g.labels)
    return LinkSplit(train_graph, test_pos, neg[:n_test], neg[n_test:])


def link_scores(emb: np.ndarray, pairs: np.ndarray) -> np.ndarray:
    pairs = np.asarray(pairs)
    return expit(np.einsum("ij,ij->i", emb[pairs[:, 0]], emb[pairs[:, 1]]))


def mann_whitney_auc(pos_scores: np.ndarray, neg_scores: np.ndarray) -> float:
    """P(score_pos > score_neg) + 0.5 P(tie)."""
    pos_scores = np.asarray(pos_scores, dtype=np.float64)
    neg_scores = np.asarray(neg_scores, dtype=np.float64)
    n_pos, n_neg = pos_scores.size, neg_scores.size
    if n_pos == 0 or n_neg == 0:
        raise MetricError("empty test set")
    ranks = rankdata(np.concatenate([pos_scores, neg_scores]))
    u = ranks[:n_pos].sum() - n_pos * (n_pos + 1) / 2
    return float(u / (n_pos * n_neg))


def auc(model, split: LinkSplit) -> float:
    """Link-prediction AUC with ``sigmoid(v_i . v_j)`` scores from ``w_in``."""
    emb = model.w_in if hasattr(model, "w_in") else np.asarray(model)
    return mann_whitney_auc(link_scores(emb, split.test_pos), link_scores(emb, split.test_neg))


@dataclass(frozen=True)
class ResidualStats:
    mean: float
    max: float
    prior_mean: float
    prior_max: float
    count: int


def fixed_point_targets(P: ProximityMatrix, k: int, pairs: np.ndarray) -> np.ndarray:
    """``log(p_ij / (k min(P)))`` for each pair."""
    p = P.values[pairs[:, 0], pairs[:, 1]]
    if np.any(p <= 0):
        raise MetricError("nonpositive proximity on an evaluated pair")
    return np.log(p / (k * P.min_positive))


def prior_work_targets(P: ProximityMatrix, k: int, g: Graph, pairs: np.ndarray) -> np.ndarray:
    """``log(p_ij D / (d_i d_j)) - log k`` with ``D = sum p`` (degree-based negative sampler)."""
    p = P.values[pairs[:, 0], pairs[:, 1]]
    if np.any(p <= 0):
        raise MetricError("nonpositive proximity on an evaluated pair")
    d = g.degrees.astype(np.float64)
    total = P.values.sum()
    return np.log(p * total / (d[pairs[:, 0]] * d[pairs[:, 1]])) - np.log(k)


def fixed_point_residual(
    model, P: ProximityMatrix, k: int, g: Graph, pairs: np.ndarray | None = None
) -> ResidualStats:
    """Residuals of ``w_in[i] . w_out[j]`` against both closed-form optima.

    ``pairs`` defaults to the canonical edges of ``g``.
    """
    pairs = g.edges if pairs is None else np.asarray(pairs)
    x = np.einsum("ij,ij->i", model.w_in[pairs[:, 0]], model.w_out[pairs[:, 1]])
    res = np.abs(x - fixed_point_targets(P, k, pairs))
    prior = np.abs(x - prior_work_targets(P, k, g, pairs))
    return ResidualStats(
        float(res.mean()), float(res.max()), float(prior.mean()), float(prior.max()), len(pairs)
    )
