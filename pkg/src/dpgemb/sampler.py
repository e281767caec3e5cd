"""Positive-edge plus negative-node subgraphs and uniform batch subsampling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TextIO

import numpy as np

from .graph import Graph

RETRY_FACTOR = 100


class SamplingError(RuntimeError):
    pass


@dataclass(frozen=True)
class SubgraphSample:
    center: int
    positive: int
    negatives: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class SubgraphSet:
    """Column layout of many :class:`SubgraphSample` records.

    ``negatives`` has shape ``(len, k)``.
    """

    centers: np.ndarray
    positives: np.ndarray
    negatives: np.ndarray

    def __len__(self) -> int:
        return int(self.centers.shape[0])

    @property
    def k(self) -> int:
        return int(self.negatives.shape[1])

    def __getitem__(self, idx: int) -> SubgraphSample:
        return SubgraphSample(
            int(self.centers[idx]),
            int(self.positives[idx]),
            tuple(int(n) for n in self.negatives[idx]),
        )

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def take(self, idx: np.ndarray) -> "SubgraphSet":
        return SubgraphSet(self.centers[idx], self.positives[idx], self.negatives[idx])

    def with_negatives(self, negatives: np.ndarray) -> "SubgraphSet":
        return SubgraphSet(self.centers, self.positives, negatives)

    @classmethod
    def from_samples(cls, samples) -> "SubgraphSet":
        samples = list(samples)
        return cls(
            np.array([s.center for s in samples], dtype=np.int64),
            np.array([s.positive for s in samples], dtype=np.int64),
            np.array([s.negatives for s in samples], dtype=np.int64).reshape(len(samples), -1),
        )


def _edge_keys(g: Graph) -> np.ndarray:
    rows = np.repeat(np.arange(g.num_nodes, dtype=np.int64), g.degrees)
    return rows * g.num_nodes + g.indices  # sorted: CSR rows and columns are sorted


def draw_negatives(
    g: Graph,
    centers: np.ndarray,
    k: int,
    rng: np.random.Generator,
    reject: bool = True,
) -> np.ndarray:
    """Draw ``k`` negatives per center, uniform over ``V``.

    With ``reject`` a draw equal to the center or adjacent to it is redrawn,
    up to ``100 * k`` draws per slot. Without it every node (the center
    included) is admissible.
    """
    n = g.num_nodes
    centers = np.asarray(centers, dtype=np.int64)
    neg = rng.integers(0, n, size=(centers.shape[0], k))
    if not reject or centers.size == 0:
        return neg

    deg = g.degrees[centers]
    full = np.flatnonzero(deg >= n - 1)
    if full.size:
        v = int(centers[full[0]])
        raise SamplingError(
            f"node {v} is adjacent to every other node; no valid negative exists"
        )
    keys = _edge_keys(g)
    cent = np.broadcast_to(centers[:, None], neg.shape)

    def invalid(cand, c):
        key = c * n + cand
        pos = np.searchsorted(keys, key)
        pos = np.minimum(pos, keys.shape[0] - 1)
        return (cand == c) | (keys[pos] == key)

    bad = invalid(neg, cent)
    draws = 1
    while bad.any():
        if draws >= RETRY_FACTOR * k:
            v = int(cent[bad][0])
            raise SamplingError(f"retry budget of {RETRY_FACTOR * k} draws exceeded at node {v}")
        neg[bad] = rng.integers(0, n, size=int(bad.sum()))
        bad[bad] = invalid(neg[bad], cent[bad])
        draws += 1
    return neg


def generate_subgraphs(
    g: Graph,
    k: int,
    seed: int | np.random.Generator | None = None,
    reject: bool = True,
    both_directions: bool = False,
) -> SubgraphSet:
    """One sample per undirected edge ``(i, j)``, ``i < j``, centered at ``i``.

    ``both_directions`` adds the reversed sample centered at ``j``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if g.num_edges == 0:
        raise ValueError("graph has no edges")
    rng = np.random.default_rng(seed)
    centers, positives = g.edges[:, 0], g.edges[:, 1]
    if both_directions:
        centers, positives = np.concatenate([centers, positives]), np.concatenate([positives, centers])
    negatives = draw_negatives(g, centers, k, rng, reject=reject)
    return SubgraphSet(centers.copy(), positives.copy(), negatives)


def sample_batch(
    num_samples: int, B: int, seed: int | np.random.Generator | None = None
) -> tuple[np.ndarray, float]:
    """``B`` distinct indices drawn uniformly without replacement, plus ``gamma = B / num_samples``."""
    if not 1 <= B <= num_samples:
        raise ValueError(f"batch size {B} must lie in [1, {num_samples}]")
    rng = np.random.default_rng(seed)
    idx = rng.choice(num_samples, size=B, replace=False)
    return idx, B / num_samples


def write_subgraphs(samples: SubgraphSet, fh: TextIO) -> None:
    for c, p, negs in zip(samples.centers, samples.positives, samples.negatives):
        fh.write(" ".join(str(int(x)) for x in (c, p, *negs)) + "\n")


def read_subgraphs(fh: TextIO) -> SubgraphSet:
    rows = [list(map(int, line.split())) for line in fh if line.strip()]
    if not rows:
        raise ValueError("empty subgraph cache")
    arr = np.array(rows, dtype=np.int64)
    return SubgraphSet(arr[:, 0].copy(), arr[:, 1].copy(), arr[:, 2:].copy())
