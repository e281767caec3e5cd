"""Undirected simple graphs loaded from edge-list files."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np
import scipy.sparse as sps

logger = logging.getLogger(__name__)


class GraphFormatError(ValueError):
    """Raised when an edge list cannot be turned into a valid graph."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected simple graph in CSR layout.

    ``indptr``/``indices`` hold per-node sorted neighbour lists; ``edges`` is an
    ``(m, 2)`` array of canonical pairs ``i < j`` sorted lexicographically.
    ``labels`` maps dense ids back to original tokens when the graph was
    relabelled on load.
    """

    num_nodes: int
    indptr: np.ndarray
    indices: np.ndarray
    edges: np.ndarray
    labels: tuple[str, ...] | None = None
    self_loops_dropped: int = field(default=0, compare=False)

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, v: int) -> np.ndarray:
        self._check(v)
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def _check(self, v: int) -> None:
        if not 0 <= v < self.num_nodes:
            raise IndexError(f"node id {v} out of range [0, {self.num_nodes})")

    def to_sparse(self) -> sps.csr_matrix:
        data = np.ones(self.indices.shape[0], dtype=np.float64)
        return sps.csr_matrix(
            (data, self.indices, self.indptr), shape=(self.num_nodes, self.num_nodes)
        )

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.num_nodes == other.num_nodes
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.edges, other.edges)
        )

    __hash__ = None  # type: ignore[assignment]


def from_edges(
    num_nodes: int, edges: Iterable[tuple[int, int]] | np.ndarray, labels=None
) -> Graph:
    """Build a graph from integer pairs, dropping self-loops and duplicates."""
    arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges)
    arr = arr.reshape(-1, 2).astype(np.int64)
    if arr.size and (arr.min() < 0 or arr.max() >= num_nodes):
        raise GraphFormatError(
            f"edge endpoint outside [0, {num_nodes}): max id {arr.max()}"
        )
    loops = arr[:, 0] == arr[:, 1]
    n_loops = int(loops.sum())
    if n_loops:
        logger.warning("dropped %d self-loop(s)", n_loops)
    arr = np.sort(arr[~loops], axis=1)
    arr = np.unique(arr, axis=0) if arr.size else arr.reshape(0, 2)

    both = np.concatenate([arr, arr[:, ::-1]])
    order = np.lexsort((both[:, 1], both[:, 0]))
    both = both[order]
    counts = np.bincount(both[:, 0], minlength=num_nodes)
    indptr = np.zeros(num_nodes + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return Graph(
        num_nodes=int(num_nodes),
        indptr=indptr,
        indices=both[:, 1].copy(),
        edges=arr,
        labels=tuple(labels) if labels is not None else None,
        self_loops_dropped=n_loops,
    )


def load_edge_list(
    source: TextIO | Iterable[str],
    relabel: bool = False,
    num_nodes: int | None = None,
) -> Graph:
    """Parse a whitespace-separated edge list.

    Lines starting with ``#`` and blank lines are skipped. Without ``relabel``
    tokens must be non-negative integers and the node count is ``max id + 1``
    unless ``num_nodes`` is declared. With ``relabel`` tokens are arbitrary
    strings mapped to dense ids in order of first appearance.
    """
    pairs: list[tuple[str, str]] = []
    for lineno, line in enumerate(source, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) < 2:
            raise GraphFormatError(f"line {lineno}: expected two node tokens, got {line!r}")
        pairs.append((parts[0], parts[1]))
    if not pairs:
        raise GraphFormatError("edge list contains no edges")

    labels = None
    if relabel:
        ids: dict[str, int] = {}
        for a, b in pairs:
            ids.setdefault(a, len(ids))
            ids.setdefault(b, len(ids))
        edges = np.array([(ids[a], ids[b]) for a, b in pairs], dtype=np.int64)
        labels = list(ids)
        n = len(ids)
        if num_nodes is not None and num_nodes != n:
            raise GraphFormatError(f"declared {num_nodes} nodes but found {n} distinct ids")
    else:
        try:
            edges = np.array([(int(a), int(b)) for a, b in pairs], dtype=np.int64)
        except ValueError as exc:
            raise GraphFormatError(f"non-numeric node token ({exc}); use relabel") from None
        if edges.min() < 0:
            raise GraphFormatError("negative node id")
        n = int(edges.max()) + 1
        if num_nodes is not None:
            if num_nodes < n:
                raise GraphFormatError(f"declared {num_nodes} nodes but found id {n - 1}")
            n = num_nodes

    g = from_edges(n, edges, labels=labels)
    if g.num_edges == 0:
        raise GraphFormatError("graph has no edges after removing self-loops")
    return g


def read_edge_list(path, relabel: bool = False, num_nodes: int | None = None) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return load_edge_list(fh, relabel=relabel, num_nodes=num_nodes)


def write_edge_list(g: Graph, fh: TextIO) -> None:
    fh.write(f"# nodes {g.num_nodes} edges {g.num_edges}\n")
    for i, j in g.edges:
        fh.write(f"{i} {j}\n")


def write_relabel_map(g: Graph, fh: TextIO) -> None:
    if g.labels is None:
        raise ValueError("graph was not relabelled")
    for dense, original in enumerate(g.labels):
        fh.write(f"{original}\t{dense}\n")


def has_edge(g: Graph, i: int, j: int) -> bool:
    g._check(i)
    g._check(j)
    row = g.indices[g.indptr[i] : g.indptr[i + 1]]
    pos = np.searchsorted(row, j)
    return bool(pos < row.shape[0] and row[pos] == j)


def degree(g: Graph, v: int) -> int:
    g._check(v)
    return int(g.indptr[v + 1] - g.indptr[v])
