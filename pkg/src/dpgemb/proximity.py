"""Node proximity matrices and the negative-sampling weights derived from them."""

from __future__ import annotations

import enum
import logging
import struct
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sps

from .graph import Graph

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = 10
_CACHE_MAGIC = b"DPGPROX1"


class ProximityKind(str, enum.Enum):
    DEGREE = "degree"
    DEEPWALK = "deepwalk"


@dataclass(frozen=True, eq=False)
class ProximityMatrix:
    """Dense nonnegative ``|V| x |V|`` proximity with a zero diagonal.

    ``row_sums`` and ``min_positive`` are always derived from ``values`` as
    stored, so they stay consistent with whatever the constructor produced.
    """

    values: np.ndarray
    kind: ProximityKind
    window: int = 0
    row_sums: np.ndarray = field(init=False, repr=False)
    min_positive: float = field(init=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"proximity must be square, got shape {v.shape}")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("proximity entries must be finite and nonnegative")
        if np.any(np.diag(v) != 0):
            raise ValueError("proximity diagonal must be zero")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "kind", ProximityKind(self.kind))
        object.__setattr__(self, "row_sums", v.sum(axis=1))
        pos = v[v > 0]
        object.__setattr__(self, "min_positive", float(pos.min()) if pos.size else float("nan"))

    @property
    def num_nodes(self) -> int:
        return self.values.shape[0]

    def scaled(self, c: float) -> "ProximityMatrix":
        return ProximityMatrix(self.values * c, self.kind, self.window)


def degree_proximity(g: Graph) -> ProximityMatrix:
    """Preferential-attachment proximity ``p_ij = d_i * d_j`` off the diagonal."""
    if g.num_edges == 0:
        raise ValueError("degree proximity is undefined for a graph without edges")
    d = g.degrees.astype(np.float64)
    p = np.outer(d, d)
    np.fill_diagonal(p, 0.0)
    return ProximityMatrix(p, ProximityKind.DEGREE)


def transition_matrix(g: Graph) -> sps.csr_matrix:
    """Row-stochastic ``D^-1 A``; rows of isolated nodes stay zero."""
    a = g.to_sparse()
    d = g.degrees.astype(np.float64)
    inv = np.divide(1.0, d, out=np.zeros_like(d), where=d > 0)
    return sps.diags(inv) @ a


def deepwalk_proximity(g: Graph, window: int = DEFAULT_WINDOW) -> ProximityMatrix:
    """Mean of the first ``window`` random-walk transition powers.

    ``M = (1/T) sum_{t=1..T} (D^-1 A)^t`` is accumulated by repeated sparse
    products against a dense block; the diagonal is zeroed afterwards.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    trans = transition_matrix(g)
    cur = np.eye(g.num_nodes)
    acc = np.zeros((g.num_nodes, g.num_nodes))
    for _ in range(window):
        cur = trans @ cur
        acc += cur
    acc /= window
    np.fill_diagonal(acc, 0.0)
    return ProximityMatrix(acc, ProximityKind.DEEPWALK, window)


def compute_proximity(g: Graph, kind: str | ProximityKind, window: int = DEFAULT_WINDOW):
    kind = ProximityKind(kind)
    if kind is ProximityKind.DEGREE:
        return degree_proximity(g)
    return deepwalk_proximity(g, window)


def negative_weight(P: ProximityMatrix, i: int) -> float:
    """Scale factor turning a uniform negative draw into the designed expectation.

    ``sum_n [min(P) / rowsum_i] f(n)`` equals ``w_i * mean_n f(n)`` for ``n``
    uniform over ``V`` with ``w_i = |V| min(P) / rowsum_i``.
    """
    s = P.row_sums[i]
    if not s > 0:
        raise ValueError(f"node {i} has zero proximity row sum")
    return P.num_nodes * P.min_positive / float(s)


def negative_weights(
    P: ProximityMatrix,
    centers: np.ndarray | None = None,
    positives: np.ndarray | None = None,
    pool_size: int | None = None,
) -> np.ndarray:
    """Vector of per-center weights.

    With ``centers``/``positives`` given, the normalising mass of each center
    is the proximity it carries as a positive in training, i.e. the sum of
    ``p_ij`` over the supplied pairs, instead of the full row sum. Rows with
    no mass get weight 0. ``pool_size`` is the size of the uniform negative
    pool (defaults to ``|V|``).
    """
    n = P.num_nodes
    pool = n if pool_size is None else pool_size
    if centers is None:
        mass = P.row_sums
    else:
        centers = np.asarray(centers)
        mass = np.bincount(
            centers, weights=P.values[centers, np.asarray(positives)], minlength=n
        )
    return np.divide(pool * P.min_positive, mass, out=np.zeros(n), where=mass > 0)


def sampler_mass_violations(P: ProximityMatrix) -> np.ndarray:
    """Centers whose designed negative probability ``min(P)/rowsum`` is outside (0, 1).

    Rows with zero mass are reported too. Nothing is clamped.
    """
    s = P.row_sums
    prob = np.divide(P.min_positive, s, out=np.full_like(s, np.inf), where=s > 0)
    bad = np.flatnonzero(~((prob > 0) & (prob < 1)))
    if bad.size:
        logger.warning("%d center(s) violate the (0, 1) sampling-mass constraint", bad.size)
    return bad


def save_proximity(P: ProximityMatrix, path) -> None:
    kind_code = 0 if P.kind is ProximityKind.DEGREE else 1
    with open(path, "wb") as fh:
        fh.write(_CACHE_MAGIC)
        fh.write(struct.pack("<qii", P.num_nodes, kind_code, P.window))
        fh.write(np.ascontiguousarray(P.values, dtype="<f8").tobytes())


def load_proximity(path) -> ProximityMatrix:
    with open(path, "rb") as fh:
        magic = fh.read(len(_CACHE_MAGIC))
        if magic != _CACHE_MAGIC:
            raise ValueError(f"{path}: not a proximity cache")
        n, kind_code, window = struct.unpack("<qii", fh.read(16))
        values = np.frombuffer(fh.read(), dtype="<f8")
    if values.size != n * n:
        raise ValueError(f"{path}: truncated proximity cache")
    kind = ProximityKind.DEGREE if kind_code == 0 else ProximityKind.DEEPWALK
    return ProximityMatrix(values.reshape(n, n).copy(), kind, window)
