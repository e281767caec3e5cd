"""Differentially private skip-gram graph embeddings with tunable node proximity."""

__version__ = "0.1.0"

from .accountant import AccountantState, compose, delta_spent, to_dp
from .evaluation import auc, split_links, struc_equ
from .graph import Graph, load_edge_list, read_edge_list
from .proximity import ProximityMatrix, compute_proximity
from .sampler import SubgraphSample, SubgraphSet, generate_subgraphs
from .trainer import EmbeddingModel, NoiseMode, TrainConfig, train

__all__ = [
    "AccountantState",
    "EmbeddingModel",
    "Graph",
    "NoiseMode",
    "ProximityMatrix",
    "SubgraphSample",
    "SubgraphSet",
    "TrainConfig",
    "auc",
    "compose",
    "compute_proximity",
    "delta_spent",
    "generate_subgraphs",
    "load_edge_list",
    "read_edge_list",
    "split_links",
    "struc_equ",
    "to_dp",
    "train",
]
