"""Spectral node embeddings from the interpolated Laplacian family ``tD - sA``."""

from .embedding import Embedding, augment_features, compute_adjacency_embedding, compute_ile
from .eigen import EigenPairs, largest_k, smallest_k
from .graph import Graph, from_edge_list, read_edge_list
from .operators import InterpolatedOperator, build
from .sbm import SbmSpec, community_preset, core_periphery_preset, generate

__version__ = "0.1.0"

__all__ = [
    "EigenPairs",
    "Embedding",
    "Graph",
    "InterpolatedOperator",
    "SbmSpec",
    "augment_features",
    "build",
    "community_preset",
    "compute_adjacency_embedding",
    "compute_ile",
    "core_periphery_preset",
    "from_edge_list",
    "generate",
    "largest_k",
    "read_edge_list",
    "smallest_k",
]
