"""Seeded stochastic block model graphs with planted labels."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyBlocks, InvalidProbability, OddN
from .graph import Graph, from_edge_list, relabel

CORE_PERIPHERY_P = ((0.9, 0.5), (0.5, 0.1))
COMMUNITY_P = ((0.99, 0.3), (0.3, 0.99))


@dataclass(frozen=True)
class SbmSpec:
    block_sizes: tuple[int, ...]
    probabilities: tuple[tuple[float, ...], ...]
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "block_sizes", tuple(int(b) for b in self.block_sizes))
        object.__setattr__(
            self, "probabilities", tuple(tuple(float(p) for p in row) for row in self.probabilities)
        )
        validate(self)

    @property
    def n(self) -> int:
        return sum(self.block_sizes)


@dataclass(frozen=True)
class LabeledGraph:
    graph: Graph
    labels: np.ndarray
    meta: str = ""
    permutation: np.ndarray | None = field(default=None, compare=False)


def validate(spec: SbmSpec) -> None:
    sizes = spec.block_sizes
    if not sizes or any(b <= 0 for b in sizes):
        raise EmptyBlocks(f"block sizes must be a nonempty list of positive counts, got {sizes}")
    P = np.asarray(spec.probabilities, dtype=np.float64)
    B = len(sizes)
    if P.shape != (B, B):
        raise InvalidProbability(f"probability matrix must be {B}x{B}, got shape {P.shape}")
    if not np.all((P >= 0) & (P <= 1)):
        raise InvalidProbability("edge probabilities must lie in [0, 1]")
    if not np.array_equal(P, P.T):
        raise InvalidProbability("probability matrix must be symmetric")


def generate(spec: SbmSpec, shuffle: bool = False) -> LabeledGraph:
    """Draw one graph; each pair ``u < v`` is an independent Bernoulli edge.

    Blocks occupy contiguous index ranges. With ``shuffle=True`` the nodes
    are then relabelled by a permutation drawn from the same seeded stream,
    so index order carries no label information; the permutation is kept
    on the result (``new_id = permutation[old_id]``).
    """
    validate(spec)
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    labels = np.repeat(np.arange(len(spec.block_sizes)), spec.block_sizes)
    P = np.asarray(spec.probabilities)
    iu, ju = np.triu_indices(n, k=1)
    draws = rng.random(len(iu))
    hit = draws < P[labels[iu], labels[ju]]
    g = from_edge_list(np.column_stack([iu[hit], ju[hit]]), n)
    meta = f"sbm blocks={list(spec.block_sizes)} p={[list(r) for r in spec.probabilities]} seed={spec.seed}"
    if not shuffle:
        return LabeledGraph(g, labels, meta)
    perm = rng.permutation(n)
    new_labels = np.empty_like(labels)
    new_labels[perm] = labels
    return LabeledGraph(relabel(g, perm), new_labels, meta + " shuffled", perm)


def _halves(n: int) -> tuple[int, int]:
    if n % 2:
        raise OddN(f"preset needs an even node count, got {n}")
    return n // 2, n // 2


def core_periphery_preset(n: int = 1000, seed: int = 0) -> SbmSpec:
    """Core block 0 (p=0.9 inside), periphery block 1 (p=0.1), 0.5 across."""
    return SbmSpec(_halves(n), CORE_PERIPHERY_P, seed)


def community_preset(n: int = 1000, seed: int = 0) -> SbmSpec:
    """Two communities, p=0.99 inside and 0.3 across."""
    return SbmSpec(_halves(n), COMMUNITY_P, seed)


PRESETS = {
    "community": community_preset,
    "core-periphery": core_periphery_preset,
}
