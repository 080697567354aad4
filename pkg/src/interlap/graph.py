"""
Sparse undirected weighted graphs
=================================

`Graph` stores a simple undirected graph in compressed sparse row (CSR)
form with both orientations of every edge stored. It is immutable after
construction and is the single source of the adjacency matrix A and the
degree vector D used everywhere else in the package.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from .errors import (
    DimensionMismatch,
    DuplicateEdge,
    EmptyGraph,
    IndexOutOfRange,
    NonPositiveWeight,
    ParseError,
    SelfLoop,
)


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable simple undirected graph in CSR layout.

    Parameters
    ----------
    n : int
        Number of vertices, indexed ``0..n-1``.
    row_offsets : (n+1,) int array
        Offsets into ``col_indices``/``weights`` for each row.
    col_indices : (nnz,) int array
        Neighbor index of every stored entry, ascending within a row.
    weights : (nnz,) float array
        Positive weight of every stored entry.

    Use :func:`from_edge_list` rather than calling the constructor directly;
    it validates and symmetrizes the input.
    """

    n: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    weights: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        for arr in (self.row_offsets, self.col_indices, self.weights):
            arr.setflags(write=False)

    @property
    def num_edges(self) -> int:
        """Number of undirected edges."""
        return len(self.col_indices) // 2

    @property
    def nnz(self) -> int:
        return len(self.col_indices)

    @cached_property
    def row_ids(self) -> np.ndarray:
        ids = np.repeat(np.arange(self.n), np.diff(self.row_offsets))
        ids.setflags(write=False)
        return ids

    @cached_property
    def csr(self) -> sparse.csr_matrix:
        """Read-only scipy view sharing this graph's arrays."""
        return sparse.csr_matrix(
            (self.weights, self.col_indices, self.row_offsets), shape=(self.n, self.n)
        )

    def neighbors(self, u: int) -> np.ndarray:
        return self.col_indices[self.row_offsets[u] : self.row_offsets[u + 1]]

    def edges(self) -> list[tuple[int, int, float]]:
        """Export each undirected edge once as ``(u, v, w)`` with ``u < v``."""
        keep = self.row_ids < self.col_indices
        return [
            (int(u), int(v), float(w))
            for u, v, w in zip(self.row_ids[keep], self.col_indices[keep], self.weights[keep])
        ]

    def to_dense(self) -> np.ndarray:
        """Dense adjacency matrix (testing and small-n oracles only)."""
        A = np.zeros((self.n, self.n))
        A[self.row_ids, self.col_indices] = self.weights
        return A

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.row_offsets, other.row_offsets)
            and np.array_equal(self.col_indices, other.col_indices)
            and np.array_equal(self.weights, other.weights)
        )

    __hash__ = None

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.num_edges})"


def _edge_arrays(edges) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if isinstance(edges, np.ndarray):
        arr = edges
    else:
        rows = [tuple(e) for e in edges]
        if not rows:
            return np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0)
        if len({len(r) for r in rows}) != 1 or len(rows[0]) not in (2, 3):
            rows = [r if len(r) == 3 else (r[0], r[1], 1.0) for r in rows]
        arr = np.asarray(rows, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] not in (2, 3):
        raise ValueError("edges must be (u, v) or (u, v, w) rows")
    uv = arr[:, :2]
    if not np.array_equal(uv, np.floor(uv)):
        raise IndexOutOfRange("vertex ids must be integers")
    w = arr[:, 2].astype(np.float64) if arr.shape[1] == 3 else np.ones(len(arr))
    return uv[:, 0].astype(np.int64), uv[:, 1].astype(np.int64), w


def from_edge_list(edges: Iterable[Sequence] | np.ndarray, n: int) -> Graph:
    """Build a :class:`Graph` from undirected ``(u, v[, w])`` rows.

    ``edges`` may be any iterable of tuples or an ``(m, 2|3)`` array. Every
    edge is stored in both directions. Self-loops, repeated undirected
    pairs, out-of-range endpoints and non-positive weights are rejected
    rather than silently repaired.
    """
    if n < 0:
        raise IndexOutOfRange(f"vertex count must be nonnegative, got {n}")
    u, v, w = _edge_arrays(edges)
    bad = (u < 0) | (u >= n) | (v < 0) | (v >= n)
    if bad.any():
        i = int(np.argmax(bad))
        raise IndexOutOfRange(f"edge ({u[i]}, {v[i]}) outside [0, {n})")
    if (u == v).any():
        i = int(np.argmax(u == v))
        raise SelfLoop(f"self-loop at vertex {u[i]}")
    bad = ~(w > 0) | ~np.isfinite(w)
    if bad.any():
        i = int(np.argmax(bad))
        raise NonPositiveWeight(f"edge ({u[i]}, {v[i]}) has weight {w[i]}")

    lo, hi = np.minimum(u, v), np.maximum(u, v)
    key = lo * max(n, 1) + hi
    uniq, counts = np.unique(key, return_counts=True)
    if np.any(counts > 1):
        dup = uniq[counts > 1][0]
        raise DuplicateEdge(f"duplicate edge ({dup // n}, {dup % n})")

    rows = np.concatenate([u, v])
    cols = np.concatenate([v, u])
    vals = np.concatenate([w, w])
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=offsets[1:])
    return Graph(n, offsets, cols, vals)


def edge_array(g: Graph) -> np.ndarray:
    """``(m, 3)`` array of undirected edges ``(u, v, w)`` with ``u < v``."""
    keep = g.row_ids < g.col_indices
    return np.column_stack([g.row_ids[keep], g.col_indices[keep], g.weights[keep]]).astype(np.float64)


def degree_vector(g: Graph) -> np.ndarray:
    """Weighted degrees, ``deg(u) = sum_v A[u, v]``."""
    if "degrees" not in g._cache:
        d = np.bincount(g.row_ids, weights=g.weights, minlength=g.n).astype(np.float64)
        d.setflags(write=False)
        g._cache["degrees"] = d
    return g._cache["degrees"]


def adjacency_apply(g: Graph, x) -> np.ndarray:
    """Compute ``A @ x`` for a vector or an ``(n, b)`` block."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != g.n:
        raise DimensionMismatch(f"expected leading dimension {g.n}, got {x.shape[0]}")
    return g.csr @ x


def _bfs(g: Graph, start: int, seen: np.ndarray) -> np.ndarray:
    """Mark and return every vertex reachable from ``start`` (frontier BFS)."""
    seen[start] = True
    frontier = np.array([start])
    reached = [frontier]
    offs, cols = g.row_offsets, g.col_indices
    while frontier.size:
        nbrs = np.concatenate([cols[offs[u] : offs[u + 1]] for u in frontier])
        nbrs = np.unique(nbrs)
        frontier = nbrs[~seen[nbrs]]
        seen[frontier] = True
        reached.append(frontier)
    return np.concatenate(reached)


def connected_components(g: Graph) -> np.ndarray:
    """Component id per vertex; ids are ordered by smallest contained vertex."""
    comp = np.full(g.n, -1, dtype=np.int64)
    seen = np.zeros(g.n, dtype=bool)
    c = 0
    for start in range(g.n):
        if seen[start]:
            continue
        comp[_bfs(g, start, seen)] = c
        c += 1
    return comp


def is_connected(g: Graph) -> bool:
    """True iff breadth-first search from vertex 0 reaches every vertex."""
    if g.n == 0:
        return True
    seen = np.zeros(g.n, dtype=bool)
    return len(_bfs(g, 0, seen)) == g.n


def induced_subgraph(g: Graph, nodes) -> Graph:
    """Subgraph on ``nodes`` (kept in the given order, relabelled 0..m-1)."""
    nodes = np.asarray(nodes, dtype=np.int64)
    new_id = np.full(g.n, -1, dtype=np.int64)
    new_id[nodes] = np.arange(len(nodes))
    keep = (new_id[g.row_ids] >= 0) & (new_id[g.col_indices] >= 0)
    keep &= g.row_ids < g.col_indices
    edges = np.column_stack(
        [new_id[g.row_ids[keep]], new_id[g.col_indices[keep]], g.weights[keep]]
    ).astype(np.float64)
    return from_edge_list(edges, len(nodes))


def largest_connected_component(g: Graph) -> tuple[Graph, np.ndarray]:
    """Largest component and the map from its vertex ids to original ids.

    Ties between equal-size components go to the one holding the smallest
    original vertex index.
    """
    if g.n == 0:
        raise EmptyGraph("graph has no vertices")
    comp = connected_components(g)
    sizes = np.bincount(comp)
    best = int(np.argmax(sizes))
    if sizes[best] == g.n:
        return g, np.arange(g.n)
    index_map = np.flatnonzero(comp == best)
    return induced_subgraph(g, index_map), index_map


def relabel(g: Graph, perm) -> Graph:
    """Graph with vertex ``u`` renamed to ``perm[u]``."""
    perm = np.asarray(perm, dtype=np.int64)
    if sorted(perm.tolist()) != list(range(g.n)):
        raise DimensionMismatch("perm is not a permutation of range(n)")
    e = edge_array(g)
    e[:, 0] = perm[e[:, 0].astype(np.int64)]
    e[:, 1] = perm[e[:, 1].astype(np.int64)]
    return from_edge_list(e, g.n)


# -- edge-list text format -------------------------------------------------

_HEADER = re.compile(r"#\s*n\s*=\s*(\d+)\s*$")


def parse_edge_rows(lines: Iterable[str], path=None) -> tuple[np.ndarray, int | None]:
    """Parse ``u v [w]`` lines into an ``(m, 3)`` array.

    Returns the rows and the vertex count from a ``# n=<count>`` header, if
    any. Other ``#`` lines are comments.
    """
    edges = []
    header_n = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _HEADER.match(line)
            if m and header_n is None:
                header_n = int(m.group(1))
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ParseError(f"expected 'u v [w]', got {line!r}", lineno, path)
        try:
            u, v = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError:
            raise ParseError(f"malformed edge {line!r}", lineno, path) from None
        if u < 0 or v < 0:
            raise ParseError(f"negative vertex id in {line!r}", lineno, path)
        edges.append((u, v, w))
    return np.asarray(edges, dtype=np.float64).reshape(-1, 3), header_n


def infer_n(rows: np.ndarray, header_n: int | None) -> int:
    n = int(rows[:, :2].max()) + 1 if len(rows) else 0
    return max(n, header_n) if header_n is not None else n


def parse_edge_list(lines: Iterable[str], n: int | None = None, path=None) -> Graph:
    """Parse edge-list text into a :class:`Graph`.

    ``n`` defaults to a ``# n=<count>`` header when present, otherwise to one
    more than the largest vertex id seen.
    """
    rows, header_n = parse_edge_rows(lines, path)
    return from_edge_list(rows, infer_n(rows, header_n) if n is None else n)


def read_edge_list(path, n: int | None = None) -> Graph:
    with open(path) as fh:
        return parse_edge_list(fh, n=n, path=path)


def format_edge_list(g: Graph, weights: bool | None = None) -> str:
    """Edge-list text; weights are written unless every weight is 1."""
    if weights is None:
        weights = not np.all(g.weights == 1.0)
    out = []
    for u, v, w in g.edges():
        out.append(f"{u} {v} {w!r}" if weights else f"{u} {v}")
    return "".join(line + "\n" for line in out)


def write_edge_list(g: Graph, path, weights: bool | None = None) -> None:
    with open(path, "w") as fh:
        fh.write(f"# n={g.n}\n")
        fh.write(format_edge_list(g, weights))
