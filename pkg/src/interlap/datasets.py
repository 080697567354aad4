"""
Dataset loading and preparation
===============================

File formats (all indices 0-based):

* edge list: ``u v [w]`` per line, ``#`` comments (see :mod:`interlap.graph`)
* features: CSV without header, one row of ``d`` reals per node
* labels: CSV ``node,label`` (a header line is optional)
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidFraction,
    InvalidRatio,
    MissingLabels,
    ParseError,
    TooSmall,
)
from .graph import (
    Graph,
    degree_vector,
    from_edge_list,
    infer_n,
    largest_connected_component,
    parse_edge_rows,
    write_edge_list,
)

logger = logging.getLogger(__name__)

# guards floor/ceil against products like 0.29 * 100 = 28.999999999999996
_EPS = 1e-9


@dataclass(frozen=True)
class Dataset:
    graph: Graph
    labels: np.ndarray
    features: np.ndarray | None = None
    name: str = ""
    index_map: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        n = self.graph.n
        if len(self.labels) != n:
            raise DimensionMismatch(f"{len(self.labels)} labels for {n} nodes")
        if self.features is not None and self.features.shape[0] != n:
            raise DimensionMismatch(f"{self.features.shape[0]} feature rows for {n} nodes")

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def num_classes(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0


@dataclass(frozen=True)
class Split:
    train_idx: np.ndarray
    test_idx: np.ndarray
    seed: int


def contiguous_labels(raw) -> np.ndarray:
    """Map arbitrary label values onto ``0..C-1`` preserving sorted order."""
    _, inv = np.unique(np.asarray(raw), return_inverse=True)
    return inv.astype(np.int64)


# -- parsing ---------------------------------------------------------------


def _read_edges(path, lenient: bool) -> tuple[np.ndarray, int]:
    with open(path) as fh:
        rows, header_n = parse_edge_rows(fh, path)
    n = infer_n(rows, header_n)
    if lenient and len(rows):
        rows = _clean_edges(rows)
    return rows, n


def _clean_edges(arr: np.ndarray) -> np.ndarray:
    """Drop self-loops and repeated undirected pairs (first occurrence wins)."""
    u, v = arr[:, 0].astype(np.int64), arr[:, 1].astype(np.int64)
    loops = u == v
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    key = lo * (int(hi.max()) + 1) + hi
    _, first = np.unique(key, return_index=True)
    keep = np.zeros(len(arr), dtype=bool)
    keep[first] = True
    keep &= ~loops
    dropped = len(arr) - int(keep.sum())
    if dropped:
        logger.warning("dropped %d self-loop/duplicate edge rows (%d self-loops)", dropped, int(loops.sum()))
    return arr[np.sort(np.flatnonzero(keep))]


def read_labels(path) -> dict[int, int | str]:
    out: dict[int, int | str] = {}
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].startswith("#"):
                continue
            if len(row) != 2:
                raise ParseError(f"expected 'node,label', got {row!r}", lineno, path)
            try:
                node = int(row[0])
            except ValueError:
                if lineno == 1:
                    continue  # header
                raise ParseError(f"bad node id {row[0]!r}", lineno, path) from None
            label = row[1].strip()
            out[node] = int(label) if label.lstrip("-").isdigit() else label
    return out


def read_features(path) -> np.ndarray:
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            try:
                rows.append([float(x) for x in row])
            except ValueError:
                raise ParseError("non-numeric feature row", lineno, path) from None
    if len({len(r) for r in rows}) > 1:
        raise DimensionMismatch(f"{path}: feature rows have differing lengths")
    return np.asarray(rows, dtype=np.float64).reshape(len(rows), -1)


def load_dataset(
    edge_path,
    feature_path=None,
    label_path=None,
    *,
    name: str | None = None,
    degree_label_fraction: float | None = None,
    lenient: bool = False,
) -> Dataset:
    """Load and validate a dataset, restricted to its largest component.

    Parameters
    ----------
    edge_path, feature_path, label_path : path-like
        Files in the formats described in the module docstring.
    degree_label_fraction : float, optional
        When there is no label file, synthesize labels with
        :func:`degree_labels` using this top fraction.
    lenient : bool
        Drop self-loops and duplicate/reciprocal edge rows instead of
        rejecting them. Raw hyperlink graphs (e.g. WebKB) need this.

    The vertex count is the largest id seen in any of the three files plus
    one. If the graph is disconnected, everything is re-indexed onto the
    largest connected component and ``index_map`` records original ids.
    """
    edges, n = _read_edges(edge_path, lenient)
    features = read_features(feature_path) if feature_path is not None else None
    label_map = read_labels(label_path) if label_path is not None else None
    if features is not None:
        n = max(n, features.shape[0])
        if features.shape[0] != n:
            raise DimensionMismatch(f"{features.shape[0]} feature rows but {n} nodes in the edge list")
    if label_map is not None and label_map:
        n = max(n, max(label_map) + 1)
    g = from_edge_list(edges, n)

    if label_map is not None:
        missing = [u for u in range(n) if u not in label_map]
        if missing:
            raise MissingLabels(f"{len(missing)} nodes lack labels (first: {missing[0]})")
        raw = [label_map[u] for u in range(n)]
    elif degree_label_fraction is None:
        raise MissingLabels("no label file given and no degree_label_fraction to synthesize labels")
    else:
        raw = None

    sub, index_map = largest_connected_component(g)
    if sub.n != n:
        logger.info("restricting to largest component: kept %d of %d nodes", sub.n, n)
    if raw is not None:
        if any(isinstance(x, str) for x in raw):
            raw = [str(x) for x in raw]
        labels = contiguous_labels(np.asarray(raw)[index_map])
    else:
        labels = degree_labels(sub, degree_label_fraction)
    if features is not None:
        features = features[index_map]
    return Dataset(
        graph=sub,
        labels=labels,
        features=features,
        name=name or Path(edge_path).stem,
        index_map=index_map,
    )


def export_dataset(ds: Dataset, edge_path, label_path=None, feature_path=None) -> None:
    """Write a dataset back out in the loader's formats (bit-exact floats)."""
    write_edge_list(ds.graph, edge_path)
    if label_path is not None:
        write_labels(ds.labels, label_path)
    if feature_path is not None and ds.features is not None:
        np.savetxt(feature_path, ds.features, delimiter=",", fmt="%.17g")


def write_labels(labels, path) -> None:
    with open(path, "w") as fh:
        fh.write("node,label\n")
        for u, y in enumerate(labels):
            fh.write(f"{u},{int(y)}\n")


# -- label synthesis, corruption, splits ---------------------------------------


def degree_labels(g: Graph, top_fraction: float = 0.2) -> np.ndarray:
    """Label 1 for the ``ceil(top_fraction * n)`` highest-degree nodes.

    Equal degrees are ordered by node index, lower index first.
    """
    if not 0 < top_fraction < 1:
        raise InvalidFraction(f"top_fraction must be in (0, 1), got {top_fraction}")
    n = g.n
    m = math.ceil(top_fraction * n - _EPS)
    order = np.lexsort((np.arange(n), -degree_vector(g)))
    labels = np.zeros(n, dtype=np.int64)
    labels[order[:m]] = 1
    return labels


def corrupt_features(X, ratio: float, sigma: float = 1.0, seed: int = 0) -> np.ndarray:
    """Add ``N(0, sigma^2)`` noise to every entry of ``floor(ratio * n)`` random rows.

    The remaining rows are returned bit-identical.
    """
    if not 0 <= ratio <= 1:
        raise InvalidRatio(f"ratio must be in [0, 1], got {ratio}")
    if sigma < 0:
        raise InvalidRatio(f"sigma must be nonnegative, got {sigma}")
    X = np.array(X, dtype=np.float64)
    n, d = X.shape
    m = math.floor(ratio * n + _EPS)
    rng = np.random.default_rng(seed)
    rows = rng.choice(n, size=m, replace=False)
    if m and sigma > 0:
        X[rows] += rng.normal(0.0, sigma, size=(m, d))
    return X


def split_70_30(n: int, seed: int = 0, train_fraction: float = 0.7) -> Split:
    """Uniform random split; the first ``floor(0.7 n)`` of a permutation train."""
    if n < 2:
        raise TooSmall(f"need at least 2 nodes to split, got {n}")
    perm = np.random.default_rng(seed).permutation(n)
    cut = math.floor(train_fraction * n + _EPS)
    return Split(np.sort(perm[:cut]), np.sort(perm[cut:]), seed)
