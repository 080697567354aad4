"""Spectral node embeddings from the interpolated Laplacian family."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .eigen import EigenPairs, largest_k, smallest_k
from .errors import DimensionMismatch, InvalidK, NotConnected
from .graph import Graph, degree_vector, is_connected
from .operators import InterpolatedOperator, build

SMALLEST = "smallest"
LARGEST = "largest"


@dataclass(frozen=True)
class Embedding:
    """``n x k`` node coordinates plus how they were produced.

    ``coords[u]`` is the embedding of node ``u``. ``t``/``s`` are ``None`` for
    adjacency (largest-end) embeddings. ``skipped`` lists indices, within the
    solved eigenpairs, that were dropped as the trivial zero mode.
    """

    coords: np.ndarray
    t: float | None
    s: float | None
    k: int
    convention: str
    skipped: tuple[int, ...]
    eigenvalues: np.ndarray
    shift: float = 0.0
    tol: float | None = None
    seed: int | None = None
    degenerate: bool = False
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    def provenance(self) -> dict:
        return {
            "t": self.t,
            "s": self.s,
            "k": self.k,
            "convention": self.convention,
            "skipped": list(self.skipped),
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "shift": self.shift,
            "tol": self.tol,
            "seed": self.seed,
            "degenerate": self.degenerate,
        }


def _check(g: Graph, k: int):
    if not is_connected(g):
        raise NotConnected("embedding requires a connected graph; use largest_connected_component")
    if not 1 <= k < g.n:
        raise InvalidK(f"k={k} must satisfy 1 <= k < n={g.n}")


def zero_mode_threshold(g: Graph, t: float) -> float:
    d = degree_vector(g)
    return 1e-8 * max(1.0, abs(t)) * float(d.max(initial=0.0))


def embed_operator(op: InterpolatedOperator, k: int, tol: float = 1e-8, seed: int = 0) -> Embedding:
    """Smallest-end embedding of an arbitrary (possibly shifted) family member.

    When ``t == s`` the operator is a scaled Laplacian plus ``shift * I`` and
    the constant vector is an exact eigenvector with eigenvalue ``shift``.
    In that case ``k + 1`` pairs are solved and the one whose eigenvalue is
    (numerically) ``shift`` is dropped. Otherwise the ``k`` smallest are kept.
    """
    g = op.graph
    _check(g, k)
    skip_zero = op.t == op.s
    pairs = smallest_k(op, k + 1 if skip_zero else k, tol=tol, seed=seed)
    keep = np.arange(pairs.k)
    skipped: tuple[int, ...] = ()
    if skip_zero:
        thr = zero_mode_threshold(g, op.t)
        near_zero = np.flatnonzero(np.abs(pairs.eigenvalues - op.shift) < thr)
        if near_zero.size:
            skipped = (int(near_zero[0]),)
            keep = keep[keep != near_zero[0]]
        else:
            keep = keep[:k]
    return Embedding(
        coords=pairs.eigenvectors[:, keep],
        t=op.t,
        s=op.s,
        k=k,
        convention=SMALLEST,
        skipped=skipped,
        eigenvalues=pairs.eigenvalues[keep],
        shift=op.shift,
        tol=tol,
        seed=seed,
        degenerate=_degenerate(pairs, keep),
    )


def _degenerate(pairs: EigenPairs, keep) -> bool:
    vals = pairs.eigenvalues
    # a kept eigenvalue tied with any solved neighbour has an arbitrary basis
    gaps = np.diff(vals)
    close = np.zeros(len(vals), dtype=bool)
    close[:-1] |= gaps < 1e-6
    close[1:] |= gaps < 1e-6
    return bool(np.any(close[keep]))


def compute_ile(
    g: Graph, t: float, s: float, k: int, tol: float = 1e-8, seed: int = 0, shift: float = 0.0
) -> Embedding:
    """Interpolated Laplacian embedding from ``M(t, s) = tD - sA``.

    ``shift`` adds ``shift * I`` to the operator; it never changes the
    coordinates and exists so that invariance can be checked directly.
    """
    op = build(g, t, s)
    if shift:
        op = op.shifted(shift)
    return embed_operator(op, k, tol=tol, seed=seed)


def compute_adjacency_embedding(g: Graph, k: int, tol: float = 1e-8, seed: int = 0) -> Embedding:
    """Top-``k`` adjacency eigenvectors, columns by descending eigenvalue."""
    _check(g, k)
    pairs = largest_k(build(g, 0.0, -1.0), k, tol=tol, seed=seed).descending()
    return Embedding(
        coords=pairs.eigenvectors,
        t=None,
        s=None,
        k=k,
        convention=LARGEST,
        skipped=(),
        eigenvalues=pairs.eigenvalues,
        tol=tol,
        seed=seed,
        degenerate=pairs.degenerate,
    )


def standardize_columns(X) -> np.ndarray:
    """Zero mean, unit population variance per column.

    A constant column (zero variance) is only centred, i.e. becomes zeros.
    """
    X = np.asarray(X, dtype=np.float64)
    Z = X - X.mean(axis=0)
    std = Z.std(axis=0)
    scale = np.where(std > 1e-12, std, 1.0)
    return Z / scale


def augment_features(base, emb: Embedding | None) -> np.ndarray:
    """``[base | standardized embedding]``; either side may be absent."""
    if emb is None:
        if base is None:
            raise DimensionMismatch("need base features or an embedding")
        return np.asarray(base, dtype=np.float64)
    coords = standardize_columns(emb.coords)
    if base is None:
        return coords
    base = np.asarray(base, dtype=np.float64)
    if base.ndim != 2 or base.shape[0] != coords.shape[0]:
        raise DimensionMismatch(f"base has shape {base.shape}, embedding has {coords.shape[0]} rows")
    return np.hstack([base, coords])


def write_embedding(emb: Embedding, path, meta_path=None) -> None:
    """CSV ``node,ev_1..ev_k`` plus a JSON provenance sidecar."""
    header = "node," + ",".join(f"ev_{j + 1}" for j in range(emb.coords.shape[1]))
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for u, row in enumerate(emb.coords):
            fh.write(f"{u}," + ",".join(repr(float(x)) for x in row) + "\n")
    if meta_path is None:
        meta_path = str(path) + ".json"
    with open(meta_path, "w") as fh:
        json.dump(emb.provenance(), fh, indent=2)


def read_embedding_csv(path) -> np.ndarray:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 1:]
