"""
Choosing embedding hyperparameters
==================================

Three tools for picking ``k`` and ``(t, s)``:

* :func:`scree_elbow` picks ``k`` from a sorted eigenvalue curve;
* :func:`correlation_screen` scores each ``(t, s)`` with a closed-form
  linear probe on the embedding alone;
* :func:`cross_validate` trains the actual classifier on seeded folds.

All ties go to the smallest ``k`` and then the lexicographically smallest
``(t, s)``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .datasets import Split
from .embedding import augment_features, compute_ile, standardize_columns
from .errors import InvalidConfig, TooFewValues
from .graph import Graph
from .nn.models import ModelConfig, build_model
from .nn.train import train

SCREE = "scree"
CORRELATION = "correlation"
CV = "cv"


@dataclass(frozen=True)
class SelectionResult:
    """Winning candidate plus every candidate's score.

    For the scree method candidates are ``k`` values; otherwise they are
    ``(t, s)`` pairs, or ``(k, t, s)`` triples when several ``k`` were given.
    """

    chosen: object
    scores: dict = field(default_factory=dict)
    method: str = ""

    def table(self) -> list[tuple]:
        return sorted(self.scores.items(), key=lambda kv: _key(kv[0]))


def _key(candidate):
    return candidate if isinstance(candidate, tuple) else (candidate,)


def _argmax(scores: dict):
    # max score; among equals the smallest candidate key
    best = max(scores.values())
    return min((c for c, v in scores.items() if v == best), key=_key)


def _chord_distances(values: np.ndarray) -> np.ndarray:
    k = len(values)
    x = np.arange(k) / (k - 1)
    span = values[-1] - values[0]
    y = (values - values[0]) / span if span != 0 else np.zeros(k)
    # signed: positive when the curve is above the chord
    return (y - x) / np.sqrt(2.0)


def scree_elbow(eigenvalues, k_max: int | None = None, return_result: bool = False):
    """Number of leading eigenvalues before the scree elbow.

    The first ``k_max`` ascending eigenvalues are placed on unit axes and
    the point farthest (perpendicularly) from the chord joining the first
    and last points is the knee. On a curve that bends upward (small values
    then a jump) the knee is the last value before the jump and is
    returned. On a curve that rises and then flattens the knee is the first
    value of the flat bulk, so the index before it is returned. Either way
    the answer is the count of values preceding the largest jump at the knee.

    Normalizing both axes makes the result invariant to affine rescaling of
    the values. Ties go to the smallest index; a straight line returns 1.
    """
    vals = np.sort(np.asarray(eigenvalues, dtype=np.float64).ravel())
    if k_max is not None:
        vals = vals[:k_max]
    if len(vals) < 3:
        raise TooFewValues(f"need at least 3 eigenvalues, got {len(vals)}")
    signed = _chord_distances(vals)
    dist = np.abs(signed)
    knee = int(np.argmax(dist))  # first maximum
    elbow = knee + 1
    if signed[knee] > 0:
        elbow = max(knee, 1)
    if return_result:
        return SelectionResult(elbow, {i + 1: float(d) for i, d in enumerate(dist)}, SCREE)
    return elbow


# -- correlation screen --------------------------------------------------------


def probe_accuracy(X, labels, idx=None) -> float:
    """Training accuracy of a one-vs-rest least-squares probe with intercept."""
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels)
    idx = np.arange(len(labels)) if idx is None else np.asarray(idx)
    classes, y = np.unique(labels[idx], return_inverse=True)
    Xd = np.hstack([np.ones((len(idx), 1)), X[idx]])
    Y = np.eye(len(classes))[y]
    W, *_ = np.linalg.lstsq(Xd, Y, rcond=None)
    pred = np.argmax(Xd @ W, axis=1)
    return float(np.mean(pred == y))


def _candidates(grid, k):
    ks = [k] if np.isscalar(k) else list(k)
    cells = [(float(t), float(s)) for t, s in grid]
    if not cells or not ks:
        raise InvalidConfig("selection needs a nonempty grid and at least one k")
    if len(ks) == 1:
        return [(ks[0], c, c) for c in cells]
    return [(kk, c, (kk, *c)) for kk in ks for c in cells]


def correlation_screen(
    g: Graph,
    labels,
    grid: Sequence[tuple[float, float]],
    k,
    seed: int = 0,
    train_idx=None,
    tol: float = 1e-8,
) -> SelectionResult:
    """Score every ``(t, s)`` by how linearly predictive its embedding is.

    Only the nodes in ``train_idx`` (all nodes by default) are used.
    """
    scores = {}
    for kk, (t, s), key in _candidates(grid, k):
        emb = compute_ile(g, t, s, kk, tol=tol, seed=seed)
        scores[key] = probe_accuracy(standardize_columns(emb.coords), labels, train_idx)
    return SelectionResult(_argmax(scores), scores, CORRELATION)


# -- cross-validation --------------------------------------------------------------


def kfold_splits(n: int, folds: int, seed: int = 0) -> list[Split]:
    if folds < 2 or folds > n:
        raise InvalidConfig(f"folds must be in [2, n={n}], got {folds}")
    perm = np.random.default_rng(seed).permutation(n)
    chunks = np.array_split(perm, folds)
    out = []
    for i, test in enumerate(chunks):
        train_idx = np.concatenate([c for j, c in enumerate(chunks) if j != i])
        out.append(Split(np.sort(train_idx), np.sort(test), seed))
    return out


Embedder = Callable[[Graph, float, float, int, int], np.ndarray]


def _default_embedder(g, t, s, k, seed):
    return compute_ile(g, t, s, k, seed=seed)


def cross_validate(
    g: Graph,
    features,
    labels,
    grid: Sequence[tuple[float, float]],
    k,
    folds: int = 5,
    cfg: ModelConfig | None = None,
    seed: int = 0,
    embedder: Embedder | None = None,
    threads: int = 1,
) -> SelectionResult:
    """Mean validation accuracy of the classifier for every ``(t, s)``.

    ``embedder(g, t, s, k, seed)`` returns an :class:`~interlap.embedding.Embedding`
    (or any object with a ``coords`` array); it defaults to
    :func:`compute_ile`. Fold assignment and model initialization are fixed
    by ``seed`` so all candidates see identical folds.
    """
    cfg = cfg or ModelConfig()
    labels = np.asarray(labels, dtype=np.int64)
    embedder = embedder or _default_embedder
    splits = kfold_splits(g.n, folds, seed)
    num_classes = int(labels.max()) + 1

    def evaluate(cand):
        kk, (t, s), key = cand
        X = augment_features(features, embedder(g, t, s, kk, seed))
        accs = []
        for sp in splits:
            model = build_model(cfg, X.shape[1], num_classes, g)
            accs.append(train(model, X, labels, sp, cfg).test_accuracy)
        return key, float(np.mean(accs))

    cands = _candidates(grid, k)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(evaluate, cands))
    else:
        results = [evaluate(c) for c in cands]
    scores = dict(results)
    return SelectionResult(_argmax(scores), scores, CV)
