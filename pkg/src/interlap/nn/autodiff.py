"""
Reverse-mode automatic differentiation over dense 2-D arrays.

Each primitive returns a new :class:`Tensor` remembering its parents and a
closure that pushes ``out.grad`` back into them. :func:`backward` walks the
recorded graph in reverse topological order. Sparse operands (graph
propagation matrices) are treated as constants.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy import sparse

from ..errors import NonFiniteValue, ShapeMismatch
from ..graph import Graph

_ids = itertools.count()


class Tensor:
    __slots__ = ("value", "grad", "parents", "_backward", "requires_grad", "tape_id", "name")

    def __init__(self, value, parents=(), backward=None, requires_grad=False, name=None):
        value = np.asarray(value, dtype=np.float64)
        if value.ndim == 1:
            value = value[None, :]
        if value.ndim != 2:
            raise ShapeMismatch(f"tensors are 2-D, got shape {value.shape}")
        if not np.all(np.isfinite(value)):
            raise NonFiniteValue(f"non-finite value produced{f' by {name}' if name else ''}")
        self.value = value
        self.grad = None
        self.parents = parents
        self._backward = backward
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)
        self.tape_id = next(_ids)
        self.name = name

    @property
    def shape(self):
        return self.value.shape

    def zero_grad(self):
        self.grad = None

    def _accumulate(self, g):
        if self.requires_grad:
            self.grad = g if self.grad is None else self.grad + g

    def __repr__(self):
        return f"Tensor(shape={self.shape}, name={self.name!r})"


def parameter(value, name=None) -> Tensor:
    return Tensor(value, requires_grad=True, name=name)


def constant(value) -> Tensor:
    return Tensor(value)


def backward(loss: Tensor) -> None:
    """Accumulate ``d loss / d leaf`` into ``.grad`` of every leaf parameter."""
    if loss.shape != (1, 1):
        raise ShapeMismatch(f"backward needs a scalar (1x1) loss, got {loss.shape}")
    order, seen = [], set()
    stack = [(loss, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        if node.tape_id in seen:
            continue
        seen.add(node.tape_id)
        stack.append((node, True))
        stack.extend((p, False) for p in node.parents if p.tape_id not in seen)
    for node in order:
        if node.parents:
            node.grad = None
    loss.grad = np.ones((1, 1))
    for node in reversed(order):
        if node._backward is not None and node.grad is not None:
            node._backward(node.grad)


# -- primitives --------------------------------------------------------------


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatch(f"matmul {a.shape} @ {b.shape}")

    def back(g):
        a._accumulate(g @ b.value.T)
        b._accumulate(a.value.T @ g)

    return Tensor(a.value @ b.value, (a, b), back, name="matmul")


def sparse_matmul(S, x: Tensor) -> Tensor:
    """``S @ x`` for a constant scipy sparse matrix ``S``."""
    if not sparse.issparse(S):
        raise ShapeMismatch("sparse_matmul expects a scipy sparse matrix")
    if S.shape[1] != x.shape[0]:
        raise ShapeMismatch(f"sparse_matmul {S.shape} @ {x.shape}")
    def back(g):
        x._accumulate(S.T @ g)

    return Tensor(S @ x.value, (x,), back, name="sparse_matmul")


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ShapeMismatch(f"add {a.shape} + {b.shape}")

    def back(g):
        a._accumulate(g)
        b._accumulate(g)

    return Tensor(a.value + b.value, (a, b), back, name="add")


def bias_add(x: Tensor, b: Tensor) -> Tensor:
    """Add a ``1 x d`` row ``b`` to every row of ``x``."""
    if b.shape != (1, x.shape[1]):
        raise ShapeMismatch(f"bias {b.shape} for input {x.shape}")

    def back(g):
        x._accumulate(g)
        b._accumulate(g.sum(axis=0, keepdims=True))

    return Tensor(x.value + b.value, (x, b), back, name="bias_add")


def relu(x: Tensor) -> Tensor:
    # subgradient 0 at 0
    mask = x.value > 0

    def back(g):
        x._accumulate(g * mask)

    return Tensor(x.value * mask, (x,), back, name="relu")


def mean_operator(A) -> sparse.csr_matrix:
    """Row-normalized copy of ``A``; rows of isolated nodes stay zero."""
    A = sparse.csr_matrix(A)
    deg = np.asarray(A.sum(axis=1)).ravel()
    inv = np.divide(1.0, deg, out=np.zeros_like(deg), where=deg > 0)
    return (sparse.diags(inv) @ A).tocsr()


def mean_rows_by_neighbors(x: Tensor, graph) -> Tensor:
    """Row ``u`` becomes the weighted mean of ``x`` over the neighbours of ``u``.

    ``graph`` is a :class:`~interlap.graph.Graph` (the operator is cached on
    it) or a sparse adjacency matrix.
    """
    if isinstance(graph, Graph):
        P = graph._cache.get("mean_operator")
        if P is None:
            P = graph._cache["mean_operator"] = mean_operator(graph.csr)
    else:
        P = mean_operator(graph)
    return sparse_matmul(P, x)


def concat_cols(a: Tensor, b: Tensor) -> Tensor:
    if a.shape[0] != b.shape[0]:
        raise ShapeMismatch(f"concat_cols {a.shape} | {b.shape}")
    d = a.shape[1]

    def back(g):
        a._accumulate(g[:, :d])
        b._accumulate(g[:, d:])

    return Tensor(np.hstack([a.value, b.value]), (a, b), back, name="concat_cols")


def scale(x: Tensor, c: float) -> Tensor:
    def back(g):
        x._accumulate(c * g)

    return Tensor(c * x.value, (x,), back, name="scale")


def softmax_cross_entropy(logits: Tensor, labels, mask=None) -> Tensor:
    """Mean cross-entropy over the rows selected by ``mask`` (all rows if None).

    ``mask`` may be a boolean vector or an index array.
    """
    labels = np.asarray(labels, dtype=np.int64)
    n, C = logits.shape
    if labels.shape != (n,):
        raise ShapeMismatch(f"{labels.shape[0]} labels for {n} rows")
    if mask is None:
        idx = np.arange(n)
    else:
        mask = np.asarray(mask)
        idx = np.flatnonzero(mask) if mask.dtype == bool else mask.astype(np.int64)
    if idx.size == 0:
        raise ShapeMismatch("cross-entropy over an empty mask")
    z = logits.value[idx]
    z = z - z.max(axis=1, keepdims=True)
    logsum = np.log(np.exp(z).sum(axis=1))
    y = labels[idx]
    loss = float(np.mean(logsum - z[np.arange(len(idx)), y]))
    probs = np.exp(z - logsum[:, None])

    def back(g):
        d = probs.copy()
        d[np.arange(len(idx)), y] -= 1.0
        full = np.zeros_like(logits.value)
        full[idx] = d * (g[0, 0] / len(idx))
        logits._accumulate(full)

    return Tensor([[loss]], (logits,), back, name="softmax_cross_entropy")
