"""Matrix-free interpolated Laplacians ``M(t, s) = t D - s A``.

The family contains the Laplacian ``(1, 1)``, the adjacency matrix
``(0, -1)`` and the signless Laplacian ``(1, -1)``. An optional scalar
``shift`` turns ``M`` into ``M + shift * I``; it exists so that the deformed
Laplacian and shift-invariance checks can be expressed without a second
operator type.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyGraph, ZeroVector
from .graph import Graph, adjacency_apply, degree_vector


@dataclass(frozen=True)
class InterpolatedOperator:
    graph: Graph
    t: float
    s: float
    shift: float = 0.0

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def degrees(self) -> np.ndarray:
        return degree_vector(self.graph)

    def __call__(self, x):
        return apply(self, x)

    def __neg__(self) -> "InterpolatedOperator":
        return InterpolatedOperator(self.graph, -self.t, -self.s, -self.shift)

    def shifted(self, zeta: float) -> "InterpolatedOperator":
        """The operator ``M + zeta * I``."""
        return InterpolatedOperator(self.graph, self.t, self.s, self.shift + zeta)

    def to_dense(self) -> np.ndarray:
        """Materialize ``t D - s A + shift I``; for small-n oracles only."""
        M = -self.s * self.graph.to_dense()
        M[np.diag_indices(self.n)] += self.t * self.degrees + self.shift
        return M


def build(g: Graph, t: float, s: float) -> InterpolatedOperator:
    if g.n == 0:
        raise EmptyGraph("cannot build an operator on an empty graph")
    return InterpolatedOperator(g, float(t), float(s))


def apply(op: InterpolatedOperator, x) -> np.ndarray:
    """``t * deg * x - s * (A x) + shift * x``; accepts a vector or an (n, b) block."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != op.n:
        raise DimensionMismatch(f"expected leading dimension {op.n}, got {x.shape[0]}")
    diag = op.t * op.degrees + op.shift
    if x.ndim == 2:
        diag = diag[:, None]
    out = diag * x
    if op.s != 0.0:
        out -= op.s * adjacency_apply(op.graph, x)
    return out


def quadratic_form_edges(op: InterpolatedOperator, x) -> float:
    """``x^T M x`` summed edge by edge.

    Each undirected edge contributes
    ``w_ij * [t (x_i - x_j)^2 - 2 (s - t) x_i x_j]``; a nonzero shift adds
    ``shift * |x|^2``. Independent of :func:`apply`, so the two can check
    each other.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (op.n,):
        raise DimensionMismatch(f"expected shape ({op.n},), got {x.shape}")
    g = op.graph
    upper = g.row_ids < g.col_indices
    i, j, w = g.row_ids[upper], g.col_indices[upper], g.weights[upper]
    xi, xj = x[i], x[j]
    terms = w * (op.t * (xi - xj) ** 2 - 2.0 * (op.s - op.t) * xi * xj)
    total = float(np.sum(terms))
    if op.shift:
        total += op.shift * float(x @ x)
    return total


def rayleigh_quotient(op: InterpolatedOperator, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    nrm2 = float(x @ x)
    if nrm2 == 0.0:
        raise ZeroVector("Rayleigh quotient of the zero vector is undefined")
    return float(x @ apply(op, x)) / nrm2


def from_deformed(g: Graph, q: float) -> tuple[InterpolatedOperator, float]:
    """Express ``I - qA + q^2 (D - I)`` as ``build(g, q^2, q) + shift * I``.

    Returns the operator and ``shift = 1 - q^2`` separately, so callers can
    confirm that the two spectra differ by exactly that constant.
    """
    q = float(q)
    return build(g, q * q, q), 1.0 - q * q


def deformed_laplacian_dense(g: Graph, q: float) -> np.ndarray:
    """Dense ``I - qA + q^2 (D - I)`` assembled term by term."""
    n = g.n
    eye = np.eye(n)
    return eye - q * g.to_dense() + q * q * (np.diag(degree_vector(g)) - eye)


def gershgorin_upper_bound(op: InterpolatedOperator) -> float:
    """Upper bound on the largest eigenvalue: ``max_u (t + |s|) deg(u) + shift``."""
    d = op.degrees
    if d.size == 0:
        return op.shift
    return float(np.max(op.t * d + abs(op.s) * d)) + op.shift
