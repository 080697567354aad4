"""
Symmetric eigensolvers for matrix-free operators
================================================

:func:`smallest_k` runs thick-restart Lanczos with full
reorthogonalization on the shifted operator ``c I - M``, where ``c`` is a
Gershgorin bound on the spectrum of ``M``. The algebraically smallest
eigenvalues of ``M`` are then the largest of the iterated operator.

A single Krylov sequence only sees one direction per eigenspace, so after
the first ``k`` pairs converge they are locked and the solver repeatedly
looks for a smaller eigenvalue in their orthogonal complement. Anything
found is swapped in, which recovers repeated eigenvalues (e.g. ``M = tD``
with integer degrees).

:func:`dense_eig` is the ``numpy.linalg.eigh`` oracle used in tests.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidK, NoConvergence, TooLarge, ZeroColumn
from .operators import InterpolatedOperator, apply, gershgorin_upper_bound

logger = logging.getLogger(__name__)

DEGENERATE_GAP = 1e-6
SIGN_TIE_RTOL = 1e-8


@dataclass(frozen=True)
class EigenPairs:
    """Eigenpairs sorted by ascending eigenvalue.

    ``eigenvectors[:, j]`` belongs to ``eigenvalues[j]``; columns are
    orthonormal and sign-canonicalized. ``degenerate`` flags consecutive
    eigenvalue gaps below ``1e-6``, where the returned basis of the
    eigenspace is arbitrary.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    iterations: int
    matvecs: int = 0

    @property
    def k(self) -> int:
        return len(self.eigenvalues)

    @property
    def degenerate(self) -> bool:
        return bool(np.any(np.diff(self.eigenvalues) < DEGENERATE_GAP))

    def descending(self) -> "EigenPairs":
        """Same pairs ordered by descending eigenvalue (adjacency convention)."""
        return replace(
            self,
            eigenvalues=self.eigenvalues[::-1].copy(),
            eigenvectors=self.eigenvectors[:, ::-1].copy(),
            residuals=self.residuals[::-1].copy(),
        )


def canonicalize_sign(vectors) -> np.ndarray:
    """Flip columns so the largest-magnitude entry of each is positive.

    Entries within a relative ``1e-8`` of the column maximum count as tied;
    the lowest index among them decides. The choice depends only on
    ``|v|``, so ``v`` and ``-v`` canonicalize identically.
    """
    V = np.array(vectors, dtype=np.float64)
    one_d = V.ndim == 1
    if one_d:
        V = V[:, None]
    a = np.abs(V)
    peak = a.max(axis=0) if V.shape[0] else np.zeros(V.shape[1])
    if np.any(peak == 0):
        raise ZeroColumn("cannot canonicalize the sign of a zero column")
    pivot = np.argmax(a >= peak * (1.0 - SIGN_TIE_RTOL), axis=0)
    signs = np.sign(V[pivot, np.arange(V.shape[1])])
    V *= signs
    return V[:, 0] if one_d else V


def dense_eig(op: InterpolatedOperator, n: int | None = None, dense_limit: int = 2000) -> EigenPairs:
    """Full spectrum by dense symmetric decomposition."""
    n = op.n if n is None else n
    if n > dense_limit:
        raise TooLarge(f"n={n} exceeds dense_limit={dense_limit}")
    M = op.to_dense()
    vals, vecs = np.linalg.eigh(M)
    vecs = canonicalize_sign(vecs)
    res = np.linalg.norm(M @ vecs - vecs * vals, axis=0)
    return EigenPairs(vals, vecs, res, iterations=0, matvecs=0)


def _orthogonalize(w, blocks):
    # classical Gram-Schmidt, applied twice
    for _ in range(2):
        for Q in blocks:
            if Q.shape[1]:
                w -= Q @ (Q.T @ w)
    return w


class _Lanczos:
    """Thick-restart Lanczos on ``B = c I - M`` with locking."""

    def __init__(self, op, c, basis_size, tol, max_iter, rng):
        self.op = op
        self.n = op.n
        self.c = c
        self.m = basis_size
        self.tol = tol
        self.max_iter = max_iter
        self.rng = rng
        self.locked = np.empty((self.n, 0))
        self.locked_vals = np.empty(0)
        self.cycles = 0
        self.matvecs = 0

    def B(self, x):
        self.matvecs += 1
        return self.c * x - apply(self.op, x)

    def _random_direction(self, V):
        for _ in range(3):
            x = self.rng.uniform(-1.0, 1.0, self.n)
            x = _orthogonalize(x, (self.locked, V))
            nrm = np.linalg.norm(x)
            if nrm > 1e-8:
                return x / nrm
        return None

    def run(self, need, stop=None):
        """Converge the ``need`` largest eigenpairs of ``B`` off the locked space.

        Returns ``(theta, Y, res)`` with ``theta`` descending. ``stop`` may end
        the run early; it receives the current Ritz values and residuals.
        """
        n_free = self.n - self.locked.shape[1]
        m = min(self.m, n_free)
        need = min(need, n_free)
        V = np.empty((self.n, m + 1))
        W = np.empty((self.n, m))
        V[:, 0] = self._random_direction(V[:, :0])
        nv, nw = 1, 0
        best = None
        for _ in range(self.max_iter):
            self.cycles += 1
            while nw < m and nw < nv:
                w = self.B(V[:, nw])
                W[:, nw] = w
                nw += 1
                if nv < min(m + 1, n_free):
                    scale = np.linalg.norm(w)
                    f = _orthogonalize(w.copy(), (self.locked, V[:, :nv]))
                    beta = np.linalg.norm(f)
                    if beta <= 1e-10 * max(scale, abs(self.c), 1.0):
                        # invariant subspace reached; continue from a fresh direction
                        f = self._random_direction(V[:, :nv])
                        if f is None:
                            continue
                    else:
                        f /= beta
                    V[:, nv] = f
                    nv += 1

            Vb, Wb = V[:, :nw], W[:, :nw]
            H = Vb.T @ Wb
            H = 0.5 * (H + H.T)
            theta, S = np.linalg.eigh(H)
            theta, S = theta[::-1], S[:, ::-1]
            Y = Vb @ S
            res = np.linalg.norm(Wb @ S - Y * theta, axis=0)
            best = (theta[:need], Y[:, :need], res[:need])
            if stop is not None and stop(theta, res):
                return best
            if np.all(res[:need] <= self.tol) or nw >= n_free:
                return best

            p = min(nw - 1, need + max((nw - need) // 2, 1))
            V[:, :p] = Y[:, :p]
            W[:, :p] = Wb @ S[:, :p]
            if nv > nw:
                V[:, p] = V[:, nv - 1]
            else:
                V[:, p] = self._random_direction(V[:, :p])
            nv, nw = p + 1, p
        theta, Y, res = best
        raise NoConvergence(
            f"Lanczos did not reach tol={self.tol:g} in {self.max_iter} restart cycles",
            eigenvalues=self.c - theta,
            residuals=res,
        )

    def lock(self, theta, Y):
        self.locked = np.hstack([self.locked, Y])
        self.locked_vals = np.concatenate([self.locked_vals, self.c - theta])


def smallest_k(
    op: InterpolatedOperator,
    k: int,
    tol: float = 1e-8,
    max_iter: int | None = None,
    seed: int = 0,
    basis_size: int | None = None,
) -> EigenPairs:
    """The ``k`` algebraically smallest eigenpairs of ``op``.

    Parameters
    ----------
    op : InterpolatedOperator
        Symmetric operator; only its matvec is used.
    k : int
        Number of pairs, ``1 <= k <= n``.
    tol : float
        Bound on every residual ``||M z - lambda z||``.
    max_iter : int, optional
        Restart cycles allowed per Lanczos run; default ``min(n, 10k + 100)``.
    seed : int
        Seeds the uniform random start vector (and any restart directions).
    basis_size : int, optional
        Krylov basis size before a restart; default ``max(4k, 40)``.

    Returns
    -------
    EigenPairs
        Ascending eigenvalues with sign-canonical eigenvectors.
    """
    n = op.n
    if not 1 <= k <= n:
        raise InvalidK(f"k={k} outside [1, {n}]")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if max_iter is None:
        max_iter = min(n, 10 * k + 100)
    if basis_size is None:
        basis_size = max(4 * k, 40)
    c = gershgorin_upper_bound(op)
    solver = _Lanczos(op, c, basis_size, 0.5 * tol, max_iter, np.random.default_rng(seed))

    theta, Y, _ = solver.run(k)
    solver.lock(theta, Y)

    margin = tol
    while solver.locked.shape[1] < n:
        lam_k = solver.locked_vals.max()

        def settled(theta, res, lam_k=lam_k):
            lam, r = solver.c - theta[0], res[0]
            return lam - r >= lam_k - margin and r <= np.sqrt(tol)

        theta, Y, res = solver.run(1, stop=settled)
        lam = solver.c - theta[0]
        if lam >= lam_k - margin:
            break
        logger.debug("swapping in missed eigenvalue %.6g (< %.6g)", lam, lam_k)
        solver.lock(theta, Y)
        drop = int(np.argmax(solver.locked_vals))
        keep = np.arange(solver.locked.shape[1]) != drop
        solver.locked = solver.locked[:, keep]
        solver.locked_vals = solver.locked_vals[keep]

    Z = solver.locked
    MZ = apply(op, Z)
    vals = np.einsum("ij,ij->j", Z, MZ)
    order = np.argsort(vals, kind="stable")
    vals, Z, MZ = vals[order], Z[:, order], MZ[:, order]
    res = np.linalg.norm(MZ - Z * vals, axis=0)
    if np.any(res > tol):
        raise NoConvergence(
            f"final residual {res.max():.3g} exceeds tol={tol:g}", eigenvalues=vals, residuals=res
        )
    return EigenPairs(vals, canonicalize_sign(Z), res, solver.cycles, solver.matvecs)


def largest_k(
    op: InterpolatedOperator,
    k: int,
    tol: float = 1e-8,
    max_iter: int | None = None,
    seed: int = 0,
    basis_size: int | None = None,
) -> EigenPairs:
    """The ``k`` algebraically largest eigenpairs, stored ascending.

    Computed as the negated smallest pairs of ``-op``; call
    :meth:`EigenPairs.descending` for the descending view.
    """
    neg = smallest_k(-op, k, tol=tol, max_iter=max_iter, seed=seed, basis_size=basis_size)
    return EigenPairs(
        -neg.eigenvalues[::-1],
        neg.eigenvectors[:, ::-1].copy(),
        neg.residuals[::-1].copy(),
        neg.iterations,
        neg.matvecs,
    )


__all__ = [
    "EigenPairs",
    "canonicalize_sign",
    "dense_eig",
    "gershgorin_upper_bound",
    "largest_k",
    "smallest_k",
]
