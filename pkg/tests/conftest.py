"""Shared fixtures and independent dense oracles."""

import networkx as nx
import numpy as np
import pytest

from interlap.graph import from_edge_list
from interlap.nn import autodiff as ad


def random_edges(n, p, rng, weighted=True, connected=True):
    """Erdos-Renyi edges; a random spanning path is added when ``connected``."""
    edges = {}
    if connected:
        order = rng.permutation(n)
        for a, b in zip(order, order[1:]):
            edges[(min(a, b), max(a, b))] = 1.0
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                edges[(u, v)] = 1.0
    out = []
    for (u, v) in sorted(edges):
        w = float(rng.uniform(0.0, 2.0)) if weighted else 1.0
        out.append((int(u), int(v), w if w > 0 else 1.0))
    return out


def random_graph(n, p, seed, weighted=True, connected=True):
    rng = np.random.default_rng(seed)
    return from_edge_list(random_edges(n, p, rng, weighted, connected), n)


def dense_adjacency(edges, n):
    A = np.zeros((n, n))
    for u, v, *w in edges:
        A[u, v] = A[v, u] = w[0] if w else 1.0
    return A


def dense_family(A, t, s):
    """``t D - s A`` assembled directly from a dense adjacency."""
    return t * np.diag(A.sum(axis=1)) - s * A


def oracle_eigh(Mdense):
    vals, vecs = np.linalg.eigh(Mdense)
    return vals, vecs


def aligned_error(U, V):
    """Max column 2-norm distance after choosing each column sign of V."""
    errs = []
    for j in range(U.shape[1]):
        errs.append(min(np.linalg.norm(U[:, j] - V[:, j]), np.linalg.norm(U[:, j] + V[:, j])))
    return max(errs) if errs else 0.0


# -- finite-difference gradient checks --

FD_STEP = 1e-5


def numeric_grad(f, P):
    """Central differences of scalar ``f()`` with respect to array ``P`` (in place)."""
    G = np.zeros_like(P)
    for idx in np.ndindex(P.shape):
        old = P[idx]
        P[idx] = old + FD_STEP
        fp = f()
        P[idx] = old - FD_STEP
        fm = f()
        P[idx] = old
        G[idx] = (fp - fm) / (2 * FD_STEP)
    return G


def assert_grad_close(analytic, numeric):
    diff = np.linalg.norm(analytic - numeric)
    scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric))
    assert diff < 1e-7 or diff / scale < 1e-4, f"relative error {diff / scale:.3g}"


def check_primitive(build, inputs, seed=0):
    """Gradient check of ``build(*tensors)`` under a cross-entropy head."""
    rng = np.random.default_rng(seed)
    params = [ad.parameter(x.copy()) for x in inputs]
    out = build(*params)
    labels = rng.integers(0, out.shape[1], size=out.shape[0])

    def loss_value():
        return ad.softmax_cross_entropy(build(*params), labels).value[0, 0]

    for p in params:
        p.zero_grad()
    ad.backward(ad.softmax_cross_entropy(build(*params), labels))
    for p in params:
        assert p.grad.shape == p.value.shape
        assert_grad_close(p.grad, numeric_grad(loss_value, p.value))


def check_architecture(model, X, y, mask):
    """Gradient check of every parameter of ``model`` on a masked loss."""
    # zero biases put fully dead rows exactly on the ReLU kink; move off it
    rng = np.random.default_rng(11)
    for p in model.parameters():
        if p.value.shape[0] == 1:
            p.value[:] = rng.normal(scale=0.1, size=p.value.shape)
    x = ad.constant(X)

    def loss_value():
        return ad.softmax_cross_entropy(model(x), y, mask).value[0, 0]

    for p in model.parameters():
        p.zero_grad()
    ad.backward(ad.softmax_cross_entropy(model(x), y, mask))
    grads = [p.grad.copy() for p in model.parameters()]
    for p, gr in zip(model.parameters(), grads):
        assert_grad_close(gr, numeric_grad(loss_value, p.value))


def karate_edges():
    G = nx.karate_club_graph()
    return [(int(u), int(v), 1.0) for u, v in G.edges()]


@pytest.fixture(scope="session")
def karate():
    return from_edge_list(karate_edges(), 34)


@pytest.fixture
def p3():
    return from_edge_list([(0, 1, 1.0), (1, 2, 1.0)], 3)


@pytest.fixture
def star():
    return from_edge_list([(0, 1), (0, 2), (0, 3)], 4)
