import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from interlap.errors import DimensionMismatch, EmptyGraph, ZeroVector
from interlap.graph import from_edge_list
from interlap.operators import (
    apply,
    build,
    deformed_laplacian_dense,
    from_deformed,
    gershgorin_upper_bound,
    quadratic_form_edges,
    rayleigh_quotient,
)

from conftest import dense_adjacency, dense_family, random_edges, random_graph

coef = st.floats(-2.0, 2.0, allow_nan=False)


class TestBuildAndApply:
    @pytest.fixture
    def edges(self):
        return random_edges(12, 0.35, np.random.default_rng(1))

    def test_empty_graph(self):
        with pytest.raises(EmptyGraph):
            build(from_edge_list([], 0), 1, 1)

    @pytest.mark.parametrize(
        "t, s, make",
        [
            (1, 1, lambda A, D: D - A),
            (0, -1, lambda A, D: A),
            (1, -1, lambda A, D: D + A),
        ],
        ids=["laplacian", "adjacency", "signless"],
    )
    def test_reductions(self, edges, t, s, make):
        g = from_edge_list(edges, 12)
        A = dense_adjacency(edges, 12)
        D = np.diag(A.sum(axis=1))
        x = np.random.default_rng(2).normal(size=12)
        np.testing.assert_allclose(apply(build(g, t, s), x), make(A, D) @ x, rtol=1e-13, atol=1e-13)

    def test_laplacian_kills_constants(self, p3):
        np.testing.assert_array_equal(apply(build(p3, 1, 1), np.ones(3)), [0, 0, 0])

    @given(coef, coef)
    def test_single_edge(self, t, s):
        g = from_edge_list([(0, 1)], 2)
        np.testing.assert_allclose(apply(build(g, t, s), [1.0, 0.0]), [t, -s], atol=0)

    @pytest.mark.parametrize("seed", range(5))
    def test_dense_oracle(self, seed):
        rng = np.random.default_rng(seed)
        edges = random_edges(12, 0.3, rng)
        t, s = rng.uniform(-2, 2, size=2)
        x = rng.normal(size=12)
        got = apply(build(from_edge_list(edges, 12), t, s), x)
        np.testing.assert_allclose(got, dense_family(dense_adjacency(edges, 12), t, s) @ x, rtol=1e-12, atol=1e-12)

    def test_block_apply(self, edges):
        g = from_edge_list(edges, 12)
        X = np.random.default_rng(0).normal(size=(12, 3))
        op = build(g, 0.7, -0.3)
        np.testing.assert_allclose(apply(op, X), np.column_stack([apply(op, c) for c in X.T]), rtol=1e-14)

    def test_dimension_mismatch(self, p3):
        with pytest.raises(DimensionMismatch):
            apply(build(p3, 1, 1), np.ones(2))

    @given(coef, coef, st.integers(0, 1000))
    @settings(max_examples=40, deadline=None)
    def test_symmetry(self, t, s, seed):
        g = random_graph(15, 0.3, seed)
        rng = np.random.default_rng(seed)
        x, y = rng.normal(size=(2, 15))
        op = build(g, t, s)
        # infinity-norm bound of t D - s A
        bound = (abs(t) + abs(s)) * g.to_dense().sum(axis=1).max() + 1e-300
        lhs = apply(op, x) @ y
        rhs = x @ apply(op, y)
        assert abs(lhs - rhs) <= 1e-10 * np.linalg.norm(x) * np.linalg.norm(y) * bound


class TestQuadraticForm:
    @given(coef, coef)
    def test_single_edge(self, t, s):
        g = from_edge_list([(0, 1)], 2)
        x = np.array([1.0, -1.0]) / np.sqrt(2)
        assert quadratic_form_edges(build(g, t, s), x) == pytest.approx(t + s, abs=1e-12)

    def test_laplacian_form(self):
        edges = random_edges(10, 0.4, np.random.default_rng(5))
        g = from_edge_list(edges, 10)
        x = np.random.default_rng(6).normal(size=10)
        expected = sum(w * (x[u] - x[v]) ** 2 for u, v, w in edges)
        assert quadratic_form_edges(build(g, 1, 1), x) == pytest.approx(expected, rel=1e-12)

    @given(coef, coef, st.integers(0, 10_000))
    @settings(max_examples=60, deadline=None)
    def test_matches_matvec(self, t, s, seed):
        g = random_graph(14, 0.3, seed)
        x = np.random.default_rng(seed).normal(size=14)
        op = build(g, t, s)
        q = quadratic_form_edges(op, x)
        ref = x @ apply(op, x)
        scale = max(abs(ref), 1e-300)
        # cancellation bound: compare against the size of the summed terms
        mag = (abs(t) + abs(s)) * (g.to_dense().sum(axis=1) @ x**2) + 1e-300
        assert abs(q - ref) <= 1e-12 * max(scale, mag)

    def test_laplacian_nonnegative_zero_iff_constant(self, karate):
        op = build(karate, 1, 1)
        rng = np.random.default_rng(0)
        for _ in range(20):
            assert quadratic_form_edges(op, rng.normal(size=34)) > 0
        assert quadratic_form_edges(op, np.full(34, 3.0)) == pytest.approx(0.0, abs=1e-12)

    def test_dimension_mismatch(self, p3):
        with pytest.raises(DimensionMismatch):
            quadratic_form_edges(build(p3, 1, 1), np.ones(4))


class TestRayleigh:
    def test_eigenvector(self, karate):
        M = build(karate, 0.5, -1.5).to_dense()
        vals, vecs = np.linalg.eigh(M)
        for j in (0, 10, 33):
            assert rayleigh_quotient(build(karate, 0.5, -1.5), vecs[:, j]) == pytest.approx(vals[j], abs=1e-10)

    def test_ones_on_laplacian(self, karate):
        assert rayleigh_quotient(build(karate, 1, 1), np.ones(34)) == pytest.approx(0.0, abs=1e-12)

    def test_within_spectrum(self):
        rng = np.random.default_rng(7)
        edges = random_edges(9, 0.4, rng)
        g = from_edge_list(edges, 9)
        vals = np.linalg.eigvalsh(dense_family(dense_adjacency(edges, 9), -1.0, 0.5))
        for _ in range(50):
            r = rayleigh_quotient(build(g, -1.0, 0.5), rng.normal(size=9))
            assert vals[0] - 1e-12 <= r <= vals[-1] + 1e-12

    def test_zero_vector(self, p3):
        with pytest.raises(ZeroVector):
            rayleigh_quotient(build(p3, 1, 1), np.zeros(3))


class TestDeformed:
    def test_q1_is_laplacian(self, p3):
        op, shift = from_deformed(p3, 1.0)
        assert (op.t, op.s, shift) == (1.0, 1.0, 0.0)

    def test_q0_is_identity(self, p3):
        op, shift = from_deformed(p3, 0.0)
        assert (op.t, op.s, shift) == (0.0, 0.0, 1.0)

    def test_dense_identity(self):
        edges = random_edges(10, 0.35, np.random.default_rng(8))
        g = from_edge_list(edges, 10)
        A = dense_adjacency(edges, 10)
        D = np.diag(A.sum(axis=1))
        q = 0.5
        expected = np.eye(10) - q * A + q**2 * (D - np.eye(10))
        np.testing.assert_allclose(deformed_laplacian_dense(g, q), expected, atol=1e-15)
        op, shift = from_deformed(g, q)
        assert shift == pytest.approx(0.75)
        np.testing.assert_allclose(op.to_dense() + shift * np.eye(10), expected, atol=1e-14)

    def test_eigen_relationship(self):
        g = random_graph(10, 0.35, 8)
        op, shift = from_deformed(g, 0.5)
        v1, z1 = np.linalg.eigh(deformed_laplacian_dense(g, 0.5))
        v2, z2 = np.linalg.eigh(op.to_dense())
        np.testing.assert_allclose(v1 - v2, 0.75, atol=1e-12)
        simple = np.flatnonzero(np.minimum(np.diff(v2, prepend=-np.inf), np.diff(v2, append=np.inf)) > 1e-6)
        for j in simple:
            assert abs(abs(z1[:, j] @ z2[:, j]) - 1.0) < 1e-10


class TestGershgorin:
    def test_p3(self, p3):
        assert gershgorin_upper_bound(build(p3, 1, 1)) == 4

    def test_k2_adjacency(self):
        assert gershgorin_upper_bound(build(from_edge_list([(0, 1)], 2), 0, -1)) == 1

    @given(coef, coef, st.integers(0, 10_000))
    @settings(max_examples=40, deadline=None)
    def test_bounds_spectrum(self, t, s, seed):
        op = build(random_graph(12, 0.3, seed), t, s)
        assert np.linalg.eigvalsh(op.to_dense())[-1] <= gershgorin_upper_bound(op) + 1e-12
