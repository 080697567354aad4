import math

import networkx as nx
import numpy as np
import pytest

from interlap.datasets import (
    corrupt_features,
    degree_labels,
    export_dataset,
    load_dataset,
    split_70_30,
    write_labels,
)
from interlap.errors import (
    DimensionMismatch,
    DuplicateEdge,
    InvalidFraction,
    InvalidRatio,
    MissingLabels,
    ParseError,
    SelfLoop,
    TooSmall,
)
from interlap.graph import degree_vector, from_edge_list, write_edge_list

from conftest import karate_edges, random_graph


@pytest.fixture
def karate_files(tmp_path):
    edges = tmp_path / "karate.txt"
    edges.write_text("".join(f"{u} {v}\n" for u, v, _ in karate_edges()))
    communities = nx.community.louvain_communities(nx.karate_club_graph(), seed=0)
    labels = {u: c for c, members in enumerate(communities) for u in members}
    write_labels([labels[u] for u in range(34)], tmp_path / "karate_labels.csv")
    return edges, tmp_path / "karate_labels.csv"


def cornell_like(tmp_path, rng):
    """Synthetic files with the WebKB Cornell shape: 183 nodes, 1703 features, 5 classes."""
    n, d = 183, 1703
    order = rng.permutation(n)
    pairs = {tuple(sorted((int(a), int(b)))) for a, b in zip(order, order[1:])}
    while len(pairs) < 298:
        u, v = rng.integers(0, n, size=2)
        if u != v:
            pairs.add((int(min(u, v)), int(max(u, v))))
    (tmp_path / "cornell.edges").write_text("".join(f"{u} {v}\n" for u, v in sorted(pairs)))
    X = (rng.random((n, d)) < 0.01).astype(float)
    np.savetxt(tmp_path / "cornell.features", X, delimiter=",", fmt="%g")
    labels = rng.integers(0, 5, size=n)
    labels[:5] = np.arange(5)
    (tmp_path / "cornell.labels").write_text(
        "node,label\n" + "".join(f"{u},{['course', 'faculty', 'project', 'staff', 'student'][y]}\n" for u, y in enumerate(labels))
    )
    return tmp_path / "cornell.edges", tmp_path / "cornell.features", tmp_path / "cornell.labels"


class TestLoad:
    def test_karate(self, karate_files):
        ds = load_dataset(*karate_files[:1], label_path=karate_files[1])
        assert ds.n == 34 and ds.graph.num_edges == 78
        assert ds.num_classes == 4
        assert ds.features is None

    def test_cornell_shape(self, tmp_path):
        e, f, l = cornell_like(tmp_path, np.random.default_rng(0))
        ds = load_dataset(e, f, l)
        assert ds.n == 183 and ds.graph.num_edges == 298
        assert ds.features.shape == (183, 1703)
        assert ds.num_classes == 5
        assert set(ds.labels) == set(range(5))

    def test_malformed_line(self, tmp_path):
        p = tmp_path / "bad.txt"
        p.write_text("0 1\n1 2\na b\n")
        with pytest.raises(ParseError) as exc:
            load_dataset(p, degree_label_fraction=0.2)
        assert exc.value.line == 3

    def test_missing_labels(self, tmp_path):
        p = tmp_path / "g.txt"
        p.write_text("0 1\n1 2\n")
        (tmp_path / "l.csv").write_text("0,1\n1,0\n")
        with pytest.raises(MissingLabels):
            load_dataset(p, label_path=tmp_path / "l.csv")
        with pytest.raises(MissingLabels):
            load_dataset(p)

    def test_feature_rows_mismatch(self, tmp_path):
        p = tmp_path / "g.txt"
        p.write_text("0 1\n1 2\n2 3\n")
        np.savetxt(tmp_path / "x.csv", np.ones((2, 2)), delimiter=",")
        with pytest.raises(DimensionMismatch):
            load_dataset(p, tmp_path / "x.csv", degree_label_fraction=0.5)

    def test_lcc_reindex(self, tmp_path):
        p = tmp_path / "g.txt"
        p.write_text("0 1\n2 3\n3 4\n")
        X = np.arange(10.0).reshape(5, 2)
        np.savetxt(tmp_path / "x.csv", X, delimiter=",")
        (tmp_path / "l.csv").write_text("node,label\n0,a\n1,b\n2,b\n3,c\n4,c\n")
        ds = load_dataset(p, tmp_path / "x.csv", tmp_path / "l.csv")
        np.testing.assert_array_equal(ds.index_map, [2, 3, 4])
        np.testing.assert_array_equal(ds.features, X[2:])
        np.testing.assert_array_equal(ds.labels, [0, 1, 1])

    def test_lenient_drops_loops_and_reciprocals(self, tmp_path):
        p = tmp_path / "g.txt"
        p.write_text("0 1\n1 0\n1 1\n1 2\n")
        with pytest.raises(SelfLoop):
            load_dataset(p, degree_label_fraction=0.3)
        (tmp_path / "dup.txt").write_text("0 1\n1 0\n1 2\n")
        with pytest.raises(DuplicateEdge):
            load_dataset(tmp_path / "dup.txt", degree_label_fraction=0.3)
        ds = load_dataset(p, degree_label_fraction=0.3, lenient=True)
        assert ds.graph == from_edge_list([(0, 1), (1, 2)], 3)

    def test_round_trip(self, tmp_path):
        g = random_graph(40, 0.1, 3)
        write_edge_list(g, tmp_path / "g.txt")
        X = np.random.default_rng(0).normal(size=(40, 3))
        np.savetxt(tmp_path / "x.csv", X, delimiter=",", fmt="%.17g")
        write_labels(np.arange(40) % 3, tmp_path / "y.csv")
        ds = load_dataset(tmp_path / "g.txt", tmp_path / "x.csv", tmp_path / "y.csv")
        export_dataset(ds, tmp_path / "g2.txt", tmp_path / "y2.csv", tmp_path / "x2.csv")
        again = load_dataset(tmp_path / "g2.txt", tmp_path / "x2.csv", tmp_path / "y2.csv")
        assert again.graph == ds.graph == g
        np.testing.assert_array_equal(again.labels, ds.labels)
        np.testing.assert_array_equal(again.features, X)


class TestDegreeLabels:
    def test_star(self):
        g = from_edge_list([(0, v) for v in range(1, 10)], 10)
        np.testing.assert_array_equal(np.flatnonzero(degree_labels(g, 0.2)), [0, 1])

    def test_regular(self):
        g = from_edge_list([(u, (u + 1) % 11) for u in range(11)], 11)
        np.testing.assert_array_equal(np.flatnonzero(degree_labels(g, 0.2)), [0, 1, 2])

    @pytest.mark.parametrize("seed", range(5))
    def test_count_and_order(self, seed):
        g = random_graph(50 + seed, 0.1, seed, weighted=False)
        y = degree_labels(g, 0.2)
        assert y.sum() == math.ceil(0.2 * g.n)
        d = degree_vector(g)
        assert d[y == 1].min() >= d[y == 0].max()

    @pytest.mark.parametrize("f", [0.0, 1.0, -0.1, 1.5])
    def test_invalid(self, p3, f):
        with pytest.raises(InvalidFraction):
            degree_labels(p3, f)


class TestCorrupt:
    def test_ratio_zero(self):
        X = np.random.default_rng(0).normal(size=(20, 3))
        np.testing.assert_array_equal(corrupt_features(X, 0.0, seed=1), X)

    def test_sigma_zero(self):
        X = np.random.default_rng(0).normal(size=(20, 3))
        np.testing.assert_array_equal(corrupt_features(X, 1.0, sigma=0.0, seed=1), X)

    def test_half(self):
        X = np.random.default_rng(0).normal(size=(200, 30))
        Y = corrupt_features(X, 0.5, seed=4)
        changed = np.any(Y != X, axis=1)
        assert changed.sum() == 100
        np.testing.assert_array_equal(Y[~changed], X[~changed])
        diff = (Y - X)[changed]
        assert abs(diff.mean()) <= 0.2
        assert 0.7 <= diff.var() <= 1.3

    def test_floor_count(self):
        X = np.zeros((29, 2))
        assert np.any(corrupt_features(X, 0.3, seed=0) != 0, axis=1).sum() == 8

    def test_deterministic_and_input_untouched(self):
        X = np.ones((10, 2))
        a = corrupt_features(X, 0.4, seed=3)
        np.testing.assert_array_equal(a, corrupt_features(X, 0.4, seed=3))
        np.testing.assert_array_equal(X, np.ones((10, 2)))

    @pytest.mark.parametrize("ratio, sigma", [(-0.1, 1.0), (1.1, 1.0), (0.5, -1.0)])
    def test_invalid(self, ratio, sigma):
        with pytest.raises(InvalidRatio):
            corrupt_features(np.ones((4, 2)), ratio, sigma)


class TestSplit:
    def test_sizes(self):
        sp = split_70_30(10, 0)
        assert len(sp.train_idx) == 7 and len(sp.test_idx) == 3
        sp = split_70_30(183, 0)
        assert len(sp.train_idx) == 128 and len(sp.test_idx) == 55

    def test_deterministic(self):
        a, b = split_70_30(50, 9), split_70_30(50, 9)
        np.testing.assert_array_equal(a.train_idx, b.train_idx)
        np.testing.assert_array_equal(a.test_idx, b.test_idx)

    @pytest.mark.parametrize("n", [2, 3, 17, 100])
    def test_partition(self, n):
        sp = split_70_30(n, 1)
        both = np.concatenate([sp.train_idx, sp.test_idx])
        np.testing.assert_array_equal(np.sort(both), np.arange(n))

    def test_too_small(self):
        with pytest.raises(TooSmall):
            split_70_30(1)
