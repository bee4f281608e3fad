"""Dataset files, split sampling, and the synthetic fixture generator."""

import numpy as np
import pytest

from lerp.data import (DatasetError, load_dataset, make_blobs, sample_split,
                       save_dataset)


def _write_fixture(root, edges="0 1\n1 2\n", features="1.0,0.0\n0.5,0.5\n0.0,1.0\n",
                   labels="0\n1\n1\n"):
    (root / "edges.txt").write_text(edges)
    (root / "features.csv").write_text(features)
    (root / "labels.txt").write_text(labels)
    return root


class TestLoad:
    def test_three_node_fixture(self, tmp_path):
        ds = load_dataset(_write_fixture(tmp_path))
        assert ds.n == 3 and ds.c == 2
        assert ds.graph.degree[1] == 2.0
        np.testing.assert_array_equal(ds.labels, [0, 1, 1])

    def test_comments_allowed_everywhere(self, tmp_path):
        _write_fixture(tmp_path, edges="# e\n0 1\n", features="# f\n1.0\n2.0\n",
                       labels="# l\n0\n1\n")
        ds = load_dataset(tmp_path)
        assert ds.n == 2

    def test_missing_file(self, tmp_path):
        _write_fixture(tmp_path)
        (tmp_path / "labels.txt").unlink()
        with pytest.raises(DatasetError, match="labels.txt"):
            load_dataset(tmp_path)

    def test_row_count_mismatch(self, tmp_path):
        _write_fixture(tmp_path, labels="0\n1\n")
        with pytest.raises(DatasetError, match="rows"):
            load_dataset(tmp_path)

    def test_negative_label(self, tmp_path):
        _write_fixture(tmp_path, labels="0\n-1\n1\n")
        with pytest.raises(DatasetError):
            load_dataset(tmp_path)

    def test_edge_beyond_feature_rows(self, tmp_path):
        _write_fixture(tmp_path, edges="0 9\n")
        with pytest.raises(ValueError):
            load_dataset(tmp_path)


class TestRoundTrip:
    def test_save_load_bit_exact(self, tmp_path):
        ds = make_blobs(10, 3, 4, 5.0, seed=0)
        first = tmp_path / "a"
        second = tmp_path / "b"
        save_dataset(ds, first)
        loaded = load_dataset(first)
        np.testing.assert_array_equal(loaded.features, ds.features)
        np.testing.assert_array_equal(loaded.labels, ds.labels)
        np.testing.assert_array_equal(loaded.graph.indptr, ds.graph.indptr)
        np.testing.assert_array_equal(loaded.graph.indices, ds.graph.indices)
        np.testing.assert_array_equal(loaded.graph.weights, ds.graph.weights)
        save_dataset(loaded, second)
        for name in ("edges.txt", "features.csv", "labels.txt"):
            assert (first / name).read_text() == (second / name).read_text()


class TestSplit:
    def test_disjoint_and_covering(self):
        ds = make_blobs(30, 3, 4, 6.0, seed=1)
        split = sample_split(ds, 4, seed=2)
        merged = np.concatenate([split.labeled, split.validation, split.test])
        assert merged.size == ds.n
        assert np.unique(merged).size == ds.n

    def test_per_class_counts(self):
        ds = make_blobs(30, 3, 4, 6.0, seed=3)
        split = sample_split(ds, 4, seed=4)
        counts = np.bincount(ds.labels[split.labeled], minlength=3)
        np.testing.assert_array_equal(counts, [4, 4, 4])

    def test_validation_capped_at_500(self):
        ds = make_blobs(200, 3, 2, 12.0, seed=5)
        split = sample_split(ds, 1, seed=6)
        assert split.validation.size == 500
        assert split.test.size == 600 - 3 - 500

    def test_small_remainder_uses_fifth(self):
        ds = make_blobs(30, 3, 4, 6.0, seed=7)
        split = sample_split(ds, 1, seed=8)
        assert split.validation.size == (90 - 3) // 5
        assert split.test.size == 90 - 3 - split.validation.size

    def test_deterministic_per_seed(self):
        ds = make_blobs(30, 3, 4, 6.0, seed=9)
        a = sample_split(ds, 2, seed=10)
        b = sample_split(ds, 2, seed=10)
        np.testing.assert_array_equal(a.labeled, b.labeled)
        np.testing.assert_array_equal(a.validation, b.validation)
        np.testing.assert_array_equal(a.test, b.test)

    def test_seeds_differ(self):
        ds = make_blobs(60, 3, 4, 6.0, seed=11)
        a = sample_split(ds, 20, seed=12)
        b = sample_split(ds, 20, seed=13)
        assert a.labeled.size == b.labeled.size == 60
        overlap = np.intersect1d(a.labeled, b.labeled).size
        assert overlap < 60

    def test_deficient_class(self):
        ds = make_blobs(3, 2, 2, 6.0, seed=14)
        with pytest.raises(DatasetError, match="fewer"):
            sample_split(ds, 5, seed=15)


class TestMakeBlobs:
    def test_components_align_with_classes_when_separated(self):
        ds = make_blobs(20, 3, 2, 20.0, seed=16)
        # No edge may cross classes when separation dwarfs the spread.
        rows = np.repeat(np.arange(ds.n), np.diff(ds.graph.indptr))
        assert np.all(ds.labels[rows] == ds.labels[ds.graph.indices])

    def test_single_class(self):
        ds = make_blobs(12, 1, 3, 2.0, seed=17)
        np.testing.assert_array_equal(ds.labels, np.zeros(12, dtype=np.int64))

    def test_deterministic(self):
        a = make_blobs(15, 2, 3, 4.0, seed=18)
        b = make_blobs(15, 2, 3, 4.0, seed=18)
        np.testing.assert_array_equal(a.features, b.features)
        np.testing.assert_array_equal(a.graph.indices, b.graph.indices)

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            make_blobs(0, 3, 2, 1.0, seed=0)
        with pytest.raises(ValueError):
            make_blobs(5, 3, 2, -1.0, seed=0)
