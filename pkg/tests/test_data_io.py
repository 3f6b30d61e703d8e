import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qkgene.data_io import (
    LabeledDataset,
    PhaseScaler,
    SplitSpec,
    load_csv,
    scale_to_phase,
    split_indices,
    stratified_split,
)
from qkgene.errors import ConfigError, DataError


def write_csv(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoadCsv:
    def test_label_mapping(self, tmp_path):
        path = write_csv(
            tmp_path,
            "g1,g2,label\n1.0,2.0,tumor\n3.0,4.0,tumor\n5.0,6.0,normal\n",
        )
        ds = load_csv(path, "label", positive_label="tumor")
        assert ds.features.shape == (3, 2)
        assert ds.labels.tolist() == [1, 1, -1]
        assert ds.gene_names == ["g1", "g2"]

    def test_label_column_by_index(self, tmp_path):
        path = write_csv(tmp_path, "a,b\nx,1.0\ny,2.0\n")
        ds = load_csv(path, 0, positive_label="x")
        assert ds.labels.tolist() == [1, -1]
        assert ds.features.tolist() == [[1.0], [2.0]]

    def test_single_class_error(self, tmp_path):
        path = write_csv(tmp_path, "g,label\n1.0,a\n2.0,a\n")
        with pytest.raises(DataError, match="single-class"):
            load_csv(path, "label", positive_label="a")

    def test_three_class_error(self, tmp_path):
        path = write_csv(tmp_path, "g,label\n1,a\n2,b\n3,c\n")
        with pytest.raises(DataError):
            load_csv(path, "label", positive_label="a")

    def test_missing_positive_label_error(self, tmp_path):
        path = write_csv(tmp_path, "g,label\n1,a\n2,b\n")
        with pytest.raises(DataError):
            load_csv(path, "label", positive_label="zzz")

    def test_missing_file_error(self, tmp_path):
        with pytest.raises(DataError):
            load_csv(tmp_path / "absent.csv", "label", positive_label="a")

    def test_ragged_row_error(self, tmp_path):
        path = write_csv(tmp_path, "g1,g2,label\n1,2,a\n3,b\n")
        with pytest.raises(DataError):
            load_csv(path, "label", positive_label="a")

    def test_non_numeric_feature_error(self, tmp_path):
        path = write_csv(tmp_path, "g,label\noops,a\n2,b\n")
        with pytest.raises(DataError):
            load_csv(path, "label", positive_label="a")

    def test_colon_shape(self, tmp_path):
        rng = np.random.default_rng(0)
        rows = [",".join(f"g{i}" for i in range(2000)) + ",label"]
        labels = ["tumor"] * 40 + ["normal"] * 22
        for lab in labels:
            rows.append(",".join(repr(float(v)) for v in rng.normal(size=2000))
                        + f",{lab}")
        path = write_csv(tmp_path, "\n".join(rows) + "\n")
        ds = load_csv(path, "label", positive_label="tumor")
        assert ds.features.shape == (62, 2000)
        assert ds.class_counts() == {1: 40, -1: 22}


class TestDatasetValidation:
    def test_length_mismatch(self):
        with pytest.raises(DataError):
            LabeledDataset(np.zeros((3, 2)), np.array([1, -1]))

    def test_bad_label_values(self):
        with pytest.raises(DataError):
            LabeledDataset(np.zeros((2, 2)), np.array([1, 0]))

    def test_non_finite_features(self):
        with pytest.raises(DataError):
            LabeledDataset(np.array([[1.0, np.nan]]), np.array([1]))

    def test_select_genes_subset(self):
        ds = LabeledDataset(np.arange(6.0).reshape(2, 3), np.array([1, -1]),
                            gene_names=["a", "b", "c"])
        sub = ds.select_genes(np.array([1, 0, 1], dtype=np.int8))
        assert sub.features.tolist() == [[0.0, 2.0], [3.0, 5.0]]
        assert sub.gene_names == ["a", "c"]


class TestSplit:
    def test_proportional_rounding(self):
        labels = np.array([1] * 5 + [-1] * 5)
        train, test = split_indices(labels, SplitSpec(0.2, seed=1))
        assert labels[test].tolist().count(1) == 1
        assert labels[test].tolist().count(-1) == 1
        assert len(train) == 8

    def test_deterministic(self):
        labels = np.array([1] * 7 + [-1] * 9)
        a = split_indices(labels, SplitSpec(0.25, seed=5))
        b = split_indices(labels, SplitSpec(0.25, seed=5))
        assert a[0].tolist() == b[0].tolist()
        assert a[1].tolist() == b[1].tolist()

    def test_colon_counts(self):
        labels = np.array([1] * 40 + [-1] * 22)
        _train, test = split_indices(labels, SplitSpec(0.25, seed=3))
        test_pos = int(np.sum(labels[test] == 1))
        test_neg = int(np.sum(labels[test] == -1))
        assert abs(test_pos - 10) <= 1
        assert abs(test_neg - 5.5) <= 1

    def test_fraction_bounds(self):
        with pytest.raises(ConfigError):
            SplitSpec(0.0)
        with pytest.raises(ConfigError):
            SplitSpec(1.0)

    def test_degenerate_class_error(self):
        labels = np.array([1, 1, 1, -1])
        with pytest.raises(DataError):
            split_indices(labels, SplitSpec(0.25, seed=0))

    @given(
        n_pos=st.integers(4, 30),
        n_neg=st.integers(4, 30),
        frac=st.floats(0.2, 0.5),
        seed=st.integers(0, 2**32 - 1),
    )
    @settings(max_examples=60, deadline=None)
    def test_partition_property(self, n_pos, n_neg, frac, seed):
        labels = np.array([1] * n_pos + [-1] * n_neg)
        train, test = split_indices(labels, SplitSpec(frac, seed=seed))
        merged = sorted(train.tolist() + test.tolist())
        assert merged == list(range(n_pos + n_neg))
        for cls, count in ((1, n_pos), (-1, n_neg)):
            expect = round(count * frac)
            assert np.sum(labels[test] == cls) == expect

    def test_stratified_split_wraps_indices(self):
        ds = LabeledDataset(np.arange(20.0).reshape(10, 2),
                            np.array([1] * 5 + [-1] * 5))
        train, test = stratified_split(ds, SplitSpec(0.2, seed=0))
        assert train.n_samples == 8
        assert test.n_samples == 2


class TestPhaseScaler:
    def test_affine_endpoints(self):
        scaler = PhaseScaler(0.0, math.pi).fit(np.array([[0.0], [5.0], [10.0]]))
        out = scaler.transform_features(np.array([[0.0], [5.0], [10.0]]))
        np.testing.assert_allclose(out.ravel(), [0.0, math.pi / 2, math.pi])

    def test_constant_column_maps_to_lo(self):
        scaler = PhaseScaler(0.25, 2.0).fit(np.array([[7.0], [7.0], [7.0]]))
        out = scaler.transform_features(np.array([[7.0], [7.0], [7.0]]))
        np.testing.assert_allclose(out.ravel(), [0.25, 0.25, 0.25])

    def test_range_scan(self):
        rng = np.random.default_rng(2)
        data = rng.normal(size=(5, 3)) * 10
        scaler = PhaseScaler(0.0, math.pi).fit(data)
        out = scaler.transform_features(data)
        assert np.all(out >= 0.0) and np.all(out <= math.pi)

    def test_out_of_range_rows_clamped(self):
        scaler = PhaseScaler(0.0, 1.0).fit(np.array([[0.0], [1.0]]))
        out = scaler.transform_features(np.array([[-5.0], [9.0]]))
        np.testing.assert_allclose(out.ravel(), [0.0, 1.0])

    def test_bad_bounds(self):
        with pytest.raises(ConfigError):
            PhaseScaler(1.0, 1.0)

    @given(
        st.lists(
            st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=4),
            min_size=2,
            max_size=8,
        ).filter(lambda rows: len({len(r) for r in rows}) == 1)
    )
    @settings(max_examples=60, deadline=None)
    def test_output_always_in_bounds(self, rows):
        data = np.array(rows)
        scaler = PhaseScaler(0.5, 2.5).fit(data)
        out = scaler.transform_features(data)
        assert np.all(out >= 0.5 - 1e-12) and np.all(out <= 2.5 + 1e-12)
        cols = data.max(axis=0) - data.min(axis=0)
        for j, span in enumerate(cols):
            if span > 0:
                assert math.isclose(out[:, j].min(), 0.5, abs_tol=1e-9)
                assert math.isclose(out[:, j].max(), 2.5, abs_tol=1e-9)

    def test_scale_to_phase_convenience(self):
        ds = LabeledDataset(np.array([[0.0], [2.0]]), np.array([1, -1]))
        out = scale_to_phase(ds)
        np.testing.assert_allclose(out.features.ravel(), [0.0, math.pi])
        assert out.labels.tolist() == ds.labels.tolist()
