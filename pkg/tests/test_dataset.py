import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from firenose import dataset as ds


def _toy_dataset(counts, n_features=3, seed=0):
    rng = np.random.default_rng(seed)
    labels = np.repeat(np.arange(len(counts)), counts)
    rows = rng.normal(size=(labels.size, n_features))
    names = tuple(f"C{i}" for i in range(len(counts)))
    return ds.LabeledDataset(rows=rows, labels=labels, class_names=names)


class TestSplit:
    def test_canonical_1000_sample_sizes(self, paper_dataset):
        idx = ds.split(paper_dataset, (0.6, 0.1, 0.3), seed=3)
        assert idx.train.size == 600
        assert idx.validation.size == 100
        assert idx.test.size == 300

    def test_degenerate_all_train(self):
        data = _toy_dataset([5, 5])
        idx = ds.split(data, (1.0, 0.0, 0.0), seed=1)
        assert idx.train.size == 10
        assert idx.validation.size == 0
        assert idx.test.size == 0

    def test_deterministic_for_fixed_seed(self, small_dataset):
        a = ds.split(small_dataset, seed=9)
        b = ds.split(small_dataset, seed=9)
        assert np.array_equal(a.train, b.train)
        assert np.array_equal(a.validation, b.validation)
        assert np.array_equal(a.test, b.test)

    def test_different_seeds_differ(self, small_dataset):
        a = ds.split(small_dataset, seed=1)
        b = ds.split(small_dataset, seed=2)
        assert not np.array_equal(a.train, b.train)

    def test_stratified_within_one_sample_per_class(self, paper_dataset):
        idx = ds.split(paper_dataset, (0.6, 0.1, 0.3), seed=5)
        for c in range(paper_dataset.n_classes):
            class_rows = np.flatnonzero(paper_dataset.labels == c)
            n_c = class_rows.size
            in_train = np.intersect1d(idx.train, class_rows).size
            assert abs(in_train - 0.6 * n_c) <= 1

    def test_insufficient_class_population(self):
        data = _toy_dataset([10, 2])
        with pytest.raises(ValueError, match="insufficient class population"):
            ds.split(data, (0.6, 0.1, 0.3), seed=0)

    def test_bad_fractions_rejected(self, small_dataset):
        with pytest.raises(ValueError, match="sum to 1"):
            ds.split(small_dataset, (0.5, 0.2, 0.2), seed=0)
        with pytest.raises(ValueError, match="non-negative"):
            ds.split(small_dataset, (1.2, -0.1, -0.1), seed=0)

    @given(
        counts=st.lists(st.integers(min_value=3, max_value=40), min_size=1, max_size=5),
        seed=st.integers(min_value=0, max_value=2**32 - 1),
    )
    @settings(max_examples=25, deadline=None)
    def test_parts_partition_all_indices(self, counts, seed):
        data = _toy_dataset(counts)
        idx = ds.split(data, (0.6, 0.1, 0.3), seed=seed)
        merged = np.sort(np.concatenate([idx.train, idx.validation, idx.test]))
        assert np.array_equal(merged, np.arange(data.n_samples))


class TestSplitIndices:
    def test_overlap_rejected(self):
        with pytest.raises(ValueError, match="disjoint"):
            ds.SplitIndices(train=[0, 1], validation=[1], test=[2], seed=0)

    def test_gap_rejected(self):
        with pytest.raises(ValueError, match="disjoint"):
            ds.SplitIndices(train=[0, 1], validation=[3], test=[4], seed=0)


class TestGenerator:
    def test_default_shape(self, paper_shape):
        recordings, data = paper_shape
        assert data.rows.shape == (1000, 8)
        assert data.n_classes == 9
        assert data.class_names[-1] == "NA"
        assert data.negative_class == 8
        assert len(recordings) == 1000
        assert recordings[0].values.shape == (150, 8)

    def test_noiseless_classes_collapse_to_identical_rows(self):
        config = ds.SynthConfig(
            n_classes=3, n_sensors=4, samples_per_material_class=5,
            ambient_samples=5, noise_sigma=0.0, drift_rate=0.0,
            timesteps=30, seed=1,
        )
        _, data = ds.generate_synthetic(config)
        for c in range(data.n_classes):
            rows = data.rows[data.labels == c]
            assert np.all(rows == rows[0])

    def test_determinism_bit_identical(self):
        config = ds.SynthConfig(
            n_classes=3, n_sensors=4, samples_per_material_class=5,
            ambient_samples=5, timesteps=20, seed=42,
        )
        _, a = ds.generate_synthetic(config)
        _, b = ds.generate_synthetic(config)
        assert np.array_equal(a.rows, b.rows)
        assert np.array_equal(a.labels, b.labels)

    def test_voltages_positive_for_log_features(self, paper_shape):
        recordings, data = paper_shape
        assert np.all(data.rows > 0)
        assert all(np.all(r.values > 0) for r in recordings[:10])

    def test_invalid_config_rejected(self):
        with pytest.raises(ValueError):
            ds.SynthConfig(n_sensors=0)
        with pytest.raises(ValueError):
            ds.SynthConfig(noise_sigma=-0.1)
        with pytest.raises(ValueError):
            ds.SynthConfig(n_classes=1)


class TestRecordingType:
    def test_invariants(self):
        with pytest.raises(ValueError, match="T x S"):
            ds.OdourRecording(values=np.zeros(3), baseline=np.zeros(3))
        with pytest.raises(ValueError, match="finite"):
            ds.OdourRecording(values=[[np.nan, 1.0]], baseline=[1.0, 1.0])
        with pytest.raises(ValueError, match="baseline length"):
            ds.OdourRecording(values=[[1.0, 2.0]], baseline=[1.0])

    def test_from_values_estimates_leading_baseline(self):
        values = np.vstack([np.full((5, 2), 1.5), np.full((95, 2), 3.0)])
        rec = ds.OdourRecording.from_values(values)
        np.testing.assert_allclose(rec.baseline, [1.5, 1.5])

    def test_arrays_are_frozen(self):
        rec = ds.OdourRecording(values=[[1.0, 2.0]], baseline=[1.0, 1.0])
        with pytest.raises(ValueError):
            rec.values[0, 0] = 9.0


class TestDatasetCsv:
    def test_round_trip_exact(self, tmp_path, paper_dataset):
        path = tmp_path / "data.csv"
        ds.write_csv(paper_dataset, path)
        back = ds.read_csv(path)
        assert np.array_equal(back.rows, paper_dataset.rows)
        assert np.array_equal(back.labels, paper_dataset.labels)
        assert back.class_names == paper_dataset.class_names
        assert back.negative_class == paper_dataset.negative_class

    def test_ragged_row_names_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("sensor_1,sensor_2,label\n1.0,2.0,A\n1.0,B\n")
        with pytest.raises(ds.CsvFormatError, match="line 3"):
            ds.read_csv(path)

    def test_non_numeric_cell_names_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("sensor_1,label\n1.0,A\nx,B\n")
        with pytest.raises(ds.CsvFormatError, match="line 3: non-numeric"):
            ds.read_csv(path)

    def test_discovers_classes_in_first_appearance_order(self, tmp_path):
        path = tmp_path / "nine.csv"
        lines = ["s1,s2,s3,s4,s5,s6,s7,s8,label"]
        for i in range(9):
            lines.append(",".join(["1.0"] * 8) + f",class{i}")
        path.write_text("\n".join(lines) + "\n")
        data = ds.read_csv(path)
        assert data.n_classes == 9
        assert data.class_names == tuple(f"class{i}" for i in range(9))

    def test_unknown_label_with_pinned_classes(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("sensor_1,label\n1.0,A\n2.0,C\n")
        with pytest.raises(ds.CsvFormatError, match="line 3: unknown label"):
            ds.read_csv(path, class_names=("A", "B"))

    def test_missing_label_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("sensor_1,sensor_2\n1.0,2.0\n")
        with pytest.raises(ds.CsvFormatError, match="header"):
            ds.read_csv(path)

    def test_negative_name_override(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("sensor_1,label\n1.0,fire\n2.0,clean\n")
        data = ds.read_csv(path, negative_name="clean")
        assert data.negative_class == 1
        with pytest.raises(ds.CsvFormatError, match="not found"):
            ds.read_csv(path, negative_name="absent")


class TestRecordingCsv:
    def test_round_trip(self, tmp_path, paper_shape):
        rec = paper_shape[0][0]
        path = tmp_path / "rec.csv"
        ds.write_recording_csv(path, rec.values, rec.baseline, "M1")
        values, baseline, name = ds.read_recording_csv(path)
        assert np.array_equal(values, rec.values)
        assert np.array_equal(baseline, rec.baseline)
        assert name == "M1"

    def test_missing_sidecar_rejected(self, tmp_path):
        path = tmp_path / "rec.csv"
        path.write_text("t,sensor_1\n0,1.0\n")
        with pytest.raises(ds.CsvFormatError, match="sidecar"):
            ds.read_recording_csv(path)
