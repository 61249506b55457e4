import numpy as np
import pytest

from firenose import pca

# Published variance ladder for the baseline-ratio feature on an 8-sensor
# array: eigenvalues with their proportion and cumulative columns.
REFERENCE_LATENT = [0.1064, 0.0474, 0.0335, 0.0144, 0.0096, 0.0073, 0.0019, 0.0007]
REFERENCE_PROPORTION = [0.4813, 0.2141, 0.1517, 0.0650, 0.0435, 0.0329, 0.0085, 0.0030]
REFERENCE_CUMULATIVE = [0.4813, 0.6954, 0.8471, 0.9121, 0.9556, 0.9886, 0.9970, 1.0000]


def dataset_with_covariance(eigenvalues, n_samples=60, seed=5):
    """Rows whose sample covariance has exactly the given eigenvalue ladder."""
    eigenvalues = np.asarray(eigenvalues, dtype=np.float64)
    d = eigenvalues.size
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(n_samples, d))
    z -= z.mean(axis=0)
    u, _, _ = np.linalg.svd(z, full_matrices=False)
    whitened = u * np.sqrt(n_samples - 1)  # exact identity sample covariance
    q, _ = np.linalg.qr(rng.normal(size=(d, d)))
    return whitened @ np.diag(np.sqrt(eigenvalues)) @ q.T + rng.normal(size=d)


def correlated_data(n=200, d=8, seed=3):
    rng = np.random.default_rng(seed)
    mixing = rng.normal(size=(d, d))
    return rng.normal(size=(n, d)) @ mixing + rng.normal(size=d)


class TestFit:
    def test_reference_ladder_reproduced(self):
        model = pca.fit(dataset_with_covariance(REFERENCE_LATENT))
        np.testing.assert_allclose(model.latent, REFERENCE_LATENT, rtol=1e-9)
        np.testing.assert_allclose(model.proportion, REFERENCE_PROPORTION, atol=5e-4)
        np.testing.assert_allclose(model.cumulative, REFERENCE_CUMULATIVE, atol=5e-4)

    def test_cumulative_is_running_sum_ending_at_one(self):
        for data in (correlated_data(), dataset_with_covariance(REFERENCE_LATENT)):
            model = pca.fit(data)
            np.testing.assert_allclose(model.cumulative, np.cumsum(model.proportion), atol=1e-12)
            assert model.cumulative[-1] == pytest.approx(1.0, abs=1e-9)

    def test_constant_column_gives_zero_eigenvalue(self, rng):
        data = rng.normal(size=(50, 4))
        data[:, 2] = 7.7
        model = pca.fit(data)
        assert model.latent[-1] == pytest.approx(0.0, abs=1e-12)
        assert model.proportion[-1] == pytest.approx(0.0, abs=1e-12)

    def test_diagonal_line_fixture(self, rng):
        t = rng.normal(size=300)
        data = np.column_stack([t, t]) + rng.normal(scale=1e-3, size=(300, 2))
        model = pca.fit(data)
        np.testing.assert_allclose(np.abs(model.loadings[:, 0]), np.sqrt(0.5), atol=1e-3)
        assert model.loadings[:, 0].min() > 0  # sign convention
        assert model.proportion[0] >= 0.99

    def test_insufficient_samples(self):
        with pytest.raises(ValueError, match="insufficient samples"):
            pca.fit(np.ones((1, 3)))

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError, match="finite"):
            pca.fit(np.array([[1.0, np.nan], [2.0, 3.0]]))

    def test_sign_convention_largest_entry_non_negative(self):
        model = pca.fit(correlated_data())
        for col in range(model.n_features):
            pivot = np.argmax(np.abs(model.loadings[:, col]))
            assert model.loadings[pivot, col] >= 0


class TestTransform:
    def test_mean_row_maps_to_zero(self):
        model = pca.fit(correlated_data())
        scores = pca.transform(model, model.mean, model.n_features)
        np.testing.assert_allclose(scores, 0.0, atol=1e-9)

    def test_full_rank_reconstruction(self):
        data = correlated_data()
        model = pca.fit(data)
        scores = pca.transform(model, data, data.shape[1])
        np.testing.assert_allclose(scores @ model.loadings.T + model.mean, data, atol=1e-9)

    def test_single_component_matches_direct_projection(self, rng):
        t = rng.normal(size=100)
        data = np.column_stack([t, t]) + rng.normal(scale=1e-4, size=(100, 2))
        model = pca.fit(data)
        scores = pca.transform(model, data, 1)[:, 0]
        direction = model.loadings[:, 0]
        expected = np.array([np.dot(row - model.mean, direction) for row in data])
        np.testing.assert_allclose(scores, expected, atol=1e-9)

    def test_k_out_of_range(self):
        model = pca.fit(correlated_data())
        with pytest.raises(ValueError, match="pc_count"):
            pca.transform(model, correlated_data(), 9)
        with pytest.raises(ValueError, match="pc_count"):
            pca.transform(model, correlated_data(), 0)

    def test_dimension_mismatch(self):
        model = pca.fit(correlated_data())
        with pytest.raises(ValueError, match="dimension mismatch"):
            pca.transform(model, np.ones((3, 5)), 2)


class TestVarianceTable:
    def test_rows_are_one_indexed_descending(self):
        model = pca.fit(correlated_data(d=10))
        table = pca.variance_table(model)
        assert len(table) == 10
        assert [row[0] for row in table] == list(range(1, 11))
        latents = [row[1] for row in table]
        assert latents == sorted(latents, reverse=True)
        assert table[-1][3] == pytest.approx(1.0, abs=1e-9)

    def test_isotropic_proportions_near_uniform(self, rng):
        data = rng.normal(size=(20000, 5))
        model = pca.fit(data)
        np.testing.assert_allclose(model.proportion, 0.2, atol=0.05)

    def test_single_feature(self, rng):
        model = pca.fit(rng.normal(size=(30, 1)))
        assert pca.variance_table(model) == [(1, pytest.approx(model.latent[0]), 1.0, 1.0)]

    def test_csv_layout(self, tmp_path):
        model = pca.fit(correlated_data(d=3))
        path = tmp_path / "variance.csv"
        pca.write_variance_csv(model, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "pc,latent,proportion,cumulative"
        assert len(lines) == 4
        assert lines[1].split(",")[0] == "1"


class TestNumericInvariants:
    def test_latent_sums_to_trace(self):
        data = correlated_data()
        model = pca.fit(data)
        centered = data - data.mean(axis=0)
        trace = np.trace(centered.T @ centered / (data.shape[0] - 1))
        assert model.latent.sum() == pytest.approx(trace, rel=1e-9)

    def test_loadings_orthonormal(self):
        model = pca.fit(correlated_data())
        gram = model.loadings.T @ model.loadings
        np.testing.assert_allclose(gram, np.eye(model.n_features), atol=1e-9)

    def test_scores_decorrelated(self):
        data = correlated_data()
        model = pca.fit(data)
        scores = pca.transform(model, data, data.shape[1])
        cov = np.cov(scores, rowvar=False)
        off = cov - np.diag(np.diag(cov))
        assert np.max(np.abs(off)) < 1e-6 * model.latent[0]

    def test_translation_invariance(self):
        data = correlated_data()
        shift = np.full(data.shape[1], 13.7)
        base = pca.transform(pca.fit(data), data, 3)
        moved = pca.transform(pca.fit(data + shift), data + shift, 3)
        np.testing.assert_allclose(moved, base, atol=1e-9)

    def test_truncated_reconstruction_error_matches_tail_eigenvalues(self):
        data = correlated_data()
        model = pca.fit(data)
        k = 3
        scores = pca.transform(model, data, k)
        recon = scores @ model.loadings[:, :k].T + model.mean
        err = np.sum((data - recon) ** 2)
        expected = model.latent[k:].sum() * (data.shape[0] - 1)
        assert err == pytest.approx(expected, rel=1e-6)
