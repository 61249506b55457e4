import numpy as np
import pytest

from firenose import knn


def brute_force_oracle(patterns, labels, k, query):
    """Independent re-statement of the tie rules via a full python sort."""
    ranked = sorted(
        range(len(patterns)),
        key=lambda j: (float(np.sum((query - patterns[j]) ** 2)), j),
    )[:k]
    votes = {}
    first = {}
    for pos, j in enumerate(ranked):
        label = int(labels[j])
        votes[label] = votes.get(label, 0) + 1
        first.setdefault(label, pos)
    top = max(votes.values())
    return min((label for label, v in votes.items() if v == top), key=first.get)


class TestFit:
    def test_valid_k_values(self, rng):
        X = rng.normal(size=(20, 4))
        y = rng.integers(0, 3, 20)
        assert knn.fit(X, y, k=3).k == 3
        assert knn.fit(X, y, k=1).k == 1
        assert knn.fit(X, y, k=20).k == 20

    def test_k_out_of_range(self, rng):
        X = rng.normal(size=(5, 2))
        y = np.zeros(5, dtype=int)
        with pytest.raises(ValueError, match="k out of range"):
            knn.fit(X, y, k=6)
        with pytest.raises(ValueError, match="k out of range"):
            knn.fit(X, y, k=0)


class TestClassify:
    def test_training_pattern_returns_own_label(self, rng):
        X = rng.normal(size=(15, 3))
        y = rng.integers(0, 4, 15)
        model = knn.fit(X, y, k=1)
        for i in (0, 7, 14):
            assert knn.classify(model, X[i]) == y[i]

    def test_five_point_line_fixture(self):
        X = np.array([[0.0], [1.0], [2.0], [10.0], [11.0]])
        y = np.array([0, 0, 1, 1, 1])  # A A B B B
        model = knn.fit(X, y, k=3)
        # Neighbours of 1.4: 1.0 (A), 2.0 (B), 0.0 (A) -> A wins 2:1.
        assert knn.classify(model, np.array([1.4])) == 0

    def test_matches_brute_force_oracle(self, rng):
        X = rng.normal(size=(100, 5))
        y = rng.integers(0, 4, 100)
        queries = rng.normal(size=(200, 5))
        model = knn.fit(X, y, k=3)
        got = knn.predict(model, queries)
        expected = [brute_force_oracle(X, y, 3, q) for q in queries]
        assert list(got) == expected

    def test_distance_tie_prefers_lower_training_index(self):
        X = np.array([[1.0], [-1.0], [5.0]])
        y = np.array([2, 1, 0])
        model = knn.fit(X, y, k=1)
        assert knn.classify(model, np.array([0.0])) == 2  # index 0 beats index 1

    def test_vote_tie_prefers_class_of_nearest_member(self):
        X = np.array([[1.0], [2.0], [3.0], [4.0]])
        y = np.array([1, 0, 1, 0])
        model = knn.fit(X, y, k=4)
        # Two votes each; nearest neighbour of the query is class 1.
        assert knn.classify(model, np.array([0.5])) == 1

    def test_dimension_mismatch(self, rng):
        model = knn.fit(rng.normal(size=(5, 3)), np.zeros(5, dtype=int), k=1)
        with pytest.raises(ValueError, match="dimension mismatch"):
            knn.classify(model, np.ones(2))

    def test_rescaling_invariance(self, rng):
        X = rng.normal(size=(40, 3))
        y = rng.integers(0, 3, 40)
        queries = rng.normal(size=(25, 3))
        base = knn.predict(knn.fit(X, y, k=3), queries)
        for alpha in (0.01, 7.0, 250.0):
            scaled = knn.predict(knn.fit(alpha * X, y, k=3), alpha * queries)
            assert np.array_equal(scaled, base)

    def test_k1_agrees_with_single_pattern_pnn(self, rng):
        from firenose import pnn

        patterns = rng.normal(size=(5, 4))
        labels = np.arange(5)
        queries = rng.normal(size=(30, 4))
        nn = knn.fit(patterns, labels, k=1)
        parzen = pnn.fit(patterns, labels, spread=0.4)
        assert np.array_equal(knn.predict(nn, queries), pnn.predict(parzen, queries))


class TestSerialization:
    def test_round_trip(self, tmp_path, rng):
        X = rng.normal(size=(12, 3))
        y = rng.integers(0, 2, 12)
        model = knn.fit(X, y, k=3, class_names=("no", "yes"))
        path = tmp_path / "knn.npz"
        knn.save_model(model, path)
        back = knn.load_model(path)
        assert np.array_equal(back.patterns, model.patterns)
        assert np.array_equal(back.labels, model.labels)
        assert back.k == 3
        assert back.class_names == ("no", "yes")
