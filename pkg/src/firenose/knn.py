"""Brute-force k-nearest-neighbour baseline classifier.

Euclidean distance, majority vote. Deterministic tie rules: equal distances
order by lower training index, and vote ties resolve to the class of the
nearest member among the tied classes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .features import FeatureMatrix

_MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class KnnModel:
    patterns: np.ndarray
    labels: np.ndarray
    k: int
    class_names: tuple | None = None


def fit(train, labels, k=3, class_names=None) -> KnnModel:
    """Store the training set verbatim; k must lie in [1, n_train]."""
    if isinstance(train, FeatureMatrix):
        train = train.values
    X = np.ascontiguousarray(train, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if X.ndim != 2:
        raise ValueError("training data must be a 2-D matrix")
    if y.ndim != 1 or y.shape[0] != X.shape[0]:
        raise ValueError("labels must be a vector with one entry per training row")
    if not 1 <= k <= X.shape[0]:
        raise ValueError(f"k out of range: must lie in [1, {X.shape[0]}]")
    return KnnModel(
        patterns=X,
        labels=y,
        k=int(k),
        class_names=tuple(class_names) if class_names is not None else None,
    )


def _vote(neighbor_labels) -> int:
    # neighbor_labels arrive nearest-first; ties keep that order.
    counts = {}
    first_seen = {}
    for position, label in enumerate(neighbor_labels):
        label = int(label)
        counts[label] = counts.get(label, 0) + 1
        first_seen.setdefault(label, position)
    top = max(counts.values())
    tied = [label for label, n in counts.items() if n == top]
    return min(tied, key=lambda label: first_seen[label])


def predict(model: KnnModel, X) -> np.ndarray:
    """Majority vote among the k nearest training patterns, per query row."""
    Q = np.asarray(X, dtype=np.float64)
    single = Q.ndim == 1
    if single:
        Q = Q[None, :]
    if Q.ndim != 2 or Q.shape[1] != model.patterns.shape[1]:
        raise ValueError(
            f"dimension mismatch: model expects {model.patterns.shape[1]} inputs"
        )
    sq = _kernels.sq_dists(Q, model.patterns)
    # Stable argsort realizes the lower-training-index rule for distance ties.
    order = np.argsort(sq, axis=1, kind="stable")[:, : model.k]
    out = np.fromiter(
        (_vote(model.labels[row]) for row in order), dtype=np.int64, count=order.shape[0]
    )
    return out


def classify(model: KnnModel, x) -> int:
    """Class id for a single query vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("classify takes a single query vector; use predict for batches")
    return int(predict(model, x)[0])


def save_model(model: KnnModel, path) -> None:
    names = model.class_names if model.class_names is not None else ()
    np.savez(
        path,
        format_version=_MODEL_FORMAT_VERSION,
        model_kind="knn",
        patterns=model.patterns,
        labels=model.labels,
        k=model.k,
        class_names=np.asarray(names, dtype=str),
    )


def load_model(path) -> KnnModel:
    with np.load(path, allow_pickle=False) as data:
        if int(data["format_version"]) != _MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model format version: {data['format_version']}")
        if str(data["model_kind"]) != "knn":
            raise ValueError(f"not a knn model file: kind={data['model_kind']}")
        names = tuple(str(n) for n in data["class_names"]) or None
        return KnnModel(
            patterns=data["patterns"],
            labels=data["labels"],
            k=int(data["k"]),
            class_names=names,
        )
