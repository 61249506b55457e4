"""Principal component analysis with explicit variance accounting.

Covariance PCA (divisor N-1) on unstandardized features. The model keeps
the full eigenvalue ladder as latent / proportion / cumulative columns so
variance tables can be reported alongside truncated scores.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PcaModel:
    """Fitted PCA: column means, orthonormal loadings, and the variance ladder.

    Loading columns are unit eigenvectors in descending eigenvalue order,
    signed so each column's largest-magnitude entry is non-negative.
    """

    mean: np.ndarray
    loadings: np.ndarray
    latent: np.ndarray
    proportion: np.ndarray
    cumulative: np.ndarray

    @property
    def n_features(self) -> int:
        return self.mean.shape[0]


def fit(data) -> PcaModel:
    """Eigendecompose the sample covariance of an N x D matrix (N >= 2)."""
    X = np.asarray(data, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("data must be a 2-D matrix")
    if X.shape[0] < 2:
        raise ValueError("insufficient samples: PCA needs at least 2 rows")
    if not np.all(np.isfinite(X)):
        raise ValueError("data must be finite")
    mean = X.mean(axis=0)
    centered = X - mean
    cov = centered.T @ centered / (X.shape[0] - 1)
    cov = (cov + cov.T) / 2.0
    eigvals, eigvecs = np.linalg.eigh(cov)
    latent = eigvals[::-1].copy()
    loadings = eigvecs[:, ::-1].copy()
    latent[latent < 0] = 0.0
    for col in range(loadings.shape[1]):
        pivot = int(np.argmax(np.abs(loadings[:, col])))
        if loadings[pivot, col] < 0:
            loadings[:, col] = -loadings[:, col]
    total = latent.sum()
    if total <= 0:
        raise ValueError("zero total variance: data has no spread")
    proportion = latent / total
    cumulative = np.cumsum(proportion)
    return PcaModel(
        mean=mean,
        loadings=loadings,
        latent=latent,
        proportion=proportion,
        cumulative=cumulative,
    )


def transform(model: PcaModel, data, pc_count: int) -> np.ndarray:
    """Project rows onto the leading ``pc_count`` components.

    scores = (data - mean) @ loadings[:, :pc_count]
    """
    X = np.asarray(data, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != model.n_features:
        raise ValueError(
            f"dimension mismatch: model expects {model.n_features} columns, got {X.shape[1]}"
        )
    if not 1 <= pc_count <= model.n_features:
        raise ValueError(f"pc_count must lie in [1, {model.n_features}]")
    return (X - model.mean) @ model.loadings[:, :pc_count]


def variance_table(model: PcaModel):
    """Rows of (component index, latent, proportion, cumulative), 1-indexed."""
    return [
        (i + 1, float(model.latent[i]), float(model.proportion[i]), float(model.cumulative[i]))
        for i in range(model.n_features)
    ]


def write_variance_csv(model: PcaModel, path) -> None:
    """Serialize the variance table as ``pc,latent,proportion,cumulative``."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("pc,latent,proportion,cumulative\n")
        for pc, latent, proportion, cumulative in variance_table(model):
            fh.write(f"{pc},{latent!r},{proportion!r},{cumulative!r}\n")
