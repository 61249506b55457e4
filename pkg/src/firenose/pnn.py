"""Probabilistic neural network: Gaussian-kernel class density classifier.

Each class density is the mean of isotropic Gaussian kernels centered at
that class's training patterns, with one shared spread sigma. Decisions
weight densities by class priors and misclassification costs. There is no
iterative training; fitting stores the patterns verbatim.

Kernel sums are evaluated in the log domain (log-sum-exp) through the
firenose._kernels backend, so scores stay finite even at small spreads
where individual kernels underflow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .features import FeatureMatrix

DEFAULT_SPREAD = 0.08
DEFAULT_TOLERANCE = 0.001
DEFAULT_SPREAD_GRID = tuple(round(0.01 * i, 2) for i in range(1, 21))

_MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class PnnModel:
    """Stored training patterns grouped by class, plus decision parameters.

    ``patterns`` holds all training vectors ordered by class;
    ``class_starts`` gives the K+1 block offsets. ``tolerance`` is the
    minimum normalized-score margin below which a decision is flagged
    ambiguous.
    """

    patterns: np.ndarray
    class_starts: np.ndarray
    spread: float
    priors: np.ndarray
    costs: np.ndarray
    tolerance: float
    class_names: tuple | None = None

    @property
    def n_classes(self) -> int:
        return self.class_starts.shape[0] - 1

    @property
    def input_dim(self) -> int:
        return self.patterns.shape[1]

    @property
    def class_sizes(self) -> np.ndarray:
        return np.diff(self.class_starts)

    @property
    def n_patterns(self) -> int:
        return self.patterns.shape[0]

    def class_patterns(self, class_id: int) -> np.ndarray:
        return self.patterns[self.class_starts[class_id] : self.class_starts[class_id + 1]]


@dataclass(frozen=True)
class PnnDecision:
    """Outcome of one classification query.

    ``scores`` are the prior- and cost-weighted class densities normalized
    to sum 1; ``margin`` is top-1 minus top-2 of those normalized scores.
    """

    predicted_class: int
    scores: np.ndarray
    margin: float
    ambiguous: bool


def _as_matrix(data) -> np.ndarray:
    if isinstance(data, FeatureMatrix):
        data = data.values
    X = np.asarray(data, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("training data must be a 2-D matrix")
    return X


def fit(train, labels, spread=DEFAULT_SPREAD, priors=None, costs=None,
        tolerance=DEFAULT_TOLERANCE, n_classes=None, class_names=None) -> PnnModel:
    """Store training patterns per class; no iterative training happens.

    Priors default to uniform and costs to 1. Every declared class must
    contribute at least one pattern.
    """
    X = _as_matrix(train)
    y = np.asarray(labels, dtype=np.int64)
    if y.ndim != 1 or y.shape[0] != X.shape[0]:
        raise ValueError("labels must be a vector with one entry per training row")
    if y.size == 0:
        raise ValueError("training set must not be empty")
    if spread <= 0:
        raise ValueError("spread must be positive")
    if class_names is not None and n_classes is None:
        n_classes = len(class_names)
    k = int(n_classes) if n_classes is not None else int(y.max()) + 1
    if y.min() < 0 or y.max() >= k:
        raise ValueError(f"labels must lie in [0, {k})")
    sizes = np.bincount(y, minlength=k)
    empty = np.flatnonzero(sizes == 0)
    if empty.size:
        raise ValueError(f"empty class: class {int(empty[0])} has no training patterns")

    order = np.argsort(y, kind="stable")
    patterns = np.ascontiguousarray(X[order])
    starts = np.concatenate(([0], np.cumsum(sizes))).astype(np.intp)

    if priors is None:
        priors = np.full(k, 1.0 / k)
    else:
        priors = np.asarray(priors, dtype=np.float64)
        if priors.shape != (k,) or np.any(priors < 0) or abs(priors.sum() - 1.0) > 1e-9:
            raise ValueError("priors must be non-negative and sum to 1")
    if costs is None:
        costs = np.ones(k)
    else:
        costs = np.asarray(costs, dtype=np.float64)
        if costs.shape != (k,) or np.any(costs <= 0):
            raise ValueError("costs must be positive")
    if tolerance < 0:
        raise ValueError("tolerance must be non-negative")
    return PnnModel(
        patterns=patterns,
        class_starts=starts,
        spread=float(spread),
        priors=priors,
        costs=costs,
        tolerance=float(tolerance),
        class_names=tuple(class_names) if class_names is not None else None,
    )


def _check_query(model: PnnModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != model.input_dim:
        raise ValueError(
            f"dimension mismatch: model expects {model.input_dim} inputs"
        )
    return X


def _log_kernel_means(model: PnnModel, X: np.ndarray) -> np.ndarray:
    """log of the per-class mean kernel sum, without the shared Gaussian constant."""
    sq = _kernels.sq_dists(X, model.patterns)
    log_sums = _kernels.class_log_sums(sq, model.class_starts, 1.0 / (2.0 * model.spread**2))
    return log_sums - np.log(model.class_sizes)


def _log_scores(model: PnnModel, X: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        weight = np.log(model.priors) + np.log(model.costs)
    return _log_kernel_means(model, X) + weight


def density(model: PnnModel, class_id: int, x) -> float:
    """Class-conditional probability density at ``x``.

    Mean of Gaussian kernels over the class's patterns, normalized by
    (2*pi)^(n/2) * sigma^n so the estimate integrates to 1.
    """
    if not 0 <= class_id < model.n_classes:
        raise ValueError(f"class_id must lie in [0, {model.n_classes})")
    X = _check_query(model, x)
    n = model.input_dim
    log_const = -0.5 * n * np.log(2.0 * np.pi) - n * np.log(model.spread)
    log_f = _log_kernel_means(model, X)[:, class_id] + log_const
    out = np.exp(log_f)
    return float(out[0]) if np.asarray(x).ndim == 1 else out


def _nearest_pattern_class(model: PnnModel, x: np.ndarray) -> int:
    sq = _kernels.sq_dists(x[None, :], model.patterns)[0]
    j = int(np.argmin(sq))
    return int(np.searchsorted(model.class_starts, j, side="right") - 1)


def classify(model: PnnModel, x) -> PnnDecision:
    """Prior- and cost-weighted density decision for one query vector.

    Ties resolve to the lowest class index. Decisions whose normalized-score
    margin falls below the model tolerance are flagged ambiguous but still
    return the argmax class.
    """
    X = _check_query(model, np.asarray(x, dtype=np.float64))
    if X.shape[0] != 1:
        raise ValueError("classify takes a single query vector; use predict for batches")
    s = _log_scores(model, X)[0]
    finite = np.isfinite(s)
    if not finite.any():
        # Defensive: log-domain scores stay finite for finite inputs.
        fallback = _nearest_pattern_class(model, X[0])
        scores = np.zeros(model.n_classes)
        scores[fallback] = 1.0
        return PnnDecision(predicted_class=fallback, scores=scores, margin=0.0, ambiguous=True)
    z = np.where(finite, s, -np.inf)
    top = z.max()
    weights = np.exp(z - top)
    scores = weights / weights.sum()
    predicted = int(np.argmax(scores))
    if model.n_classes == 1:
        margin = 1.0
    else:
        two = np.sort(scores)[-2:]
        margin = float(two[1] - two[0])
    return PnnDecision(
        predicted_class=predicted,
        scores=scores,
        margin=margin,
        ambiguous=margin < model.tolerance,
    )


def predict(model: PnnModel, X) -> np.ndarray:
    """Batch argmax classification; ties resolve to the lowest class index."""
    Q = _check_query(model, X)
    return np.argmax(_log_scores(model, Q), axis=1)


def pattern_unit_form(model: PnnModel, x_unit) -> np.ndarray:
    """Dot-product pattern-unit activations for unit-norm inputs.

    Returns exp((x . w_j - 1) / sigma^2) for every stored pattern w_j. For
    unit vectors this equals the Gaussian kernel exp(-|x - w|^2 / (2 sigma^2))
    because |x - w|^2 = 2 - 2 x . w.
    """
    x = np.asarray(x_unit, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != model.input_dim:
        raise ValueError(f"dimension mismatch: model expects {model.input_dim} inputs")
    if abs(np.linalg.norm(x) - 1.0) > 1e-6:
        raise ValueError("query must have unit L2 norm")
    norms = np.linalg.norm(model.patterns, axis=1)
    if np.max(np.abs(norms - 1.0)) > 1e-6:
        raise ValueError("stored patterns must have unit L2 norm")
    z_in = model.patterns @ x
    return np.exp((z_in - 1.0) / model.spread**2)


def accuracy_pct(predictions, actuals) -> float:
    predictions = np.asarray(predictions)
    actuals = np.asarray(actuals)
    if predictions.shape != actuals.shape or predictions.size == 0:
        raise ValueError("predictions and actuals must be equal-length non-empty vectors")
    return float(np.mean(predictions == actuals) * 100.0)


def spread_sweep(train_x, train_y, val_x, val_y, candidates=DEFAULT_SPREAD_GRID,
                 **fit_kwargs):
    """Pick the spread maximizing validation accuracy.

    Returns (best sigma, {sigma: accuracy percent}); ties go to the
    smallest sigma.
    """
    candidates = [float(s) for s in candidates]
    if not candidates:
        raise ValueError("candidate spread list must not be empty")
    if any(s <= 0 for s in candidates):
        raise ValueError("candidate spreads must be positive")
    val_x = np.asarray(val_x, dtype=np.float64)
    if val_x.size == 0:
        raise ValueError("empty validation set")
    accuracies = {}
    for s in candidates:
        model = fit(train_x, train_y, spread=s, **fit_kwargs)
        accuracies[s] = accuracy_pct(predict(model, val_x), val_y)
    best_acc = max(accuracies.values())
    best = min(s for s, a in accuracies.items() if a == best_acc)
    return best, accuracies


def save_model(model: PnnModel, path) -> None:
    """Serialize a model to .npz; round-trips bit-exactly."""
    names = model.class_names if model.class_names is not None else ()
    np.savez(
        path,
        format_version=_MODEL_FORMAT_VERSION,
        model_kind="pnn",
        patterns=model.patterns,
        class_starts=np.asarray(model.class_starts, dtype=np.int64),
        spread=model.spread,
        priors=model.priors,
        costs=model.costs,
        tolerance=model.tolerance,
        class_names=np.asarray(names, dtype=str),
    )


def load_model(path) -> PnnModel:
    with np.load(path, allow_pickle=False) as data:
        if int(data["format_version"]) != _MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model format version: {data['format_version']}")
        if str(data["model_kind"]) != "pnn":
            raise ValueError(f"not a pnn model file: kind={data['model_kind']}")
        names = tuple(str(n) for n in data["class_names"]) or None
        return PnnModel(
            patterns=data["patterns"],
            class_starts=data["class_starts"].astype(np.intp),
            spread=float(data["spread"]),
            priors=data["priors"],
            costs=data["costs"],
            tolerance=float(data["tolerance"]),
            class_names=names,
        )
