"""Confusion matrices, the fire-detection binary collapse, and rate metrics.

Confusion counts are indexed [predicted][actual]. The binary collapse maps a
K-class matrix onto TP/FP/TN/FN with the ambient-air class as the negative
(non-fire) condition: correct material decisions are true positives, material
samples called ambient are false negatives, and every other error (material
confused with another material, or ambient raised as material) is a false
alarm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class UndefinedMetricError(ValueError):
    """A metric's denominator is zero; refusing to report a silent 0."""


@dataclass(frozen=True)
class ConfusionMatrix:
    """K x K prediction counts, rows = predicted class, columns = actual class."""

    counts: np.ndarray
    class_names: tuple | None = None

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise ValueError("counts must be a square matrix")
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        if self.class_names is not None and len(self.class_names) != counts.shape[0]:
            raise ValueError("class_names length must match the matrix size")
        object.__setattr__(self, "counts", counts)
        if self.class_names is not None:
            object.__setattr__(self, "class_names", tuple(self.class_names))

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class BinaryCollapse:
    """TP/FP/TN/FN quadruple of a fire-vs-ambient reading of a confusion matrix."""

    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "fp", "tn", "fn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class RepetitionStats:
    """Minimum / maximum / mean accuracy over repeated runs, in percent."""

    minimum: float
    maximum: float
    mean: float
    n_repetitions: int

    def __post_init__(self):
        if not (self.minimum - 1e-9 <= self.mean <= self.maximum + 1e-9):
            raise ValueError("mean must lie between minimum and maximum")
        if self.n_repetitions < 1:
            raise ValueError("n_repetitions must be positive")


def confusion(predictions, actuals, n_classes=None, class_names=None) -> ConfusionMatrix:
    """Count (predicted, actual) pairs into a K x K matrix."""
    pred = np.asarray(predictions, dtype=np.int64)
    act = np.asarray(actuals, dtype=np.int64)
    if pred.shape != act.shape or pred.ndim != 1:
        raise ValueError("predictions and actuals must be equal-length vectors")
    if class_names is not None and n_classes is None:
        n_classes = len(class_names)
    if n_classes is None:
        raise ValueError("n_classes (or class_names) is required")
    k = int(n_classes)
    if pred.size and (min(pred.min(), act.min()) < 0 or max(pred.max(), act.max()) >= k):
        raise ValueError(f"labels must lie in [0, {k})")
    counts = np.zeros((k, k), dtype=np.int64)
    np.add.at(counts, (pred, act), 1)
    return ConfusionMatrix(counts=counts, class_names=class_names)


def binary_collapse(cm: ConfusionMatrix, negative_class: int) -> BinaryCollapse:
    """Collapse a K-class matrix onto fire-detection TP/FP/TN/FN counts."""
    k = cm.n_classes
    if k < 2:
        raise ValueError("binary collapse needs at least 2 classes")
    if not 0 <= negative_class < k:
        raise ValueError(f"negative_class must lie in [0, {k})")
    counts = cm.counts
    neg = negative_class
    tn = int(counts[neg, neg])
    fn = int(counts[neg, :].sum()) - tn
    material = np.arange(k) != neg
    tp = int(np.diag(counts)[material].sum())
    fp = cm.total - tp - tn - fn
    return BinaryCollapse(tp=tp, fp=fp, tn=tn, fn=fn)


def sensitivity(bc: BinaryCollapse) -> float:
    """Correctly detected fires over all actual fires, percent."""
    if bc.tp + bc.fn == 0:
        raise UndefinedMetricError("sensitivity undefined: no actual positive decisions")
    return bc.tp / (bc.tp + bc.fn) * 100.0


def specificity(bc: BinaryCollapse) -> float:
    """Correctly rejected non-fires over all actual non-fires, percent."""
    if bc.tn + bc.fp == 0:
        raise UndefinedMetricError("specificity undefined: no actual negative decisions")
    return bc.tn / (bc.tn + bc.fp) * 100.0


def accuracy(bc: BinaryCollapse) -> float:
    """Correct decisions over all decisions, percent."""
    if bc.total == 0:
        raise UndefinedMetricError("accuracy undefined: no decisions")
    return (bc.tp + bc.tn) / bc.total * 100.0


def per_class_accuracy(cm: ConfusionMatrix) -> np.ndarray:
    """Recall of each class (diagonal over actual-column sum), percent."""
    column_sums = cm.counts.sum(axis=0)
    empty = np.flatnonzero(column_sums == 0)
    if empty.size:
        name = (
            cm.class_names[empty[0]] if cm.class_names is not None else f"class {int(empty[0])}"
        )
        raise UndefinedMetricError(f"per-class accuracy undefined: {name} has no actual samples")
    return np.diag(cm.counts) / column_sums * 100.0


def repetition_stats(accuracies) -> RepetitionStats:
    """Min / max / arithmetic-mean summary of per-repetition accuracies."""
    values = np.asarray(list(accuracies), dtype=np.float64)
    if values.size == 0:
        raise ValueError("accuracy list must not be empty")
    return RepetitionStats(
        minimum=float(values.min()),
        maximum=float(values.max()),
        mean=float(values.mean()),
        n_repetitions=int(values.size),
    )


def write_confusion_csv(cm: ConfusionMatrix, path, recall_column=True) -> None:
    """Serialize rows-predicted / columns-actual counts, plus per-class recall.

    Classes with no actual samples get an empty recall cell instead of an
    error so partially populated matrices stay serializable.
    """
    names = cm.class_names or tuple(f"class_{i}" for i in range(cm.n_classes))
    column_sums = cm.counts.sum(axis=0)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        header = ["predicted"] + list(names)
        if recall_column:
            header.append("accuracy_pct")
        fh.write(",".join(header) + "\n")
        for i, name in enumerate(names):
            cells = [name] + [str(int(c)) for c in cm.counts[i]]
            if recall_column:
                if column_sums[i] > 0:
                    cells.append(repr(float(cm.counts[i, i] / column_sums[i] * 100.0)))
                else:
                    cells.append("")
            fh.write(",".join(cells) + "\n")


def read_confusion_csv(path) -> ConfusionMatrix:
    """Read a confusion matrix written by write_confusion_csv (recall column optional)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line for line in fh.read().splitlines() if line.strip()]
    if not lines:
        raise ValueError(f"{path}: empty confusion file")
    header = lines[0].split(",")
    if header[0] != "predicted" or len(header) < 2:
        raise ValueError(f"{path}: header must start with 'predicted'")
    has_recall = header[-1] == "accuracy_pct"
    names = header[1 : -1 if has_recall else None]
    k = len(names)
    if len(lines) - 1 != k:
        raise ValueError(f"{path}: expected {k} rows, got {len(lines) - 1}")
    counts = np.zeros((k, k), dtype=np.int64)
    for i, line in enumerate(lines[1:]):
        cells = line.split(",")
        expected = 1 + k + (1 if has_recall else 0)
        if len(cells) != expected:
            raise ValueError(f"{path}: row {i + 1}: expected {expected} cells")
        if cells[0] != names[i]:
            raise ValueError(f"{path}: row {i + 1}: row order must match the header")
        counts[i] = [int(c) for c in cells[1 : k + 1]]
    return ConfusionMatrix(counts=counts, class_names=tuple(names))
