"""Baseline-correction feature extractors for gas-sensor array voltages.

Five normalizations convert raw volt readings into dimensionless unit-ratio
features, evaluated per time instant across the sensor array:

  RLSSV  log10(v_i) / log10(sum_j v_j^2)
  RLV    log10(v_i) / v_i
  RSSV   v_i / sqrt(sum_j v_j^2)          (unit-norm array vector)
  RV     v_i / v0_i                        (baseline ratio)
  FVC    (v0_i - v_i) / v0_i               (fractional change from baseline)

Logarithms use base 10 throughout (module constant LOG_BASE).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .dataset import LabeledDataset, OdourRecording

LOG_BASE = 10.0


class FeatureDomainError(ValueError):
    """Input violates an extractor's domain (non-positive voltage, zero baseline, ...)."""


class FeatureKind(Enum):
    """The five baseline-correction features, in canonical order."""

    RLSSV = "rlssv"
    RLV = "rlv"
    RSSV = "rssv"
    RV = "rv"
    FVC = "fvc"

    @property
    def needs_baseline(self) -> bool:
        return self in (FeatureKind.RV, FeatureKind.FVC)


def kind_from_name(name: str) -> FeatureKind:
    try:
        return FeatureKind[name.strip().upper()]
    except KeyError:
        valid = ", ".join(k.value for k in FeatureKind)
        raise ValueError(f"unknown feature kind {name!r}; expected one of: {valid}") from None


@dataclass(frozen=True)
class FeatureMatrix:
    """Samples x features matrix of unit-ratio values with feature provenance.

    ``kind`` is one of the five extractors, or None for a fused hybrid, in
    which case ``provenance`` lists the (kind, pc_count) pairs that were
    concatenated. ``log_base`` records the logarithm base for RLSSV/RLV.
    """

    values: np.ndarray
    kind: FeatureKind | None
    provenance: tuple | None = None
    log_base: float | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError("values must be a 2-D matrix")
        if not np.all(np.isfinite(values)):
            raise ValueError("feature values must be finite")
        if self.kind is None and not self.provenance:
            raise ValueError("a hybrid feature matrix must carry provenance")
        if self.kind is FeatureKind.RSSV and values.size:
            norms = np.sqrt(np.einsum("ij,ij->i", values, values))
            if np.max(np.abs(norms - 1.0)) > 1e-12:
                raise ValueError("RSSV rows must have unit L2 norm")
        object.__setattr__(self, "values", values)
        if self.provenance is not None:
            object.__setattr__(self, "provenance", tuple(self.provenance))

    @property
    def is_hybrid(self) -> bool:
        return self.kind is None

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]


def _as_rows(v):
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim == 1:
        return arr[None, :], True
    if arr.ndim == 2:
        return arr, False
    raise ValueError("input must be a vector or a matrix of row vectors")


def _first_bad(mask_rows):
    rows = np.flatnonzero(mask_rows)
    return int(rows[0])


def _require_positive(arr, squeeze, what="voltage"):
    bad = arr <= 0
    if bad.any():
        if squeeze:
            sensor = int(np.flatnonzero(bad[0])[0])
            raise FeatureDomainError(f"log of non-positive {what} at sensor {sensor}")
        row = _first_bad(bad.any(axis=1))
        raise FeatureDomainError(f"log of non-positive {what} at row {row}")


def rlssv(v) -> np.ndarray:
    """Log voltage divided by the log of the array's summed squared voltage."""
    arr, squeeze = _as_rows(v)
    _require_positive(arr, squeeze)
    ssq = np.einsum("ij,ij->i", arr, arr)
    degenerate = np.abs(ssq - 1.0) <= 1e-12
    if degenerate.any():
        row = _first_bad(degenerate)
        where = "" if squeeze else f" at row {row}"
        raise FeatureDomainError(f"degenerate denominator: summed squared voltage is 1{where}")
    out = np.log10(arr) / np.log10(ssq)[:, None]
    return out[0] if squeeze else out


def rlv(v) -> np.ndarray:
    """Log voltage divided by the voltage itself."""
    arr, squeeze = _as_rows(v)
    _require_positive(arr, squeeze)
    out = np.log10(arr) / arr
    return out[0] if squeeze else out


def rssv(v) -> np.ndarray:
    """Voltage divided by the root of the array's summed squared voltage."""
    arr, squeeze = _as_rows(v)
    norms = np.sqrt(np.einsum("ij,ij->i", arr, arr))
    zero = norms == 0
    if zero.any():
        row = _first_bad(zero)
        where = "" if squeeze else f" at row {row}"
        raise FeatureDomainError(f"zero-norm input{where}")
    out = arr / norms[:, None]
    return out[0] if squeeze else out


def _check_baseline(v0, n_sensors):
    base = np.asarray(v0, dtype=np.float64)
    if base.shape != (n_sensors,):
        raise ValueError("baseline length must equal the sensor count")
    if np.any(base == 0):
        sensor = int(np.flatnonzero(base == 0)[0])
        raise FeatureDomainError(f"zero baseline at sensor {sensor}")
    return base


def rv(v, v0) -> np.ndarray:
    """Voltage divided by the baseline voltage, per sensor."""
    arr, squeeze = _as_rows(v)
    base = _check_baseline(v0, arr.shape[1])
    out = arr / base[None, :]
    return out[0] if squeeze else out


def fvc(v, v0bar) -> np.ndarray:
    """Change from the averaged baseline, as a fraction of that baseline.

    Sensors rising above baseline give negative values; classifiers are
    sign-agnostic, so the raw definition is kept.
    """
    arr, squeeze = _as_rows(v)
    base = _check_baseline(v0bar, arr.shape[1])
    out = (base[None, :] - arr) / base[None, :]
    return out[0] if squeeze else out


def apply_kind(values, kind: FeatureKind, baseline=None) -> np.ndarray:
    """Dispatch one extractor over a vector or a matrix of row vectors."""
    if kind is FeatureKind.RLSSV:
        return rlssv(values)
    if kind is FeatureKind.RLV:
        return rlv(values)
    if kind is FeatureKind.RSSV:
        return rssv(values)
    if baseline is None:
        raise ValueError(f"feature {kind.value} requires a baseline")
    if kind is FeatureKind.RV:
        return rv(values, baseline)
    if kind is FeatureKind.FVC:
        return fvc(values, baseline)
    raise ValueError(f"unsupported feature kind: {kind!r}")


def extract_recording(rec: OdourRecording, kind: FeatureKind) -> np.ndarray:
    """Apply one extractor to every time instant of a recording.

    Row t of the result is the extractor applied across the sensor array at
    timestep t; RV and FVC use the recording's stored baseline. Domain
    errors name the offending timestep (row index).
    """
    return apply_kind(rec.values, kind, baseline=rec.baseline)


def featurize_rows(rows, kind: FeatureKind, baseline=None) -> FeatureMatrix:
    """Extract one feature from every sample row of a dataset matrix."""
    values = apply_kind(np.asarray(rows, dtype=np.float64), kind, baseline=baseline)
    log_base = LOG_BASE if kind in (FeatureKind.RLSSV, FeatureKind.RLV) else None
    return FeatureMatrix(values=values, kind=kind, log_base=log_base)


def ambient_baseline(dataset: LabeledDataset) -> np.ndarray:
    """Per-sensor mean of the negative-class (ambient air) rows."""
    if dataset.negative_class is None:
        raise ValueError("dataset has no negative class to estimate a baseline from")
    mask = dataset.labels == dataset.negative_class
    if not mask.any():
        raise ValueError("negative class holds no samples")
    return dataset.rows[mask].mean(axis=0)


def response_point(feature_series, window_fraction=0.1) -> np.ndarray:
    """Column-wise mean over the final window of a T x S series.

    The window spans the last ceil(T * window_fraction) timesteps, where the
    sensor response has settled near its asymptote.
    """
    arr = np.asarray(feature_series, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise ValueError("feature series must be a non-empty T x S matrix")
    if not 0 < window_fraction <= 1:
        raise ValueError("window_fraction must lie in (0, 1]")
    window = math.ceil(arr.shape[0] * window_fraction)
    return arr[-window:].mean(axis=0)
