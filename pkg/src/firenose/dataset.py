"""Dataset containers, stratified splitting, CSV schemas, and a synthetic odour generator.

Gas-sensor recordings are timesteps x sensors voltage matrices; a labeled
dataset holds one response vector per recording. The synthetic generator
stands in for real electronic-nose measurements and is fully deterministic
for a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

AMBIENT_NAME = "NA"
DEFAULT_FRACTIONS = (0.6, 0.1, 0.3)


class CsvFormatError(ValueError):
    """Malformed dataset or recording CSV file."""


def _frozen_array(values, dtype=np.float64):
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class OdourRecording:
    """One sensor-array recording: a T x S voltage matrix plus per-sensor baseline.

    ``baseline`` is the averaged ambient-air voltage of each sensor, used by
    the baseline-ratio feature extractors.
    """

    values: np.ndarray
    baseline: np.ndarray
    sample_rate: float = 10.0
    class_id: int = 0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError("values must be a T x S matrix with T >= 1 and S >= 1")
        if not np.all(np.isfinite(values)):
            raise ValueError("recording values must be finite")
        baseline = np.asarray(self.baseline, dtype=np.float64)
        if baseline.shape != (values.shape[1],):
            raise ValueError("baseline length must equal the sensor count")
        if not np.all(np.isfinite(baseline)):
            raise ValueError("baseline values must be finite")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        object.__setattr__(self, "values", _frozen_array(values))
        object.__setattr__(self, "baseline", _frozen_array(baseline))

    @property
    def n_timesteps(self) -> int:
        return self.values.shape[0]

    @property
    def n_sensors(self) -> int:
        return self.values.shape[1]

    @classmethod
    def from_values(cls, values, sample_rate=10.0, class_id=0, metadata=None,
                    baseline_fraction=0.05):
        """Build a recording, estimating the baseline from the leading ambient stretch.

        Recordings start in ambient air, so the per-sensor mean of the first
        ``baseline_fraction`` of the timesteps (at least one row) serves as
        the averaged baseline when none was measured separately.
        """
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] < 1:
            raise ValueError("values must be a non-empty T x S matrix")
        baseline = estimate_baseline(values, baseline_fraction)
        return cls(values, baseline, sample_rate, class_id, dict(metadata or {}))


def estimate_baseline(values, fraction=0.05):
    """Per-sensor mean of the first ``fraction`` of a recording's timesteps."""
    values = np.asarray(values, dtype=np.float64)
    if not 0 < fraction <= 1:
        raise ValueError("fraction must lie in (0, 1]")
    head = max(1, math.ceil(values.shape[0] * fraction))
    return values[:head].mean(axis=0)


@dataclass(frozen=True)
class LabeledDataset:
    """N x D sample matrix with dense integer labels and ordered class names."""

    rows: np.ndarray
    labels: np.ndarray
    class_names: tuple
    negative_class: int | None = None

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        names = tuple(str(n) for n in self.class_names)
        if rows.ndim != 2:
            raise ValueError("rows must be a 2-D matrix")
        if not np.all(np.isfinite(rows)):
            raise ValueError("rows must be finite")
        if labels.ndim != 1 or labels.shape[0] != rows.shape[0]:
            raise ValueError("labels must be a vector with one entry per row")
        if len(names) == 0:
            raise ValueError("class_names must not be empty")
        if labels.size and (labels.min() < 0 or labels.max() >= len(names)):
            raise ValueError("labels must lie in [0, n_classes)")
        if self.negative_class is not None and not 0 <= self.negative_class < len(names):
            raise ValueError("negative_class must be a valid class id")
        object.__setattr__(self, "rows", _frozen_array(rows))
        object.__setattr__(self, "labels", _frozen_array(labels, dtype=np.int64))
        object.__setattr__(self, "class_names", names)

    @property
    def n_samples(self) -> int:
        return self.rows.shape[0]

    @property
    def n_features(self) -> int:
        return self.rows.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)


@dataclass(frozen=True)
class SplitIndices:
    """Disjoint train/validation/test row indices covering a whole dataset."""

    train: np.ndarray
    validation: np.ndarray
    test: np.ndarray
    seed: int

    def __post_init__(self):
        parts = []
        for name in ("train", "validation", "test"):
            arr = np.asarray(getattr(self, name), dtype=np.int64)
            object.__setattr__(self, name, _frozen_array(arr, dtype=np.int64))
            parts.append(arr)
        merged = np.sort(np.concatenate(parts))
        if merged.size and not np.array_equal(merged, np.arange(merged.size)):
            raise ValueError("split parts must be disjoint and cover 0..N-1 exactly")

    @property
    def n_total(self) -> int:
        return self.train.size + self.validation.size + self.test.size


def _allocate_counts(n, fractions):
    # Largest-remainder allocation: each part within +/- 1 of fraction * n.
    target = fractions * n
    base = np.floor(target).astype(np.int64)
    leftover = n - int(base.sum())
    order = np.argsort(-(target - base), kind="stable")
    for i in range(leftover):
        base[order[i]] += 1
    return base


def split(dataset: LabeledDataset, fractions=DEFAULT_FRACTIONS, seed: int = 0) -> SplitIndices:
    """Stratified per-class partition into train/validation/test.

    Deterministic for a fixed seed. Per class, part sizes follow the
    fractions within one sample (largest-remainder rounding).
    """
    fr = np.asarray(fractions, dtype=np.float64)
    if fr.shape != (3,):
        raise ValueError("fractions must be a (train, validation, test) triple")
    if np.any(fr < 0) or abs(fr.sum() - 1.0) > 1e-9:
        raise ValueError("fractions must be non-negative and sum to 1")
    n_parts = int(np.count_nonzero(fr > 0))
    counts = dataset.class_counts()
    for c, n_c in enumerate(counts):
        if n_c < max(n_parts, 1):
            raise ValueError(
                f"insufficient class population: class {dataset.class_names[c]!r} "
                f"has {int(n_c)} samples for {n_parts} split parts"
            )
    rng = np.random.default_rng(seed)
    parts = ([], [], [])
    for c in range(dataset.n_classes):
        idx = rng.permutation(np.flatnonzero(dataset.labels == c))
        alloc = _allocate_counts(idx.size, fr)
        offset = 0
        for part, take in zip(parts, alloc):
            part.append(idx[offset : offset + take])
            offset += take
    train, validation, test = (
        np.sort(np.concatenate(p)) if p else np.empty(0, dtype=np.int64) for p in parts
    )
    return SplitIndices(train=train, validation=validation, test=test, seed=seed)


@dataclass(frozen=True)
class SynthConfig:
    """Configuration of the synthetic odour-dataset generator.

    ``n_classes`` counts the ambient-air class, so there are n_classes - 1
    material classes. Defaults produce the canonical 1000 x 8 dataset with
    nine classes (eight materials plus ambient).
    """

    n_classes: int = 9
    n_sensors: int = 8
    samples_per_material_class: int = 100
    ambient_samples: int = 200
    signature_separation: float = 1.0
    noise_sigma: float = 0.02
    drift_rate: float = 0.0002
    timesteps: int = 150
    seed: int = 0

    def __post_init__(self):
        if self.n_classes < 2:
            raise ValueError("n_classes must be at least 2 (one material plus ambient)")
        for name in ("n_sensors", "samples_per_material_class", "ambient_samples", "timesteps"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        if self.drift_rate < 0:
            raise ValueError("drift_rate must be non-negative")
        if self.signature_separation <= 0:
            raise ValueError("signature_separation must be positive")

    @property
    def n_materials(self) -> int:
        return self.n_classes - 1

    @property
    def n_samples(self) -> int:
        return self.n_materials * self.samples_per_material_class + self.ambient_samples


def generate_synthetic(config: SynthConfig):
    """Generate recordings and the matching response-vector dataset.

    Each material class gets one signature vector; every recording is
    baseline + signature * (1 - exp(-t/tau)) + drift * t + Gaussian noise,
    with ambient recordings using a zero signature. Dataset rows are the
    recordings' response points (mean of the final 10% of timesteps).
    Deterministic per seed.
    """
    from .features import response_point

    rng = np.random.default_rng(config.seed)
    n_sensors = config.n_sensors
    baseline = rng.uniform(1.0, 2.0, size=n_sensors)
    signatures = config.signature_separation * rng.uniform(
        0.2, 1.0, size=(config.n_materials, n_sensors)
    )
    t = np.arange(config.timesteps, dtype=np.float64)
    tau = config.timesteps / 5.0
    rise = 1.0 - np.exp(-t / tau)
    drift = config.drift_rate * t
    class_names = tuple(f"M{i + 1}" for i in range(config.n_materials)) + (AMBIENT_NAME,)

    recordings = []
    rows = []
    labels = []

    def emit(class_id, signature, count):
        shape = signature[None, :] * rise[:, None]
        for _ in range(count):
            noise = rng.normal(0.0, config.noise_sigma, size=(config.timesteps, n_sensors))
            values = baseline[None, :] + shape + drift[:, None] + noise
            rec = OdourRecording(
                values=values,
                baseline=baseline,
                sample_rate=10.0,
                class_id=class_id,
                metadata={"source": class_names[class_id]},
            )
            recordings.append(rec)
            rows.append(response_point(rec.values))
            labels.append(class_id)

    for c in range(config.n_materials):
        emit(c, signatures[c], config.samples_per_material_class)
    emit(config.n_classes - 1, np.zeros(n_sensors), config.ambient_samples)

    dataset = LabeledDataset(
        rows=np.vstack(rows),
        labels=np.asarray(labels, dtype=np.int64),
        class_names=class_names,
        negative_class=config.n_classes - 1,
    )
    return recordings, dataset


def _format_value(x) -> str:
    # repr of a Python float is the shortest string that round-trips exactly.
    return repr(float(x))


def write_csv(dataset: LabeledDataset, path) -> None:
    """Write a dataset using the ``sensor_1,...,sensor_S,label`` schema."""
    for name in dataset.class_names:
        if "," in name or "\n" in name:
            raise ValueError(f"class name {name!r} cannot be serialized to CSV")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        header = [f"sensor_{i + 1}" for i in range(dataset.n_features)] + ["label"]
        fh.write(",".join(header) + "\n")
        for row, label in zip(dataset.rows, dataset.labels):
            cells = [_format_value(v) for v in row]
            cells.append(dataset.class_names[label])
            fh.write(",".join(cells) + "\n")


def read_csv(path, class_names=None, negative_name=None) -> LabeledDataset:
    """Read a dataset CSV (one sample per line, final column holds the label).

    Label strings map to dense integer ids in order of first appearance,
    unless ``class_names`` pins the mapping (then unknown labels are errors).
    The negative class defaults to a class literally named "NA" when present;
    pass ``negative_name`` to designate another one.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise CsvFormatError(f"{path}: empty file")
    header = lines[0].split(",")
    if len(header) < 2 or header[-1] != "label":
        raise CsvFormatError(f"{path}: line 1: header must end with a 'label' column")
    n_sensors = len(header) - 1

    fixed = class_names is not None
    names = list(class_names) if fixed else []
    name_to_id = {n: i for i, n in enumerate(names)}
    rows, labels = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != n_sensors + 1:
            raise CsvFormatError(
                f"{path}: line {lineno}: expected {n_sensors + 1} cells, got {len(cells)}"
            )
        try:
            rows.append([float(c) for c in cells[:-1]])
        except ValueError:
            raise CsvFormatError(f"{path}: line {lineno}: non-numeric value") from None
        label = cells[-1]
        if label not in name_to_id:
            if fixed:
                raise CsvFormatError(f"{path}: line {lineno}: unknown label {label!r}")
            name_to_id[label] = len(names)
            names.append(label)
        labels.append(name_to_id[label])
    if not rows:
        raise CsvFormatError(f"{path}: no samples")

    negative = None
    if negative_name is not None:
        if negative_name not in name_to_id:
            raise CsvFormatError(f"{path}: negative class {negative_name!r} not found")
        negative = name_to_id[negative_name]
    elif AMBIENT_NAME in name_to_id:
        negative = name_to_id[AMBIENT_NAME]
    return LabeledDataset(
        rows=np.asarray(rows, dtype=np.float64),
        labels=np.asarray(labels, dtype=np.int64),
        class_names=tuple(names),
        negative_class=negative,
    )


def write_recording_csv(path, values, baseline, class_name) -> None:
    """Write one recording: sidecar line, ``t,sensor_...`` header, one row per timestep."""
    values = np.asarray(values, dtype=np.float64)
    baseline = np.asarray(baseline, dtype=np.float64)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        base = ";".join(_format_value(v) for v in baseline)
        fh.write(f"# class={class_name} baseline={base}\n")
        header = ["t"] + [f"sensor_{i + 1}" for i in range(values.shape[1])]
        fh.write(",".join(header) + "\n")
        for ti, row in enumerate(values):
            fh.write(",".join([str(ti)] + [_format_value(v) for v in row]) + "\n")


def read_recording_csv(path):
    """Read a recording CSV; returns (values, baseline, class_name)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    meta = {}
    data_start = None
    n_sensors = None
    for lineno, line in enumerate(lines, start=1):
        if line.startswith("#"):
            for token in line[1:].split():
                if "=" in token:
                    key, _, val = token.partition("=")
                    meta[key] = val
            continue
        if line.startswith("t,"):
            n_sensors = len(line.split(",")) - 1
            data_start = lineno
            break
        raise CsvFormatError(f"{path}: line {lineno}: expected sidecar or 't,...' header")
    if data_start is None or n_sensors is None or n_sensors < 1:
        raise CsvFormatError(f"{path}: missing 't,sensor_...' header")
    if "class" not in meta or "baseline" not in meta:
        raise CsvFormatError(f"{path}: sidecar must carry class= and baseline=")
    try:
        baseline = np.asarray([float(v) for v in meta["baseline"].split(";")])
    except ValueError:
        raise CsvFormatError(f"{path}: non-numeric baseline value") from None
    if baseline.shape != (n_sensors,):
        raise CsvFormatError(f"{path}: baseline length does not match sensor count")

    values = []
    for lineno, line in enumerate(lines[data_start:], start=data_start + 1):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != n_sensors + 1:
            raise CsvFormatError(
                f"{path}: line {lineno}: expected {n_sensors + 1} cells, got {len(cells)}"
            )
        try:
            values.append([float(c) for c in cells[1:]])
        except ValueError:
            raise CsvFormatError(f"{path}: line {lineno}: non-numeric value") from None
    if not values:
        raise CsvFormatError(f"{path}: recording holds no timesteps")
    return np.asarray(values, dtype=np.float64), baseline, meta["class"]
