"""Multi-stage feature selection and fusion pipeline.

Stages: extract the five baseline-correction features, rank them by PNN
test accuracy over repeated random splits, PCA-reduce the top-ranked
features with a swept component count, fuse the truncated score matrices
into one hybrid feature, then evaluate the hybrid with PNN (and a kNN
baseline) over the same repetition protocol.

Every stage is a pure function of (dataset, config): per-repetition seeds
derive from the master seed, repetitions may run in threads without
changing results, and serialized reports are byte-identical across reruns.
"""

from __future__ import annotations

import dataclasses
import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, _kernels, knn, metrics, pca, pnn
from .dataset import DEFAULT_FRACTIONS, LabeledDataset, SplitIndices, split
from .features import (
    FeatureDomainError,
    FeatureKind,
    FeatureMatrix,
    ambient_baseline,
    featurize_rows,
)
from .metrics import ConfusionMatrix, RepetitionStats, repetition_stats

ALL_FEATURE_KINDS = tuple(FeatureKind)


@dataclass(frozen=True)
class PipelineConfig:
    """Knobs of the end-to-end run; defaults mirror the reference protocol."""

    feature_kinds: tuple = ALL_FEATURE_KINDS
    n_repetitions: int = 50
    fractions: tuple = DEFAULT_FRACTIONS
    spread: float = pnn.DEFAULT_SPREAD
    spread_grid: tuple | None = None
    pc_sweep_range: tuple | None = None
    top_n_features: int = 3
    pca_fit_scope: str = "train"
    knn_k: int = 3
    master_seed: int = 0

    def __post_init__(self):
        if not self.feature_kinds:
            raise ValueError("feature_kinds must not be empty")
        if self.top_n_features > len(self.feature_kinds):
            raise ValueError("top_n_features cannot exceed the number of feature kinds")
        if self.top_n_features < 1:
            raise ValueError("top_n_features must be positive")
        if self.n_repetitions < 1:
            raise ValueError("n_repetitions must be positive")
        if self.pca_fit_scope not in ("train", "all"):
            raise ValueError("pca_fit_scope must be 'train' or 'all'")
        if self.spread_grid is None and self.spread <= 0:
            raise ValueError("spread must be positive")
        if self.knn_k < 1:
            raise ValueError("knn_k must be positive")


@dataclass(frozen=True)
class PcSweepTable:
    """Mean PNN accuracy (percent) per principal-component count per feature."""

    pc_values: tuple
    kinds: tuple
    mean_accuracy: np.ndarray  # shape (len(pc_values), len(kinds))


@dataclass(frozen=True)
class PipelineReport:
    feature_ranking: tuple  # ((FeatureKind, RepetitionStats), ...) best first
    skipped_features: tuple  # ((FeatureKind, reason), ...)
    pc_sweep: PcSweepTable
    chosen_pc_count: int
    hybrid_dims: tuple
    hybrid_stats: RepetitionStats
    final_confusion: ConfusionMatrix
    final_metrics: tuple | None  # mean (sensitivity, specificity, accuracy) percent
    baseline_stats: RepetitionStats
    baseline_metrics: tuple | None
    representative_repetition: int
    spread_used: float


def repetition_seed(master_seed: int, repetition: int) -> int:
    """Stable per-repetition seed derived from the master seed."""
    return int(np.random.SeedSequence([master_seed, repetition]).generate_state(1)[0])


def map_repetitions(fn, n_repetitions: int, n_jobs: int = 1) -> list:
    """Evaluate fn(0..n-1), optionally in threads; results keyed by index."""
    if n_jobs == 1:
        return [fn(r) for r in range(n_repetitions)]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, range(n_repetitions)))


def _split_for(dataset: LabeledDataset, config: PipelineConfig, repetition: int) -> SplitIndices:
    return split(dataset, config.fractions, repetition_seed(config.master_seed, repetition))


def extract_features(dataset: LabeledDataset, kinds=ALL_FEATURE_KINDS):
    """Extract each applicable feature once; returns ({kind: FeatureMatrix}, skipped).

    Kinds whose preconditions fail on this dataset (non-positive voltages
    for the log features, or no ambient class to derive a baseline for the
    ratio features) are skipped with a warning rather than crashing.
    """
    baseline = None
    baseline_error = None
    if any(k.needs_baseline for k in kinds):
        try:
            baseline = ambient_baseline(dataset)
            if np.any(baseline == 0):
                baseline = None
                baseline_error = "ambient baseline has a zero component"
        except ValueError as exc:
            baseline_error = str(exc)
    extracted = {}
    skipped = []
    for kind in kinds:
        try:
            if kind.needs_baseline and baseline is None:
                raise FeatureDomainError(baseline_error or "no baseline available")
            extracted[kind] = featurize_rows(dataset.rows, kind, baseline=baseline)
        except FeatureDomainError as exc:
            warnings.warn(f"feature {kind.value} excluded: {exc}", stacklevel=2)
            skipped.append((kind, str(exc)))
    return extracted, skipped


def _feature_accuracy(feature: FeatureMatrix, dataset: LabeledDataset,
                      config: PipelineConfig, spread: float, repetition: int) -> float:
    idx = _split_for(dataset, config, repetition)
    model = pnn.fit(
        feature.values[idx.train], dataset.labels[idx.train],
        spread=spread, n_classes=dataset.n_classes,
    )
    predictions = pnn.predict(model, feature.values[idx.test])
    return pnn.accuracy_pct(predictions, dataset.labels[idx.test])


def select_spread(dataset: LabeledDataset, config: PipelineConfig, features=None) -> float:
    """Resolve the spread to use: fixed value, or one validation sweep over the grid.

    With a grid, each candidate sigma is scored on the repetition-0
    validation split for every applicable feature; the sigma with the best
    cross-feature mean validation accuracy wins (ties to the smallest).
    """
    if config.spread_grid is None:
        return config.spread
    candidates = [float(s) for s in config.spread_grid]
    if not candidates or any(s <= 0 for s in candidates):
        raise ValueError("spread_grid must hold positive values")
    if features is None:
        features, _ = extract_features(dataset, config.feature_kinds)
    if not features:
        raise ValueError("no applicable feature kinds to sweep the spread on")
    idx = _split_for(dataset, config, 0)
    totals = np.zeros(len(candidates))
    for feature in features.values():
        _, accuracies = pnn.spread_sweep(
            feature.values[idx.train], dataset.labels[idx.train],
            feature.values[idx.validation], dataset.labels[idx.validation],
            candidates=candidates, n_classes=dataset.n_classes,
        )
        totals += np.array([accuracies[s] for s in candidates])
    best = totals.max()
    return min(s for s, t in zip(candidates, totals) if t == best)


def rank_order(results):
    """Best-first ordering of (kind, RepetitionStats) pairs by mean accuracy.

    The sort is stable, so equal means keep the given (canonical kind) order.
    """
    return sorted(results, key=lambda item: -item[1].mean)


def rank_features(dataset: LabeledDataset, config: PipelineConfig, n_jobs: int = 1,
                  features=None, spread=None):
    """Rank feature kinds by mean PNN test accuracy over the repetition protocol.

    Returns (ranking, skipped) where ranking is a best-first list of
    (kind, RepetitionStats) and ties keep the canonical kind order.
    """
    if features is None:
        features, skipped = extract_features(dataset, config.feature_kinds)
    else:
        skipped = []
    if spread is None:
        spread = select_spread(dataset, config, features)
    results = []
    for kind in config.feature_kinds:
        if kind not in features:
            continue
        feature = features[kind]
        accuracies = map_repetitions(
            lambda r: _feature_accuracy(feature, dataset, config, spread, r),
            config.n_repetitions, n_jobs,
        )
        results.append((kind, repetition_stats(accuracies)))
    return rank_order(results), skipped


def _pca_scores(feature: FeatureMatrix, idx: SplitIndices, scope: str, pc_count: int):
    fit_rows = feature.values if scope == "all" else feature.values[idx.train]
    model = pca.fit(fit_rows)
    return pca.transform(model, feature.values, pc_count)


def pc_sweep(dataset: LabeledDataset, selected, config: PipelineConfig,
             n_jobs: int = 1, features=None, spread=None):
    """Sweep the retained component count for each selected feature.

    For every candidate count k and selected kind, the feature matrix is
    PCA-reduced to k scores (model fitted per pca_fit_scope) and scored
    with PNN over the repetition protocol. Returns (k_star, PcSweepTable)
    where k_star maximizes the cross-feature mean accuracy, ties going to
    the smaller count.
    """
    selected = tuple(selected)
    if not selected:
        raise ValueError("selected feature list must not be empty")
    if features is None:
        features, _ = extract_features(dataset, selected)
    missing = [k for k in selected if k not in features]
    if missing:
        raise ValueError(f"feature {missing[0].value} is not applicable to this dataset")
    if spread is None:
        spread = select_spread(dataset, config, features)
    d = dataset.n_features
    pc_values = tuple(config.pc_sweep_range) if config.pc_sweep_range else tuple(range(1, d + 1))
    if not pc_values or min(pc_values) < 1 or max(pc_values) > d:
        raise ValueError(f"pc sweep range must lie within [1, {d}]")

    def one_repetition(r):
        idx = _split_for(dataset, config, r)
        acc = np.empty((len(pc_values), len(selected)))
        for j, kind in enumerate(selected):
            # One PCA fit per (kind, repetition); truncations share its columns.
            full = _pca_scores(features[kind], idx, config.pca_fit_scope, d)
            for i, k in enumerate(pc_values):
                model = pnn.fit(
                    full[idx.train, :k], dataset.labels[idx.train],
                    spread=spread, n_classes=dataset.n_classes,
                )
                predictions = pnn.predict(model, full[idx.test, :k])
                acc[i, j] = pnn.accuracy_pct(predictions, dataset.labels[idx.test])
        return acc

    per_rep = map_repetitions(one_repetition, config.n_repetitions, n_jobs)
    mean_accuracy = np.mean(per_rep, axis=0)
    k_star = choose_pc_count(pc_values, mean_accuracy.mean(axis=1))
    return k_star, PcSweepTable(pc_values=pc_values, kinds=selected, mean_accuracy=mean_accuracy)


def choose_pc_count(pc_values, cross_feature_mean) -> int:
    """Component count with the best cross-feature mean accuracy.

    ``pc_values`` must be ascending, so the first maximum realizes the
    smaller-count tie rule.
    """
    cross_feature_mean = np.asarray(cross_feature_mean, dtype=np.float64)
    if len(pc_values) != cross_feature_mean.shape[0] or not len(pc_values):
        raise ValueError("one mean accuracy per candidate count is required")
    return int(pc_values[int(np.argmax(cross_feature_mean))])


def fuse(score_matrices, provenance=None) -> FeatureMatrix:
    """Concatenate equally sized score matrices into one hybrid feature.

    Inputs must agree in row count and retained component count and share
    one sample ordering; columns are concatenated in the given (ranking)
    order.
    """
    matrices = [np.asarray(m, dtype=np.float64) for m in score_matrices]
    if not matrices:
        raise ValueError("fuse needs at least one score matrix")
    rows = matrices[0].shape[0]
    width = matrices[0].shape[1]
    for m in matrices[1:]:
        if m.ndim != 2 or m.shape[0] != rows:
            raise ValueError("row-count mismatch between score matrices")
        if m.shape[1] != width:
            raise ValueError("all score matrices must retain the same component count")
    if provenance is None:
        provenance = tuple((None, width) for _ in matrices)
    return FeatureMatrix(values=np.hstack(matrices), kind=None, provenance=tuple(provenance))


def run(dataset: LabeledDataset, config: PipelineConfig = PipelineConfig(),
        n_jobs: int = 1) -> PipelineReport:
    """Execute the full pipeline; deterministic for a fixed master seed."""
    features, skipped = extract_features(dataset, config.feature_kinds)
    if len(features) < config.top_n_features:
        raise ValueError(
            f"only {len(features)} feature kinds are applicable; "
            f"top_n_features={config.top_n_features} cannot be satisfied"
        )
    spread = select_spread(dataset, config, features)
    ranking, _ = rank_features(dataset, config, n_jobs, features=features, spread=spread)
    top_kinds = tuple(kind for kind, _ in ranking[: config.top_n_features])
    k_star, sweep_table = pc_sweep(
        dataset, top_kinds, config, n_jobs, features=features, spread=spread
    )

    def final_repetition(r):
        idx = _split_for(dataset, config, r)
        hybrid = fuse(
            [_pca_scores(features[kind], idx, config.pca_fit_scope, k_star) for kind in top_kinds],
            provenance=[(kind, k_star) for kind in top_kinds],
        )
        train_x, train_y = hybrid.values[idx.train], dataset.labels[idx.train]
        test_x, test_y = hybrid.values[idx.test], dataset.labels[idx.test]

        model = pnn.fit(train_x, train_y, spread=spread, n_classes=dataset.n_classes)
        predictions = pnn.predict(model, test_x)
        cm = metrics.confusion(predictions, test_y, class_names=dataset.class_names)

        baseline_model = knn.fit(train_x, train_y, k=min(config.knn_k, idx.train.size))
        baseline_predictions = knn.predict(baseline_model, test_x)
        baseline_cm = metrics.confusion(
            baseline_predictions, test_y, class_names=dataset.class_names
        )
        return cm, baseline_cm

    per_rep = map_repetitions(final_repetition, config.n_repetitions, n_jobs)

    def summarize(matrices):
        accuracies = []
        binary = []
        for cm in matrices:
            accuracies.append(np.trace(cm.counts) / cm.total * 100.0)
            if dataset.negative_class is not None:
                bc = metrics.binary_collapse(cm, dataset.negative_class)
                binary.append(
                    (metrics.sensitivity(bc), metrics.specificity(bc), metrics.accuracy(bc))
                )
        triple = tuple(np.mean(binary, axis=0)) if binary else None
        return np.asarray(accuracies), triple

    hybrid_accuracies, final_triple = summarize([cm for cm, _ in per_rep])
    baseline_accuracies, baseline_triple = summarize([cm for _, cm in per_rep])
    representative = int(np.argmin(np.abs(hybrid_accuracies - hybrid_accuracies.mean())))

    return PipelineReport(
        feature_ranking=tuple(ranking),
        skipped_features=tuple(skipped),
        pc_sweep=sweep_table,
        chosen_pc_count=k_star,
        hybrid_dims=(dataset.n_samples, config.top_n_features * k_star),
        hybrid_stats=repetition_stats(hybrid_accuracies),
        final_confusion=per_rep[representative][0],
        final_metrics=final_triple,
        baseline_stats=repetition_stats(baseline_accuracies),
        baseline_metrics=baseline_triple,
        representative_repetition=representative,
        spread_used=spread,
    )


def _stats_row(name: str, stats: RepetitionStats) -> str:
    return f"{name},{stats.minimum!r},{stats.maximum!r},{stats.mean!r}"


def write_report(report: PipelineReport, config: PipelineConfig, out_dir) -> dict:
    """Write ranking.csv, pc_sweep.csv, confusion.csv, metrics.csv and a manifest.

    Output is a pure function of the report and config, so reruns of the
    same pipeline produce byte-identical directories.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {name: out / f"{name}.csv" for name in ("ranking", "pc_sweep", "confusion", "metrics")}
    paths["manifest"] = out / "manifest.json"

    with open(paths["ranking"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write("feature,min_accuracy_pct,max_accuracy_pct,mean_accuracy_pct\n")
        for kind, stats in report.feature_ranking:
            fh.write(_stats_row(kind.value, stats) + "\n")

    with open(paths["pc_sweep"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write("pc," + ",".join(k.value for k in report.pc_sweep.kinds) + "\n")
        for i, k in enumerate(report.pc_sweep.pc_values):
            cells = [str(k)] + [repr(float(v)) for v in report.pc_sweep.mean_accuracy[i]]
            fh.write(",".join(cells) + "\n")

    metrics.write_confusion_csv(report.final_confusion, paths["confusion"])

    with open(paths["metrics"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write(
            "classifier,sensitivity_pct,specificity_pct,accuracy_pct,"
            "mean_accuracy_pct,min_accuracy_pct,max_accuracy_pct\n"
        )
        for name, triple, stats in (
            ("pnn_hybrid", report.final_metrics, report.hybrid_stats),
            ("knn_baseline", report.baseline_metrics, report.baseline_stats),
        ):
            binary = [repr(float(v)) for v in triple] if triple is not None else ["", "", ""]
            fh.write(
                ",".join([name] + binary + [repr(stats.mean), repr(stats.minimum), repr(stats.maximum)])
                + "\n"
            )

    manifest = {
        "package_version": __version__,
        "kernel_backend": _kernels.BACKEND,
        "config": _config_dict(config),
        "spread_used": report.spread_used,
        "chosen_pc_count": report.chosen_pc_count,
        "hybrid_dims": list(report.hybrid_dims),
        "representative_repetition": report.representative_repetition,
        "feature_ranking": [kind.value for kind, _ in report.feature_ranking],
        "skipped_features": [[kind.value, reason] for kind, reason in report.skipped_features],
        "repetition_seeds": [
            repetition_seed(config.master_seed, r) for r in range(config.n_repetitions)
        ],
    }
    with open(paths["manifest"], "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths


def _config_dict(config: PipelineConfig) -> dict:
    raw = dataclasses.asdict(config)
    raw["feature_kinds"] = [k.value for k in config.feature_kinds]
    raw["fractions"] = list(config.fractions)
    raw["spread_grid"] = list(config.spread_grid) if config.spread_grid is not None else None
    raw["pc_sweep_range"] = (
        list(config.pc_sweep_range) if config.pc_sweep_range is not None else None
    )
    return raw
