"""Command-line front end: generation, extraction, training, evaluation, pipeline.

All randomness flows from --seed; no command reads the clock or other
environment entropy, so reruns with identical flags produce identical files.
Failures print one ``error: ...`` line on stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__, knn, metrics, pca, pipeline, pnn
from .dataset import (
    AMBIENT_NAME,
    CsvFormatError,
    LabeledDataset,
    OdourRecording,
    SynthConfig,
    generate_synthetic,
    read_csv,
    read_recording_csv,
    write_csv,
    write_recording_csv,
)
from .features import (
    ambient_baseline,
    featurize_rows,
    kind_from_name,
    response_point,
)


def _parse_kinds(text: str) -> tuple:
    return tuple(kind_from_name(part) for part in text.split(",") if part.strip())


def _resolve_negative(class_names, requested):
    if requested is not None:
        if requested not in class_names:
            raise ValueError(f"negative class {requested!r} not present in {list(class_names)}")
        return class_names.index(requested)
    if AMBIENT_NAME in class_names:
        return class_names.index(AMBIENT_NAME)
    return None


def _load_dataset(path, negative):
    dataset = read_csv(path, negative_name=negative)
    return dataset


def cmd_generate(args) -> int:
    config = SynthConfig(
        n_classes=args.classes,
        n_sensors=args.sensors,
        samples_per_material_class=args.samples_per_class,
        ambient_samples=args.ambient,
        signature_separation=args.separation,
        noise_sigma=args.noise_sigma,
        drift_rate=args.drift_rate,
        timesteps=args.timesteps,
        seed=args.seed,
    )
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    recordings, dataset = generate_synthetic(config)
    write_csv(dataset, out / "dataset.csv")
    if args.recordings:
        rec_dir = out / "recordings"
        rec_dir.mkdir(exist_ok=True)
        for i, rec in enumerate(recordings):
            write_recording_csv(
                rec_dir / f"rec_{i:05d}.csv",
                rec.values,
                rec.baseline,
                dataset.class_names[rec.class_id],
            )
    print(
        f"generated N={dataset.n_samples} D={dataset.n_features} "
        f"K={dataset.n_classes} -> {out}"
    )
    return 0


def _dataset_from_recordings(directory: Path):
    paths = sorted(directory.glob("*.csv"))
    if not paths:
        raise ValueError(f"no recording files in {directory}")
    loaded = [read_recording_csv(p) for p in paths]
    names = []
    for _, _, name in loaded:
        if name not in names:
            names.append(name)
    rows = []
    labels = []
    recordings = []
    for values, baseline, name in loaded:
        rec = OdourRecording(values=values, baseline=baseline, class_id=names.index(name))
        recordings.append(rec)
        rows.append(response_point(rec.values))
        labels.append(rec.class_id)
    negative = names.index(AMBIENT_NAME) if AMBIENT_NAME in names else None
    dataset = LabeledDataset(
        rows=np.vstack(rows),
        labels=np.asarray(labels),
        class_names=tuple(names),
        negative_class=negative,
    )
    return recordings, dataset


def cmd_extract(args) -> int:
    kind = kind_from_name(args.feature)
    source = Path(args.input)
    if source.is_dir():
        _, dataset = _dataset_from_recordings(source)
    else:
        dataset = _load_dataset(source, args.negative_class)
    baseline = None
    if kind.needs_baseline:
        if dataset.negative_class is None:
            raise ValueError(
                f"feature {kind.value} needs an ambient baseline; designate a "
                f"negative class with --negative-class"
            )
        baseline = ambient_baseline(dataset)
    feature = featurize_rows(dataset.rows, kind, baseline=baseline)
    write_csv(
        LabeledDataset(
            rows=feature.values,
            labels=dataset.labels,
            class_names=dataset.class_names,
            negative_class=dataset.negative_class,
        ),
        args.output,
    )
    print(f"extracted {kind.value}: {feature.n_samples} x {feature.n_features} -> {args.output}")
    return 0


def _pipeline_config(args) -> pipeline.PipelineConfig:
    return pipeline.PipelineConfig(
        n_repetitions=args.reps,
        spread=args.spread,
        top_n_features=args.top_n,
        pca_fit_scope=args.pca_fit,
        knn_k=args.knn_k,
        master_seed=args.seed,
    )


def cmd_rank_features(args) -> int:
    dataset = _load_dataset(args.input, args.negative_class)
    config = _pipeline_config(args)
    ranking, skipped = pipeline.rank_features(dataset, config)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "ranking.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("feature,min_accuracy_pct,max_accuracy_pct,mean_accuracy_pct\n")
        for kind, stats in ranking:
            fh.write(f"{kind.value},{stats.minimum!r},{stats.maximum!r},{stats.mean!r}\n")
    for kind, stats in ranking:
        print(f"{kind.value}: mean={stats.mean:.2f}% min={stats.minimum:.2f}% max={stats.maximum:.2f}%")
    for kind, reason in skipped:
        print(f"{kind.value}: skipped ({reason})")
    return 0


def cmd_pca_sweep(args) -> int:
    dataset = _load_dataset(args.input, args.negative_class)
    config = _pipeline_config(args)
    if args.features:
        selected = _parse_kinds(args.features)
    else:
        ranking, _ = pipeline.rank_features(dataset, config)
        selected = tuple(kind for kind, _ in ranking[: config.top_n_features])
    k_star, table = pipeline.pc_sweep(dataset, selected, config)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "pc_sweep.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("pc," + ",".join(k.value for k in table.kinds) + "\n")
        for i, k in enumerate(table.pc_values):
            fh.write(",".join([str(k)] + [repr(float(v)) for v in table.mean_accuracy[i]]) + "\n")
    # Variance ladders (fitted on the whole feature matrix) for external plotting.
    features, _ = pipeline.extract_features(dataset, selected)
    for kind in selected:
        model = pca.fit(features[kind].values)
        pca.write_variance_csv(model, out / f"variance_{kind.value}.csv")
    print(f"selected pc_count={k_star} over features {', '.join(k.value for k in selected)}")
    return 0


def cmd_fuse(args) -> int:
    datasets = [_load_dataset(path, args.negative_class) for path in args.inputs]
    first = datasets[0]
    for other, path in zip(datasets[1:], args.inputs[1:]):
        if other.n_samples != first.n_samples or list(other.labels) != list(first.labels):
            raise ValueError(f"label mismatch between {args.inputs[0]} and {path}")
    hybrid = pipeline.fuse([d.rows for d in datasets])
    write_csv(
        LabeledDataset(
            rows=hybrid.values,
            labels=first.labels,
            class_names=first.class_names,
            negative_class=first.negative_class,
        ),
        args.output,
    )
    print(f"fused {len(datasets)} matrices -> {hybrid.n_samples} x {hybrid.n_features}")
    return 0


def cmd_train(args) -> int:
    dataset = _load_dataset(args.input, args.negative_class)
    if args.classifier == "pnn":
        model = pnn.fit(
            dataset.rows, dataset.labels, spread=args.spread,
            class_names=dataset.class_names,
        )
        pnn.save_model(model, args.output)
    else:
        model = knn.fit(dataset.rows, dataset.labels, k=args.knn_k,
                        class_names=dataset.class_names)
        knn.save_model(model, args.output)
    print(f"trained {args.classifier} on {dataset.n_samples} samples -> {args.output}")
    return 0


def _load_any_model(path):
    with np.load(path, allow_pickle=False) as data:
        kind = str(data["model_kind"])
    if kind == "pnn":
        return "pnn", pnn.load_model(path)
    if kind == "knn":
        return "knn", knn.load_model(path)
    raise ValueError(f"unknown model kind {kind!r} in {path}")


def _print_binary(cm, negative, out_dir):
    bc = metrics.binary_collapse(cm, negative)
    sens = metrics.sensitivity(bc)
    spec = metrics.specificity(bc)
    acc = metrics.accuracy(bc)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "metrics.csv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write("tp,fp,tn,fn,sensitivity_pct,specificity_pct,accuracy_pct\n")
            fh.write(f"{bc.tp},{bc.fp},{bc.tn},{bc.fn},{sens!r},{spec!r},{acc!r}\n")
        metrics.write_confusion_csv(cm, out / "confusion.csv")
    print(f"sensitivity={sens:.2f}% specificity={spec:.2f}% accuracy={acc:.2f}%")
    return 0


def cmd_eval(args) -> int:
    if args.confusion is not None:
        cm = metrics.read_confusion_csv(args.confusion)
        negative = _resolve_negative(list(cm.class_names), args.negative_class)
        if negative is None:
            raise ValueError("specify --negative-class (no 'NA' class present)")
        return _print_binary(cm, negative, args.output)
    if args.model is None or args.input is None:
        raise ValueError("eval needs either --confusion, or --model with an input csv")
    kind, model = _load_any_model(args.model)
    names = list(model.class_names) if model.class_names else None
    dataset = read_csv(args.input, class_names=names, negative_name=args.negative_class)
    negative = _resolve_negative(list(dataset.class_names), args.negative_class)
    if negative is None:
        raise ValueError("specify --negative-class (no 'NA' class present)")
    if kind == "pnn":
        predictions = pnn.predict(model, dataset.rows)
    else:
        predictions = knn.predict(model, dataset.rows)
    cm = metrics.confusion(predictions, dataset.labels, class_names=dataset.class_names)
    return _print_binary(cm, negative, args.output)


def cmd_pipeline(args) -> int:
    if args.input is not None:
        dataset = _load_dataset(args.input, args.negative_class)
    else:
        _, dataset = generate_synthetic(SynthConfig(seed=args.seed))
    config = _pipeline_config(args)
    report = pipeline.run(dataset, config, n_jobs=args.jobs)
    paths = pipeline.write_report(report, config, args.output)
    ranked = ", ".join(kind.value for kind, _ in report.feature_ranking)
    print(f"feature ranking: {ranked}")
    print(f"chosen pc_count: {report.chosen_pc_count} (hybrid {report.hybrid_dims[0]} x {report.hybrid_dims[1]})")
    print(
        f"hybrid pnn accuracy: mean={report.hybrid_stats.mean:.2f}% "
        f"min={report.hybrid_stats.minimum:.2f}% max={report.hybrid_stats.maximum:.2f}%"
    )
    if report.final_metrics is not None:
        sens, spec, acc = report.final_metrics
        print(f"hybrid pnn binary: sensitivity={sens:.2f}% specificity={spec:.2f}% accuracy={acc:.2f}%")
    print(f"knn baseline accuracy: mean={report.baseline_stats.mean:.2f}%")
    print(f"report written to {Path(args.output)}")
    return 0


def _add_common(parser, output_dir=True):
    parser.add_argument("--seed", type=int, default=0, help="master RNG seed")
    parser.add_argument("--negative-class", default=None,
                        help="name of the ambient (non-fire) class; defaults to 'NA' when present")
    if output_dir:
        parser.add_argument("-o", "--output", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="firenose",
        description="Electronic-nose incipient-fire classification toolkit",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a seeded synthetic odour dataset")
    p.add_argument("--classes", type=int, default=9, help="class count including ambient")
    p.add_argument("--sensors", type=int, default=8)
    p.add_argument("--samples-per-class", type=int, default=100)
    p.add_argument("--ambient", type=int, default=200)
    p.add_argument("--timesteps", type=int, default=150)
    p.add_argument("--separation", type=float, default=1.0)
    p.add_argument("--noise-sigma", type=float, default=0.02)
    p.add_argument("--drift-rate", type=float, default=0.0002)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--recordings", action=argparse.BooleanOptionalAction, default=True,
                   help="also write per-recording time-series files")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("extract", help="extract one feature from a dataset or recordings dir")
    p.add_argument("-i", "--input", required=True, help="dataset csv or recordings directory")
    p.add_argument("--feature", required=True, help="rlssv, rlv, rssv, rv, or fvc")
    p.add_argument("--negative-class", default=None)
    p.add_argument("-o", "--output", required=True, help="output feature csv")
    p.set_defaults(func=cmd_extract)

    for name, func, with_features in (
        ("rank-features", cmd_rank_features, False),
        ("pca-sweep", cmd_pca_sweep, True),
    ):
        p = sub.add_parser(name)
        p.add_argument("-i", "--input", required=True, help="dataset csv")
        p.add_argument("--reps", type=int, default=50)
        p.add_argument("--spread", type=float, default=pnn.DEFAULT_SPREAD)
        p.add_argument("--top-n", type=int, default=3)
        p.add_argument("--pca-fit", choices=("train", "all"), default="train")
        p.add_argument("--knn-k", type=int, default=3)
        if with_features:
            p.add_argument("--features", default=None,
                           help="comma-separated kinds; defaults to the ranked top --top-n")
        _add_common(p)
        p.set_defaults(func=func)

    p = sub.add_parser("fuse", help="concatenate feature csvs into a hybrid feature")
    p.add_argument("-i", "--inputs", nargs="+", required=True)
    p.add_argument("--negative-class", default=None)
    p.add_argument("-o", "--output", required=True, help="output hybrid csv")
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("train", help="fit a classifier on a feature csv")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--classifier", choices=("pnn", "knn"), default="pnn")
    p.add_argument("--spread", type=float, default=pnn.DEFAULT_SPREAD)
    p.add_argument("--knn-k", type=int, default=3)
    p.add_argument("--negative-class", default=None)
    p.add_argument("-o", "--output", required=True, help="output model .npz")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a model on a test csv, or metrics of a stored confusion")
    p.add_argument("--model", default=None, help="model .npz from train")
    p.add_argument("-i", "--input", default=None, help="test dataset csv")
    p.add_argument("--confusion", default=None, help="confusion csv to evaluate directly")
    p.add_argument("--negative-class", default=None)
    p.add_argument("-o", "--output", default=None, help="optional output directory")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("pipeline", help="run the full multi-stage pipeline")
    p.add_argument("-i", "--input", default=None,
                   help="dataset csv; omitted -> built-in synthetic dataset from --seed")
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--spread", type=float, default=pnn.DEFAULT_SPREAD)
    p.add_argument("--top-n", type=int, default=3)
    p.add_argument("--pca-fit", choices=("train", "all"), default="train")
    p.add_argument("--knn-k", type=int, default=3)
    p.add_argument("--jobs", type=int, default=1, help="repetition worker threads")
    _add_common(p)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, CsvFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
