"""Command line front end.

Subcommands: synth, pca-info, augment, train-eval, bench, export-2d.
Deliberate failures exit 1 after printing a single JSON error line to
stderr, e.g. {"error": "FormatError", "message": "..."}.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .baselines import BASELINE_METHODS, BaselineConfig, augment_with_baseline
from .classifier import MlpConfig, evaluate, save_model, train
from .errors import ToolkitError
from .geometry import (
    eigenvalues,
    explained_variance,
    explained_variance_ratios,
    fit_class_geometry,
    fixed_rank,
)
from .harness import (
    MethodSpec,
    SynthSpec,
    export_2d,
    load_config,
    run_benchmark,
    summarize,
    synth_dataset,
    write_projection_csv,
    write_rows_csv,
    write_summary_csv,
)
from .reprint import LABEL_STRATEGIES, ReprintConfig, augment_dataset
from .store import (
    LabeledEmbeddingSet,
    SoftLabeledSet,
    read_any_binary,
    read_embeddings,
    write_embeddings,
    write_soft_binary,
)


def _parse_ints(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    return [int(t) for t in str(text).split(",") if t.strip()]


def _parse_floats(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(t) for t in str(text).split(",") if t.strip()]


def _parse_names(text) -> list[str]:
    if isinstance(text, (list, tuple)):
        return [str(v) for v in text]
    return [t.strip() for t in str(text).split(",") if t.strip()]


def _read_hard(path, fmt) -> LabeledEmbeddingSet:
    return read_embeddings(path, fmt)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_synth(args) -> int:
    kwargs = {}
    if args.spectrum is not None:
        kwargs["spectrum"] = tuple(_parse_floats(args.spectrum))
    spec = SynthSpec(
        num_classes=args.classes,
        dim=args.dim,
        mean_scale=args.mean_scale,
        train_per_class=args.train_per_class,
        test_per_class=args.test_per_class,
        seed=args.seed,
        **kwargs,
    )
    train_pool, test_set = synth_dataset(spec)
    write_embeddings(train_pool, args.out_train, args.format)
    write_embeddings(test_set, args.out_test, args.format)
    print(f"wrote {args.out_train} (n={train_pool.n}, d={train_pool.dim})")
    print(f"wrote {args.out_test} (n={test_set.n}, d={test_set.dim})")
    return 0


def _cmd_pca_info(args) -> int:
    dataset = _read_hard(args.inp, args.format)
    policy = (
        explained_variance(args.evr) if args.evr is not None else
        fixed_rank(args.pcs) if args.pcs is not None else
        explained_variance(1.0)
    )
    rows = [["class", "n_records", "component", "eigenvalue", "variance_ratio", "cumulative_ratio"]]
    for c in range(dataset.vocab.num_classes):
        geo = fit_class_geometry(dataset, c, policy)
        eigs = eigenvalues(geo)
        ratios = explained_variance_ratios(geo) if geo.total_variance > 0 else eigs
        running = 0.0
        for i in range(geo.rank):
            running += float(ratios[i])
            rows.append(
                [
                    dataset.vocab.names[c],
                    geo.n_records,
                    i + 1,
                    repr(float(eigs[i])),
                    repr(float(ratios[i])),
                    repr(running),
                ]
            )
    out = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerows(rows)
    finally:
        if args.out:
            out.close()
    return 0


def _reprint_config(args, seed) -> ReprintConfig:
    if args.evr is not None:
        source = target = explained_variance(args.evr)
    else:
        source = fixed_rank(args.pcs_source)
        target = fixed_rank(args.pcs_target)
    return ReprintConfig(
        source_policy=source,
        target_policy=target,
        label_strategy=args.label_strategy,
        positivity_epsilon=args.epsilon,
        seed=seed,
    )


def _baseline_config(args, method, seed) -> BaselineConfig:
    return BaselineConfig(
        method=method,
        noise_sigma=args.noise_sigma,
        smote_k=args.smote_k,
        mixup_alpha=args.mixup_alpha,
        we_lambda=args.we_lambda,
        seed=seed,
    )


def _cmd_augment(args) -> int:
    dataset = _read_hard(args.inp, args.format)
    if args.method == "reprint":
        result = augment_dataset(dataset, _reprint_config(args, args.seed))
    else:
        result = augment_with_baseline(dataset, _baseline_config(args, args.method, args.seed))
    write_soft_binary(result, args.out)
    print(f"wrote {args.out} (n={result.n}, d={result.dim})")
    return 0


def _cmd_train_eval(args) -> int:
    if args.format == "jsonl":
        train_set: LabeledEmbeddingSet | SoftLabeledSet = read_embeddings(args.train, "jsonl")
    else:
        train_set = read_any_binary(args.train)
    if isinstance(train_set, LabeledEmbeddingSet):
        train_set = train_set.to_soft()
    test_set = _read_hard(args.test, args.format)
    config = MlpConfig(
        hidden=tuple(_parse_ints(args.hidden)),
        learning_rate=args.learning_rate,
        batch_size=args.batch_size,
        epochs=args.epochs,
        optimizer=args.optimizer,
        weight_decay=args.weight_decay,
        seed=args.seed,
    )
    model = train(train_set, config)
    if args.model_out:
        save_model(model, args.model_out)
    accuracy = evaluate(model, test_set)
    print(f"accuracy={accuracy!r}")
    return 0


_BENCH_DEFAULTS = {
    "pool": None,
    "test": None,
    "format": "binary",
    "methods": "none,upsample,reprint",
    "n_small": "32",
    "n_large": None,
    "seeds": "0,1,2,3,4",
    "dataset_name": "synthetic",
    "rows_out": "bench_rows.csv",
    "summary_out": None,
    "max_workers": None,
    "pin_minority": None,
    "pcs_source": 5,
    "pcs_target": 5,
    "evr": None,
    "label_strategy": "residual_energy",
    "epsilon": 0.0,
    "noise_sigma": 0.1,
    "smote_k": 5,
    "mixup_alpha": 0.75,
    "we_lambda": 0.5,
    "hidden": "128",
    "learning_rate": 1e-3,
    "batch_size": 64,
    "epochs": 30,
    "optimizer": "adam",
    "weight_decay": 0.0,
}


def _cmd_bench(args) -> int:
    overrides = load_config(args.config) if args.config else {}
    for key in overrides:
        if key not in _BENCH_DEFAULTS:
            raise ValueError(f"unknown config key {key!r}")

    def opt(key):
        given = getattr(args, key)
        if given is not None:
            return given
        return overrides.get(key, _BENCH_DEFAULTS[key])

    if opt("pool") is None or opt("test") is None:
        raise ValueError("bench needs --pool and --test (flags or config file)")
    pool = _read_hard(opt("pool"), opt("format"))
    test_set = _read_hard(opt("test"), opt("format"))

    ns = argparse.Namespace(
        pcs_source=int(opt("pcs_source")),
        pcs_target=int(opt("pcs_target")),
        evr=opt("evr") if opt("evr") is None else float(opt("evr")),
        label_strategy=opt("label_strategy"),
        epsilon=float(opt("epsilon")),
        noise_sigma=float(opt("noise_sigma")),
        smote_k=int(opt("smote_k")),
        mixup_alpha=float(opt("mixup_alpha")),
        we_lambda=float(opt("we_lambda")),
    )
    specs = []
    for name in _parse_names(opt("methods")):
        if name == "none":
            specs.append(MethodSpec("none", "none"))
        elif name == "reprint":
            specs.append(MethodSpec("reprint", "reprint", _reprint_config(ns, 0)))
        elif name in BASELINE_METHODS:
            specs.append(MethodSpec(name, name, _baseline_config(ns, name, 0)))
        else:
            raise ValueError(f"unknown method {name!r}")

    mlp = MlpConfig(
        hidden=tuple(_parse_ints(opt("hidden"))),
        learning_rate=float(opt("learning_rate")),
        batch_size=int(opt("batch_size")),
        epochs=int(opt("epochs")),
        optimizer=opt("optimizer"),
        weight_decay=float(opt("weight_decay")),
    )
    pin = opt("pin_minority")
    rows = run_benchmark(
        pool,
        test_set,
        specs,
        _parse_ints(opt("n_small")),
        _parse_ints(opt("seeds")),
        mlp_config=mlp,
        n_large=None if opt("n_large") is None else int(opt("n_large")),
        dataset_name=opt("dataset_name"),
        max_workers=None if opt("max_workers") is None else int(opt("max_workers")),
        minority_classes=None if pin is None else _parse_ints(pin),
    )
    write_rows_csv(rows, opt("rows_out"))
    print(f"wrote {opt('rows_out')} ({len(rows)} cells)")
    if opt("summary_out"):
        write_summary_csv(rows, opt("summary_out"))
        print(f"wrote {opt('summary_out')}")
    for s in summarize(rows):
        spread = "" if s.std is None else f" +/- {s.std:.4f}"
        print(f"{s.dataset} {s.method} n_small={s.n_small}: {s.mean:.4f}{spread}")
    return 0


def _cmd_export_2d(args) -> int:
    named = []
    for path in args.inp:
        container = read_any_binary(path)
        named.append((Path(path).stem, container.vectors))
    rows = export_2d(named)
    write_projection_csv(rows, args.out)
    print(f"wrote {args.out} ({len(rows)} points)")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hsaug",
        description="hidden-space augmentation toolkit for imbalanced vector classification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate an anisotropic gaussian benchmark dataset")
    p.add_argument("--out-train", required=True)
    p.add_argument("--out-test", required=True)
    p.add_argument("--format", choices=("binary", "jsonl"), default="binary")
    p.add_argument("--classes", type=int, default=4)
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--mean-scale", type=float, default=1.0)
    p.add_argument("--spectrum", default=None, help="comma list of eigenvalues, isotropic when omitted")
    p.add_argument("--train-per-class", type=int, default=500)
    p.add_argument("--test-per-class", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("pca-info", help="per-class principal spectrum as CSV")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--format", choices=("binary", "jsonl"), default="binary")
    p.add_argument("--pcs", type=int, default=None, help="fixed component count")
    p.add_argument("--evr", type=float, default=None, help="variance threshold in (0,1]")
    p.add_argument("--out", default=None, help="CSV path (default stdout)")
    p.set_defaults(func=_cmd_pca_info)

    p = sub.add_parser("augment", help="emit synthetic records as a soft-label container")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--format", choices=("binary", "jsonl"), default="binary")
    p.add_argument("--out", required=True)
    p.add_argument("--method", choices=("reprint",) + BASELINE_METHODS, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pcs-source", type=int, default=5)
    p.add_argument("--pcs-target", type=int, default=5)
    p.add_argument("--evr", type=float, default=None,
                   help="use a variance threshold for both subspaces instead of fixed ranks")
    p.add_argument("--label-strategy", choices=LABEL_STRATEGIES, default="residual_energy")
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--noise-sigma", type=float, default=0.1)
    p.add_argument("--smote-k", type=int, default=5)
    p.add_argument("--mixup-alpha", type=float, default=0.75)
    p.add_argument("--we-lambda", type=float, default=0.5)
    p.set_defaults(func=_cmd_augment)

    p = sub.add_parser("train-eval", help="train the classifier and report test accuracy")
    p.add_argument("--train", required=True, help="hard or soft container")
    p.add_argument("--test", required=True)
    p.add_argument("--format", choices=("binary", "jsonl"), default="binary")
    p.add_argument("--hidden", default="128")
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--optimizer", choices=("adam", "sgd"), default="adam")
    p.add_argument("--weight-decay", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model-out", default=None)
    p.set_defaults(func=_cmd_train_eval)

    p = sub.add_parser("bench", help="run the full (method, n_small, seed) grid")
    p.add_argument("--config", default=None, help="flat JSON file of option overrides")
    p.add_argument("--pool", default=None)
    p.add_argument("--test", default=None)
    p.add_argument("--format", choices=("binary", "jsonl"), default=None)
    p.add_argument("--methods", default=None, help="comma list, e.g. none,upsample,reprint")
    p.add_argument("--n-small", dest="n_small", default=None, help="comma list of minority sizes")
    p.add_argument("--n-large", dest="n_large", type=int, default=None)
    p.add_argument("--seeds", default=None, help="comma list of seeds")
    p.add_argument("--dataset-name", default=None)
    p.add_argument("--rows-out", default=None)
    p.add_argument("--summary-out", default=None)
    p.add_argument("--max-workers", type=int, default=None)
    p.add_argument("--pin-minority", default=None, help="comma list of class ids")
    p.add_argument("--pcs-source", type=int, default=None)
    p.add_argument("--pcs-target", type=int, default=None)
    p.add_argument("--evr", type=float, default=None)
    p.add_argument("--label-strategy", choices=LABEL_STRATEGIES, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--noise-sigma", type=float, default=None)
    p.add_argument("--smote-k", type=int, default=None)
    p.add_argument("--mixup-alpha", type=float, default=None)
    p.add_argument("--we-lambda", type=float, default=None)
    p.add_argument("--hidden", default=None)
    p.add_argument("--learning-rate", type=float, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--optimizer", choices=("adam", "sgd"), default=None)
    p.add_argument("--weight-decay", type=float, default=None)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("export-2d", help="project containers onto the top-2 joint PCs")
    p.add_argument("--in", dest="inp", action="extend", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_export_2d)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ToolkitError, ValueError, OSError) as exc:
        line = json.dumps({"error": type(exc).__name__, "message": str(exc)})
        print(line, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
