"""Command-line pipeline orchestration.

Each subcommand is a thin composition of library calls over the on-disk
formats; all randomness flows from explicit --seed flags. Usage errors
exit 2; runtime failures exit 1 with a single JSON line on stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import dataset as dataset_mod
from . import defense, ensemble, metrics, model, synthgen, traces, training


def _cmd_synth(args) -> None:
    profiles = synthgen.generate_site_profiles(args.sites, args.seed, args.separability)
    corpus = synthgen.generate_corpus(profiles, args.traces, args.unmon, args.seed)
    out = Path(args.out)
    traces.save_corpus(corpus, out)
    (out / "profiles.json").write_text(synthgen.profiles_to_json(profiles), encoding="utf-8")
    print(f"wrote {len(corpus)} traces to {out}", file=sys.stderr)


def _cmd_extract(args) -> None:
    corpus = traces.load_corpus(args.corpus, args.n_mon)
    split = dataset_mod.split_corpus(
        corpus.labels, corpus.n_mon, args.seed, args.unmon_train, args.unmon_test
    )
    ds = dataset_mod.build_dataset(corpus, split)
    dataset_mod.save_dataset(ds, args.out)
    print(
        f"dataset: {len(ds.labels)} rows, splits "
        f"{len(split.train_idx)}/{len(split.val_idx)}/{len(split.test_idx)}",
        file=sys.stderr,
    )


def _cmd_train(args) -> None:
    ds = dataset_mod.load_dataset(args.dataset)
    config = training.TrainingConfig(
        initial_lr=args.initial_lr,
        decay_patience=args.decay_patience,
        stop_patience=2 * args.decay_patience,
        batch_size=args.batch_size,
        max_epochs=args.max_epochs,
        seed=args.seed,
    )
    params, history = training.train_model(
        args.variant, ds, training_config=config,
        progress=lambda line: print(line, file=sys.stderr),
    )
    best = max(history, key=lambda r: (r.val_acc, -r.epoch)) if history else None
    val_acc = best.val_acc if best else 0.0
    epoch = best.epoch if best else -1
    out = Path(args.out)
    model.save_checkpoint(params, args.variant, val_acc, epoch, out)
    history_path = out.with_suffix(".history.json")
    history_path.write_text(training.history_to_json(history), encoding="utf-8")
    print(f"best val accuracy {val_acc:.4f} at epoch {epoch}", file=sys.stderr)


def _score_checkpoint(ckpt_path, ds, test_idx):
    params, header = model.load_checkpoint(ckpt_path)
    if params.config.n_classes != ds.n_classes:
        raise ValueError(
            f"checkpoint has {params.config.n_classes} classes, dataset {ds.n_classes}"
        )
    sequences = training.variant_sequences(ds, header["variant"])
    return model.forward(params, sequences[test_idx], ds.metadata[test_idx])


def _ensemble_probs(args, ds, test_idx) -> np.ndarray:
    probs = []
    for path in (args.dir_ckpt, args.time_ckpt):
        if path is not None:
            probs.append(_score_checkpoint(path, ds, test_idx))
    if len(probs) == 2:
        return ensemble.average_softmax(probs[0], probs[1], ds.classes, ds.classes)
    return probs[0]


def _cmd_evaluate(args) -> None:
    ds = dataset_mod.load_dataset(args.dataset)
    test_idx = ds.split_indices("test")
    labels = ds.labels[test_idx]
    probs = _ensemble_probs(args, ds, test_idx)
    if args.setting == "closed":
        if np.any(labels >= ds.n_mon):
            raise ValueError("closed-world evaluation requires monitored test labels only")
        preds = ensemble.apply_threshold(probs, 0.0, None)
        report = metrics.closed_world_report(preds, labels)
    else:
        preds = ensemble.apply_threshold(probs, args.threshold, ds.n_mon)
        report = metrics.open_world_report(preds, labels, ds.n_mon, args.threshold)
    report_path = Path(args.report)
    report_path.write_text(report.to_json(), encoding="utf-8")
    csv_path = report_path.with_suffix(".predictions.csv")
    csv_path.write_text(
        ensemble.predictions_csv(probs, labels, preds, report.threshold), encoding="utf-8"
    )
    print(report.to_json().strip(), file=sys.stderr)


def _cmd_curve(args) -> None:
    ds = dataset_mod.load_dataset(args.dataset)
    test_idx = ds.split_indices("test")
    probs = _ensemble_probs(args, ds, test_idx)
    reports = metrics.tpr_fpr_curve(probs, ds.labels[test_idx], args.thresholds, ds.n_mon)
    Path(args.out).write_text(metrics.curve_csv(reports), encoding="utf-8")
    print(f"wrote {len(reports)} curve points to {args.out}", file=sys.stderr)


def _cmd_defend(args) -> None:
    corpus = traces.load_corpus(args.corpus, traces.infer_n_mon(args.corpus))
    config = defense.DefenseConfig(
        rho_out=args.rho_out, rho_in=args.rho_in, pad_multiple=args.pad_multiple
    )
    defended, summary = defense.defend_corpus(corpus, config)
    traces.save_corpus(defended, args.out)
    Path(args.overhead_report).write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(json.dumps(summary, sort_keys=True), file=sys.stderr)


def _ascending_floats(text: str) -> list[float]:
    values = [float(part) for part in text.split(",") if part.strip() != ""]
    if not values:
        raise argparse.ArgumentTypeError("need at least one threshold")
    if any(b < a for a, b in zip(values, values[1:])):
        raise argparse.ArgumentTypeError("thresholds must be sorted ascending")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wfbench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic labeled corpus")
    p.add_argument("--sites", type=int, required=True)
    p.add_argument("--traces", type=int, required=True, help="traces per monitored site")
    p.add_argument("--unmon", type=int, default=0, help="number of unmonitored traces")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--separability", choices=["easy", "hard"], default="easy")
    p.add_argument("--out", required=True, help="corpus directory to create")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("extract", help="build and persist the processed dataset")
    p.add_argument("--corpus", required=True)
    p.add_argument("--n-mon", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--unmon-train", type=int, default=0)
    p.add_argument("--unmon-test", type=int, default=0)
    p.add_argument("--out", required=True, help="dataset archive file (.npz)")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("train", help="train one model variant")
    p.add_argument("--dataset", required=True)
    p.add_argument("--variant", choices=list(training.VARIANTS), required=True)
    p.add_argument("--out", required=True, help="checkpoint file (.npz)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-epochs", type=int, default=150)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--initial-lr", type=float, default=0.001)
    p.add_argument("--decay-patience", type=int, default=5)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="score the test split and write a report")
    p.add_argument("--dataset", required=True)
    p.add_argument("--dir-ckpt")
    p.add_argument("--time-ckpt")
    p.add_argument("--threshold", type=float, default=0.0)
    p.add_argument("--setting", choices=["closed", "open"], required=True)
    p.add_argument("--report", required=True, help="report JSON path")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("curve", help="TPR/FPR trade-off over thresholds")
    p.add_argument("--dataset", required=True)
    p.add_argument("--dir-ckpt")
    p.add_argument("--time-ckpt")
    p.add_argument("--thresholds", type=_ascending_floats, required=True)
    p.add_argument("--out", required=True, help="curve CSV path")
    p.set_defaults(func=_cmd_curve)

    p = sub.add_parser("defend", help="apply the constant-rate defense to a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--rho-out", type=float, default=defense.DEFAULT_RHO_OUT)
    p.add_argument("--rho-in", type=float, default=defense.DEFAULT_RHO_IN)
    p.add_argument("--pad-multiple", type=int, default=defense.DEFAULT_PAD_MULTIPLE)
    p.add_argument("--out", required=True, help="defended corpus directory")
    p.add_argument("--overhead-report", required=True, help="overhead summary JSON path")
    p.set_defaults(func=_cmd_defend)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in ("evaluate", "curve") and args.dir_ckpt is None and args.time_ckpt is None:
        parser.error("need --dir-ckpt, --time-ckpt, or both")
    if args.command == "evaluate" and args.setting == "closed" and args.threshold != 0.0:
        parser.error("closed-world evaluation takes no threshold")
    if args.command == "evaluate" and not 0.0 <= args.threshold <= 1.0:
        parser.error("threshold must lie in [0, 1]")
    try:
        args.func(args)
    except Exception as err:  # runtime failure contract: code 1, one JSON line
        print(
            json.dumps({"error": type(err).__name__, "message": str(err)}),
            file=sys.stderr,
        )
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
