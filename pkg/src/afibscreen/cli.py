"""Command-line entry point: ``afibscreen <command> [options]``.

Exit codes: 0 success, 1 usage error, 2 data or file-format error,
3 numeric failure (for example a single-class training set).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import formats
from .classifier import LABEL_NAMES, fit, load_model, model_json, predict_proba
from .errors import AfibError, NumericError
from .evaluation import forward_feature_selection, kfold_cv
from .features import FEATURE_NAMES, extract_features
from .preprocess import DEFAULT_RATES, SignalKind, ibis_from_recording
from .synth import Rhythm, gen_ibis, gen_waveform, random_spec

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
RECORDING_SUFFIXES = (".csv", ".txt")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _recording_paths(path: Path) -> list[Path]:
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.suffix in RECORDING_SUFFIXES and p.is_file())
        if not files:
            raise AfibError(f"{path}: no .csv or .txt recordings")
        return files
    if not path.exists():
        raise FileNotFoundError(f"{path}: no such file")
    return [path]


def _intervals_for(path: Path, kind: SignalKind, rate: float | None) -> np.ndarray:
    if path.suffix == ".txt":
        return formats.read_intervals(path)
    rec = formats.read_signal_csv(path, kind)
    return ibis_from_recording(rec, rate).intervals


def _feature_table(paths, args) -> np.ndarray:
    kind = SignalKind.parse(args.kind)
    rows = []
    for p in paths:
        try:
            ivals = _intervals_for(p, kind, args.rate)
            rows.append(np.asarray(extract_features(ivals, n=args.deriv_order, bins=args.bins)))
        except AfibError as exc:
            raise type(exc)(f"{p.name}: {exc}") from exc
    return np.vstack(rows)


def _emit(text: str, output: str | None) -> None:
    if output:
        formats.atomic_write(output, text)
    else:
        sys.stdout.write(text)


def cmd_synth(args) -> None:
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    labels = {}
    seed = args.seed
    for kind in (Rhythm.SINUS, Rhythm.AFIB):
        for _ in range(args.count):
            spec = random_spec(kind, seed, args.duration)
            I = gen_ibis(spec)
            name = f"{kind.name.lower()}_{seed:05d}"
            if args.format == "intervals":
                formats.write_intervals(I.intervals, out / f"{name}.txt")
            else:
                rate = args.rate or DEFAULT_RATES[SignalKind.parse(args.kind)]
                rec = gen_waveform(I, args.kind, rate, snr_db=args.snr, drift=args.drift, seed=seed)
                formats.write_signal_csv(rec, out / f"{name}.csv")
            labels[name] = int(kind)
            seed += 1
    formats.write_manifest(labels, out / "labels.csv")


def cmd_extract(args) -> None:
    paths = _recording_paths(Path(args.input))
    paths = [p for p in paths if p.name != "labels.csv"]
    X = _feature_table(paths, args)
    names = [p.stem for p in paths]
    ys = None
    if args.labels:
        manifest = formats.read_manifest(args.labels)
        missing = [n for n in names if n not in manifest]
        if missing:
            raise formats.FormatError(f"no label for {missing[:3]}")
        ys = [manifest[n] for n in names]
    _emit(formats.feature_csv_text(names, X, FEATURE_NAMES, ys), args.output)


def _labeled(args):
    manifest = formats.read_manifest(args.labels) if args.labels else None
    data = formats.read_feature_csv(args.input, manifest)
    if isinstance(data, tuple):
        raise formats.FormatError(f"{args.input}: no label column; pass --labels")
    return data


def cmd_train(args) -> None:
    model = fit(_labeled(args), l2=args.l2, threshold=args.threshold)
    formats.atomic_write(args.output, model_json(model))


def cmd_classify(args) -> None:
    model = load_model(args.model)
    paths = _recording_paths(Path(args.input))
    paths = [p for p in paths if p.name != "labels.csv"]
    X = _feature_table(paths, args)
    proba = np.atleast_1d(predict_proba(model, X))
    threshold = model.threshold if args.threshold is None else args.threshold
    rows = [
        [p.stem, LABEL_NAMES[int(pr >= threshold)], float(pr)] for p, pr in zip(paths, proba)
    ]
    _emit(formats.rows_to_csv(["name", "label", "probability"], rows), args.output)


def cmd_eval(args) -> None:
    result = kfold_cv(_labeled(args), k=args.k, l2=args.l2, seed=args.seed, threshold=args.threshold)
    _emit(formats.metrics_csv_text(result), args.output)
    if args.roc:
        formats.atomic_write(args.roc, formats.roc_csv_text(result.roc))


def cmd_select(args) -> None:
    data = _labeled(args)
    pool = {name: data.features[:, j] for j, name in enumerate(data.feature_names)}
    steps = forward_feature_selection(pool, data.labels, k=args.k, l2=args.l2, seed=args.seed)
    rows = [[i + 1, s.feature, s.auc] for i, s in enumerate(steps)]
    _emit(formats.rows_to_csv(["step", "feature", "auc"], rows), args.output)


def _probability(text: str) -> float:
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError("must lie strictly between 0 and 1")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _non_negative(text: str) -> float:
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="afibscreen", description="AFib vs sinus rhythm screening from beat intervals.")
    sub = parser.add_subparsers(dest="command", required=True)

    def signal_opts(p):
        p.add_argument("--kind", choices=["ecg", "ppg"], default="ppg")
        p.add_argument("--rate", type=float, default=None, help="resampling rate in Hz")

    def feature_opts(p):
        p.add_argument("--bins", type=_positive_int, default=2)
        p.add_argument("--deriv-order", type=_positive_int, default=5)

    p = sub.add_parser("synth", help="generate labeled synthetic recordings")
    p.add_argument("--output", required=True, help="output directory")
    p.add_argument("--count", type=_positive_int, default=100, help="recordings per class")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--format", choices=["signal", "intervals"], default="signal")
    p.add_argument("--duration", type=float, default=30.0)
    p.add_argument("--snr", type=float, default=None, help="noise level in dB (default: none)")
    p.add_argument("--drift", type=float, default=0.0)
    signal_opts(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="recording(s) -> feature CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--output")
    p.add_argument("--labels", help="name,label manifest to append a label column")
    signal_opts(p)
    feature_opts(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="feature CSV -> model JSON")
    p.add_argument("--input", required=True)
    p.add_argument("--labels")
    p.add_argument("--output", required=True)
    p.add_argument("--l2", type=_non_negative, default=1.0)
    p.add_argument("--threshold", type=_probability, default=0.5)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", help="model + recording(s) -> label,probability CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output")
    p.add_argument("--threshold", type=_probability, default=None)
    signal_opts(p)
    feature_opts(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("eval", help="k-fold cross-validation of a labeled feature CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--labels")
    p.add_argument("--output")
    p.add_argument("--roc", help="write the pooled ROC curve here")
    p.add_argument("--k", type=_positive_int, default=5)
    p.add_argument("--l2", type=_non_negative, default=1.0)
    p.add_argument("--threshold", type=_probability, default=0.5)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("select", help="greedy wrapper feature selection")
    p.add_argument("--input", required=True)
    p.add_argument("--labels")
    p.add_argument("--output")
    p.add_argument("--k", type=_positive_int, default=5)
    p.add_argument("--l2", type=_non_negative, default=1.0)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_select)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except NumericError as exc:
        print(f"afibscreen {args.command}: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (AfibError, OSError) as exc:
        print(f"afibscreen {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
