"""Plain-text file formats.

* signal CSV: header ``t,v``, one sample per row (seconds, arbitrary units)
* interval file: one interval in ms per line
* feature CSV: ``name,f1,...,f5`` with an optional trailing ``label`` column
* label manifest: ``name,label`` with label ``0``/``1`` or ``sinus``/``afib``
* metrics CSV: ``fold,sensitivity,specificity,accuracy,auc``
* ROC CSV: ``threshold,fpr,tpr``

Floats are written with ``repr`` (shortest exact round-trip), which keeps
outputs byte-for-byte reproducible. Writers go through a temporary file
and an atomic rename so a failed run never leaves partial output behind.
"""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .classifier import LabeledSet
from .errors import FormatError
from .evaluation import CVResult, RocCurve
from .features import INTEGER_FEATURES
from .preprocess import RawRecording, SignalKind


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def atomic_write(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def rows_to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
    return buf.getvalue()


def _float(text: str, where: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise FormatError(f"{where}: not a number: {text!r}") from None


def read_signal_csv(path, kind: SignalKind | str = SignalKind.PPG, nominal_rate: float | None = None) -> RawRecording:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["t", "v"]:
            raise FormatError(f"{path}: expected header 't,v', got {header!r}")
        times, values = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise FormatError(f"{path}:{lineno}: expected 2 columns")
            times.append(_float(row[0], f"{path}:{lineno}"))
            values.append(_float(row[1], f"{path}:{lineno}"))
    kind = SignalKind.parse(kind)
    if nominal_rate is None:
        nominal_rate = (len(times) - 1) / (times[-1] - times[0]) if len(times) > 1 and times[-1] > times[0] else 0.0
    return RawRecording(np.array(times), np.array(values), kind, float(nominal_rate))


def signal_csv_text(rec: RawRecording) -> str:
    return rows_to_csv(["t", "v"], zip(rec.times, rec.values))


def write_signal_csv(rec: RawRecording, path) -> None:
    atomic_write(path, signal_csv_text(rec))


def read_intervals(path) -> np.ndarray:
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if line:
                out.append(_float(line, f"{path}:{lineno}"))
    if not out:
        raise FormatError(f"{path}: no intervals")
    return np.array(out)


def write_intervals(intervals, path) -> None:
    atomic_write(path, "".join(fmt(float(v)) + "\n" for v in np.asarray(intervals).ravel()))


def parse_label(text: str) -> int:
    t = text.strip().lower()
    if t in ("1", "afib", "af"):
        return 1
    if t in ("0", "sinus", "sr"):
        return 0
    raise FormatError(f"unknown label {text!r}")


def read_manifest(path) -> dict[str, int]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"name", "label"} <= set(reader.fieldnames):
            raise FormatError(f"{path}: expected columns 'name,label'")
        return {row["name"]: parse_label(row["label"]) for row in reader}


def write_manifest(labels: dict[str, int], path) -> None:
    atomic_write(path, rows_to_csv(["name", "label"], sorted(labels.items())))


def feature_csv_text(names, X, feature_names, labels=None) -> str:
    header = ["name", *feature_names] + (["label"] if labels is not None else [])
    integer = [f in INTEGER_FEATURES for f in feature_names]
    rows = []
    for i, name in enumerate(names):
        row = [name, *(int(v) if is_int else v for v, is_int in zip(X[i], integer))]
        if labels is not None:
            row.append(int(labels[i]))
        rows.append(row)
    return rows_to_csv(header, rows)


def read_feature_csv(path, labels: dict[str, int] | None = None) -> LabeledSet | tuple:
    """Read a feature table.

    Returns a :class:`LabeledSet` when labels are available (a ``label``
    column or the ``labels`` manifest), else ``(names, X, feature_names)``.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "name":
            raise FormatError(f"{path}: expected a header starting with 'name'")
        has_label = header[-1] == "label"
        feature_names = tuple(header[1:-1] if has_label else header[1:])
        if not feature_names:
            raise FormatError(f"{path}: no feature columns")
        names, rows, ys = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise FormatError(f"{path}:{lineno}: expected {len(header)} columns")
            names.append(row[0])
            cells = row[1:-1] if has_label else row[1:]
            rows.append([_float(c, f"{path}:{lineno}") for c in cells])
            if has_label:
                ys.append(parse_label(row[-1]))
    X = np.array(rows, dtype=float).reshape(len(rows), len(feature_names))
    if labels is not None:
        missing = [n for n in names if n not in labels]
        if missing:
            raise FormatError(f"no label for {missing[:3]}")
        ys = [labels[n] for n in names]
    elif not has_label:
        return names, X, feature_names
    return LabeledSet(X, np.array(ys, dtype=int), tuple(names), feature_names)


def metrics_csv_text(result: CVResult) -> str:
    rows = []
    for m in [*result.folds, result.pooled]:
        fold = "pooled" if m.fold < 0 else str(m.fold)
        rows.append([fold, m.sensitivity, m.specificity, m.accuracy, m.auc])
    return rows_to_csv(["fold", "sensitivity", "specificity", "accuracy", "auc"], rows)


def roc_csv_text(roc: RocCurve) -> str:
    return rows_to_csv(["threshold", "fpr", "tpr"], zip(roc.thresholds, roc.fpr, roc.tpr))


def read_metrics_csv(path) -> dict[str, dict[str, float]]:
    with open(path, newline="") as fh:
        return {
            row["fold"]: {k: float(v) for k, v in row.items() if k != "fold"}
            for row in csv.DictReader(fh)
        }
