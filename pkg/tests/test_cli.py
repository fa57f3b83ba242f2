import csv
import subprocess
import sys

import numpy as np
import pytest

from afibscreen import formats
from afibscreen.cli import main
from afibscreen.preprocess import RawRecording


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_extract_constant_interval_file(tmp_path, capsys):
    path = tmp_path / "flat.txt"
    path.write_text("800\n" * 40)
    assert main(["extract", "--input", str(path)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "name,f1,f2,f3,f4,f5"
    row = dict(zip(out[0].split(","), out[1].split(",")))
    assert float(row["f1"]) == 0.0 and float(row["f2"]) == 0.0 and row["f4"] == "20"


def test_extract_honours_feature_flags(tmp_path, capsys):
    path = tmp_path / "alt.txt"
    path.write_text("".join(f"{800 + 10 * (k % 2)}\n" for k in range(12)))
    assert main(["extract", "--input", str(path), "--deriv-order", "1", "--bins", "4"]) == 0
    row = capsys.readouterr().out.splitlines()[1].split(",")
    x = np.array([800 + 10 * (k % 2) for k in range(12)], dtype=float)
    assert float(row[1]) == pytest.approx(np.std(np.diff(x)), rel=1e-12)
    # four bins, only the outer two occupied, each of width 2.5 ms
    assert float(row[2]) == pytest.approx(-np.log(0.5 / 2.5), rel=1e-12)


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    data = root / "data"
    assert main(["synth", "--output", str(data), "--count", "30", "--seed", "1",
                 "--snr", "20", "--drift", "0.5"]) == 0
    feats = root / "features.csv"
    assert main(["extract", "--input", str(data), "--labels", str(data / "labels.csv"),
                 "--output", str(feats)]) == 0
    return root, data, feats


def test_synth_outputs(pipeline):
    _, data, _ = pipeline
    labels = formats.read_manifest(data / "labels.csv")
    assert len(labels) == 60 and sum(labels.values()) == 30
    rec = formats.read_signal_csv(data / "afib_00031.csv")
    assert isinstance(rec, RawRecording) and rec.duration > 20


def test_train_eval_select(pipeline):
    root, data, feats = pipeline
    rows = read_rows(feats)
    assert len(rows) == 60 and list(rows[0]) == ["name", "f1", "f2", "f3", "f4", "f5", "label"]

    model = root / "model.json"
    assert main(["train", "--input", str(feats), "--output", str(model)]) == 0
    out = root / "classified.csv"
    assert main(["classify", "--model", str(model), "--input", str(data), "--output", str(out)]) == 0
    classified = read_rows(out)
    assert [r["name"] for r in classified] == sorted(r["name"] for r in rows)
    truth = formats.read_manifest(data / "labels.csv")
    hits = sum((r["label"] == "AFib") == bool(truth[r["name"]]) for r in classified)
    assert hits >= 57

    metrics, roc = root / "metrics.csv", root / "roc.csv"
    assert main(["eval", "--input", str(feats), "--output", str(metrics), "--roc", str(roc),
                 "--seed", "0"]) == 0
    m = read_rows(metrics)
    assert [r["fold"] for r in m] == ["0", "1", "2", "3", "4", "pooled"]
    assert float(m[-1]["auc"]) >= 0.95
    roc_rows = read_rows(roc)
    assert list(roc_rows[0]) == ["threshold", "fpr", "tpr"]
    assert roc_rows[0]["threshold"] == "inf" and float(roc_rows[-1]["tpr"]) == 1.0

    report = root / "select.csv"
    assert main(["select", "--input", str(feats), "--output", str(report), "--seed", "0"]) == 0
    steps = read_rows(report)
    assert steps and steps[0]["step"] == "1"


def test_outputs_are_reproducible(pipeline, tmp_path):
    _, data, feats = pipeline
    again = tmp_path / "features.csv"
    assert main(["extract", "--input", str(data), "--labels", str(data / "labels.csv"),
                 "--output", str(again)]) == 0
    assert again.read_bytes() == feats.read_bytes()
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert main(["eval", "--input", str(feats), "--output", str(path), "--seed", "9"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_feature_csv_round_trip(pipeline):
    _, data, feats = pipeline
    labeled = formats.read_feature_csv(feats)
    text = formats.feature_csv_text(labeled.names, labeled.features, labeled.feature_names, labeled.labels)
    assert text == feats.read_text()


def test_synth_intervals_format(tmp_path, capsys):
    out = tmp_path / "ibis"
    assert main(["synth", "--output", str(out), "--count", "2", "--seed", "5", "--format", "intervals"]) == 0
    files = sorted(p.name for p in out.iterdir())
    assert files == ["afib_00007.txt", "afib_00008.txt", "labels.csv", "sinus_00005.txt", "sinus_00006.txt"]
    assert main(["extract", "--input", str(out)]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 5


def test_ecg_signal_extract(tmp_path, capsys):
    out = tmp_path / "ecg"
    assert main(["synth", "--output", str(out), "--count", "1", "--seed", "3", "--kind", "ecg"]) == 0
    assert main(["extract", "--input", str(out), "--kind", "ecg"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 3


def test_classify_missing_model(tmp_path, capsys):
    rec = tmp_path / "r.txt"
    rec.write_text("800\n" * 40)
    out = tmp_path / "out.csv"
    code = main(["classify", "--model", str(tmp_path / "nope.json"), "--input", str(rec),
                 "--output", str(out)])
    assert code == 2
    assert "nope.json" in capsys.readouterr().err
    assert not out.exists()
    assert list(tmp_path.iterdir()) == [rec]


def test_single_class_is_numeric_failure(tmp_path, capsys):
    feats = tmp_path / "f.csv"
    feats.write_text("name,f1,label\na,1,1\nb,2,1\n")
    assert main(["train", "--input", str(feats), "--output", str(tmp_path / "m.json")]) == 3
    assert "numeric" in capsys.readouterr().err
    assert not (tmp_path / "m.json").exists()


def test_bad_signal_file(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("time,value\n0,1\n")
    assert main(["extract", "--input", str(bad)]) == 2
    assert "bad.csv" in capsys.readouterr().err


def test_too_short_recording(tmp_path):
    short = tmp_path / "short.txt"
    short.write_text("800\n" * 5)
    assert main(["extract", "--input", str(short)]) == 2


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["bogus"],
        ["eval", "--input", "x.csv"],  # --seed is mandatory
        ["train", "--input", "x.csv", "--output", "m.json", "--threshold", "1.5"],
        ["synth", "--output", "d", "--seed", "1", "--count", "0"],
    ],
)
def test_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 1


def test_module_entry_point(tmp_path):
    path = tmp_path / "flat.txt"
    path.write_text("800\n" * 40)
    res = subprocess.run([sys.executable, "-m", "afibscreen", "extract", "--input", str(path)],
                         capture_output=True, text=True, check=True)
    assert res.stdout.startswith("name,f1,f2,f3,f4,f5\nflat,0.0,0.0,")


def test_signal_csv_round_trip(tmp_path):
    t = np.cumsum(np.full(50, 1 / 30))
    rec = RawRecording(t, np.sin(t) * 1e-3 + 1 / 3, "ppg", 30.0)
    path = tmp_path / "s.csv"
    formats.write_signal_csv(rec, path)
    back = formats.read_signal_csv(path)
    assert back.times.tobytes() == rec.times.tobytes()
    assert back.values.tobytes() == rec.values.tobytes()


def test_interval_file_round_trip(tmp_path):
    x = np.random.default_rng(0).uniform(300, 1500, size=30)
    path = tmp_path / "i.txt"
    formats.write_intervals(x, path)
    assert formats.read_intervals(path).tobytes() == x.tobytes()
