import json
import subprocess
import sys

import numpy as np
import pytest

from csiratio.cli import main
from csiratio.io import read_csi_record, read_truth, validate_results


@pytest.fixture(scope="module")
def record(tmp_path_factory):
    d = tmp_path_factory.mktemp("sim")
    out = d / "run.csv"
    assert main(["simulate", "--seed", "7", "--out", str(out)]) == 0
    return out


def write_config(path, data):
    path.write_text(json.dumps(data))
    return path


def test_simulate_shape_and_sidecar(record):
    stream = read_csi_record(record)
    assert stream.values.shape == (6000, 2, 30)
    truth = read_truth(record.with_name("run.truth.json"))
    assert truth["rate_bpm"] == 18.2 and truth["duration"] == 60.0


def test_simulate_is_byte_identical(tmp_path):
    for name in ("a", "b"):
        assert main(["simulate", "--seed", "3", "--duration", "13", "--out", str(tmp_path / f"{name}.csv.gz")]) == 0
    assert (tmp_path / "a.csv.gz").read_bytes() == (tmp_path / "b.csv.gz").read_bytes()
    assert (tmp_path / "a.truth.json").read_bytes() == (tmp_path / "b.truth.json").read_bytes()


def test_no_target_sidecar(tmp_path):
    cfg = write_config(tmp_path / "c.json", {"simulation": {"dynamic_amplitude": [0, 0], "snr_db": None}})
    assert main(["simulate", "--config", str(cfg), "--duration", "2", "--out", str(tmp_path / "r.csv")]) == 0
    assert read_truth(tmp_path / "r.truth.json")["target"] == "no target"


def test_estimate_matches_truth(record, tmp_path):
    out = tmp_path / "res.jsonl"
    assert main(["estimate", "--in", str(record), "--out", str(out)]) == 0
    recs = validate_results(out.read_text().splitlines())
    assert len(recs) == 49
    assert [r["timestamp"] for r in recs] == sorted(r["timestamp"] for r in recs)
    err = [abs(r["rate_bpm"] - 18.2) for r in recs]
    assert np.mean(err) < 0.5


def test_estimate_to_stdout_with_overrides(record, capsys):
    assert main(["estimate", "--in", str(record), "--theta-step", "0.0628", "--gate", "0.8", "--band", "12,30"]) == 0
    recs = validate_results(capsys.readouterr().out.splitlines())
    assert all(12 <= r["rate_bpm"] <= 30 for r in recs if r["status"] == "ok")


def test_motion_event_windows(tmp_path):
    cfg = write_config(tmp_path / "c.json", {"simulation": {"duration": 30, "motion_events": [[14, 15.5, 0.5]]}})
    rec = tmp_path / "m.csv.gz"
    assert main(["simulate", "--config", str(cfg), "--seed", "2", "--out", str(rec)]) == 0
    out = tmp_path / "m.jsonl"
    assert main(["estimate", "--in", str(rec), "--config", str(cfg), "--out", str(out)]) == 0
    for r in validate_results(out.read_text().splitlines()):
        overlaps = r["timestamp"] < 15.5 and r["end_time"] > 14
        assert r["status"] == ("non_stationary" if overlaps else "ok")


def test_truncated_record(record, tmp_path, capsys):
    lines = record.read_text().splitlines(keepends=True)
    bad = tmp_path / "bad.csv"
    bad.write_text("".join(lines[: 6 + 60 * 30 + 7]))
    assert main(["estimate", "--in", str(bad)]) == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "malformed_record" and err["line"] == 6 + 60 * 30 + 1
    assert "truncated" in err["message"]


def test_missing_file(capsys):
    assert main(["estimate", "--in", "/nonexistent/x.csv"]) == 2
    assert "error" in json.loads(capsys.readouterr().err)


def test_bad_config(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json", {"estimator": {"gate": 2}})
    assert main(["verify-model", "--config", str(cfg)]) == 2
    assert "gate" in json.loads(capsys.readouterr().err)["message"]


def test_verify_model(tmp_path):
    out = tmp_path / "report.json"
    assert main(["verify-model", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["passed"]
    boundary = [c for c in report["checks"] if "boundary" in c["name"]]
    assert boundary[0]["status"] == "indeterminate"


def test_verify_failure_exit_code(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json", {"verify": {"n_random": 2, "partial_arc_tolerance": 0.01}})
    assert main(["verify-model", "--config", str(cfg)]) == 1
    assert json.loads(capsys.readouterr().out)["passed"] is False


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "csiratio", "verify-model", "--out", str(tmp_path / "r.json")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    bad = subprocess.run([sys.executable, "-m", "csiratio", "estimate"], capture_output=True, text=True)
    assert bad.returncode == 2
