import csv
import json
import os
import subprocess
import sys

import pytest

from lambdalab.cli import main


def write_cfg(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps({"version": 1, **doc}))
    return str(path)


def test_verify_default(tmp_path, capsys):
    assert main(["verify", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "verify_report.json").read_text())
    assert report["pass"]
    groups = {c["group"] for c in report["checks"]}
    assert len(groups) >= 6
    assert all(c["pass"] for c in report["checks"])


def test_verify_zero_tolerance_names_failures(tmp_path, capsys):
    assert main(["verify", "--out", str(tmp_path), "--tolerance", "0"]) == 1
    report = json.loads((tmp_path / "verify_report.json").read_text())
    failed = [c["name"] for c in report["checks"] if not c["pass"]]
    assert failed
    assert "FAIL" in capsys.readouterr().out


def test_verify_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["verify", "--out", str(a), "--seed", "5"])
    main(["verify", "--out", str(b), "--seed", "5"])
    assert (a / "verify_report.json").read_text() == (b / "verify_report.json").read_text()


def test_config_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["verify", "--config", str(bad), "--out", str(tmp_path)]) == 2
    wrong = tmp_path / "v2.json"
    wrong.write_text(json.dumps({"version": 2}))
    assert main(["verify", "--config", str(wrong), "--out", str(tmp_path)]) == 2
    assert main(["verify", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 2
    assert main(["nonsense"]) == 2


def test_flow_sphere(tmp_path):
    cfg = write_cfg(tmp_path, {"mesh": {"kind": "sphere", "r": 1.0, "level": 2}, "t_end": 0.1, "snapshots": True, "record_every": 10})
    assert main(["flow", "--config", cfg, "--out", str(tmp_path)]) == 0
    with open(tmp_path / "flow_trace.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["t", "area_weighted", "volume_weighted", "alpha", "max_speed", "lambda_residual"]
    V = [float(r["volume_weighted"]) for r in rows]
    assert max(abs(v - V[0]) for v in V) <= 1e-10 * abs(V[0])
    assert len(list(tmp_path.glob("flow_*.obj"))) == len(rows)
    summary = json.loads((tmp_path / "flow_summary.json").read_text())
    assert summary["pass"] and summary["constant_H_input"]


def test_flow_ellipsoid(tmp_path):
    cfg = write_cfg(tmp_path, {"mesh": {"kind": "ellipsoid", "a": 1, "b": 1, "c": 1.3, "level": 2}, "t_end": 0.05})
    assert main(["flow", "--config", cfg, "--out", str(tmp_path)]) == 0
    with open(tmp_path / "flow_trace.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert all(float(r["area_weighted"]) > 0 for r in rows)


def test_flow_large_dt_aborts(tmp_path):
    cfg = write_cfg(tmp_path, {"mesh": {"kind": "sphere", "r": 1.0, "level": 2}, "t_end": 0.1, "dt": 1.0})
    assert main(["flow", "--config", cfg, "--out", str(tmp_path)]) == 3
    assert (tmp_path / "flow_trace.csv").exists()


def test_flow_open_mesh_is_config_error(tmp_path):
    cfg = write_cfg(tmp_path, {"mesh": {"kind": "cylinder_segment", "r": 1.0, "half_length": 2.0, "res": 16}})
    assert main(["flow", "--config", cfg, "--out", str(tmp_path)]) == 2


def test_classify_builtin(tmp_path):
    assert main(["classify", "--out", str(tmp_path)]) == 0
    reports = json.loads((tmp_path / "classify_reports.json").read_text())
    tags = {r["case_tag"] for r in reports}
    assert {"SphereSmall", "Euclidean", "Cyl1", "CylN1", "CylK", "GapViolated"} <= tags


def test_classify_grid_with_violation(tmp_path):
    cfg = write_cfg(tmp_path, {"grid": [{"kind": "Sphere", "n": 2, "k": 2, "r": 2.0}]})
    assert main(["classify", "--config", cfg, "--out", str(tmp_path)]) == 0
    (rep,) = json.loads((tmp_path / "classify_reports.json").read_text())
    assert rep["case_tag"] == "GapViolated"


def test_classify_grid_product(tmp_path):
    cfg = write_cfg(tmp_path, {"grid": {"kinds": ["Sphere", "Cylinder"], "n": [3], "r": [1.0, 2.0]}})
    assert main(["classify", "--config", cfg, "--out", str(tmp_path)]) == 0
    assert len(json.loads((tmp_path / "classify_reports.json").read_text())) == 6


def test_classify_empty_grid(tmp_path):
    cfg = write_cfg(tmp_path, {"grid": []})
    assert main(["classify", "--config", cfg, "--out", str(tmp_path)]) == 2


def test_growth_analytic(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {"surface": {"kind": "Cylinder", "n": 2, "k": 1, "r": 1.0}, "radii": [2, 4, 8, 16, 32]})
    assert main(["growth", "--config", cfg, "--out", str(tmp_path)]) == 0
    fit = json.loads((tmp_path / "growth_fit.json").read_text())
    assert fit["d"] == pytest.approx(1.0, abs=0.05)
    assert (tmp_path / "growth_samples.csv").read_text().startswith("r,area")


def test_growth_mesh(tmp_path):
    cfg = write_cfg(
        tmp_path,
        {"mesh": {"kind": "cylinder_segment", "r": 1.0, "half_length": 32.0, "res": 48}, "radii": [2, 4, 8, 16, 32]},
    )
    assert main(["growth", "--config", cfg, "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "growth_fit.json").read_text())["d"] == pytest.approx(1.0, abs=0.1)


def test_growth_radius_below_one(tmp_path):
    cfg = write_cfg(tmp_path, {"radii": [0.5, 2, 4, 8]})
    assert main(["growth", "--config", cfg, "--out", str(tmp_path)]) == 2


def test_entry_point_with_thread_limit(tmp_path):
    env = {**os.environ, "LAMBDALAB_THREADS": "1"}
    proc = subprocess.run(
        [sys.executable, "-m", "lambdalab", "classify", "--out", str(tmp_path)], env=env, capture_output=True, text=True
    )
    assert proc.returncode == 0, proc.stderr
    env["LAMBDALAB_THREADS"] = "zero"
    proc = subprocess.run(
        [sys.executable, "-m", "lambdalab", "classify", "--out", str(tmp_path)], env=env, capture_output=True, text=True
    )
    assert proc.returncode == 2
