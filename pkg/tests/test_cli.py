"""End-to-end runs of the sweepkit command line against bundled scenes."""
import json

import numpy as np
import pytest

import corpus
from sweepkit.cli import main
from sweepkit.sweep import evaluate


def _read_csv(path):
    lines = path.read_text().strip().splitlines()
    header = lines[0].split(",")
    rows = np.array([[float(x) for x in line.split(",")] for line in lines[1:]])
    return header, rows


def test_detect_example1_flags_lsi(tmp_path):
    out = tmp_path / "report.json"
    code = main(["detect", "--scene", "cylinder_example1", "--out", str(out)])
    assert code == 1
    doc = json.loads(out.read_text())
    assert doc["schema"] == 1
    assert doc["verdict"] == "type1-lsi"
    assert doc["minTheta"] <= -2.3
    assert doc["config"]["surface"]["kind"] == "cylinder"
    assert doc["excised"]["count"] > 0


def test_detect_translating_sphere_clean(tmp_path):
    out = tmp_path / "report.json"
    code = main(["detect", "--scene", "translating_sphere", "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["verdict"] == "clean"
    assert abs(doc["minTheta"] - 1.0) < 1e-9
    assert doc["excised"] == {"count": 0, "bbox": None}


def test_detect_is_byte_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["detect", "--scene", "translating_sphere", "--out", str(a)]) == 0
    assert main(["detect", "--scene", "translating_sphere", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_trace_rows_lie_on_funnel(tmp_path):
    out = tmp_path / "trace.csv"
    code = main(["trace", "--scene", "ellipsoid_example2", "--time", "0.8",
                 "--out", str(out)])
    assert code == 0
    header, rows = _read_csv(out)
    assert header == ["u", "v", "t", "x", "y", "z"]
    assert len(rows) > 50
    scn = corpus.build("ellipsoid_example2")
    assert np.all(rows[:, 2] == 0.8)
    ev = evaluate(scn, rows[:, 0], rows[:, 1], 0.8, check_domain=False)
    assert np.max(np.abs(np.asarray(ev.funnel))) <= scn.funnel_tol
    assert np.max(np.linalg.norm(np.asarray(ev.point) - rows[:, 3:6], axis=1)) <= 1e-12


def test_theta_field_columns_are_consistent(tmp_path, monkeypatch):
    out1, out2 = tmp_path / "f1.csv", tmp_path / "f2.csv"
    monkeypatch.setenv("SWEEPKIT_THREADS", "1")
    assert main(["theta-field", "--scene", "circling_sphere", "--nt", "4",
                 "--out", str(out1)]) == 0
    monkeypatch.setenv("SWEEPKIT_THREADS", "3")
    assert main(["theta-field", "--scene", "circling_sphere", "--nt", "4",
                 "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    header, rows = _read_csv(out1)
    assert header == ["u", "v", "t", "theta", "lambdaDdot", "detD"]
    theta_col, lam_col = rows[:, 3], rows[:, 4]
    assert np.all(np.abs(theta_col - lam_col) <= 1e-8 * (1.0 + np.abs(theta_col)))
    assert np.all(np.isfinite(rows[:, 5]))


def test_mesh_translating_sphere_tube(tmp_path):
    obj = tmp_path / "tube.obj"
    code = main(["mesh", "--scene", "translating_sphere", "--nt", "32",
                 "--np", "32", "--out", str(obj)])
    assert code == 0
    verts, thetas, faces = [], [], 0
    for line in obj.read_text().splitlines():
        if line.startswith("v "):
            verts.append([float(x) for x in line.split()[1:]])
        elif line.startswith("# theta "):
            thetas.append(float(line.split()[-1]))
        elif line.startswith("f "):
            faces += 1
    verts = np.array(verts)
    assert len(verts) == 1024 and len(thetas) == 1024
    assert faces == 2 * 31 * 31
    radial = verts.copy()
    radial[:, 0] = 0.0  # sweep axis is x
    assert np.max(np.abs(np.linalg.norm(radial, axis=1) - 1.0)) <= 1e-8
    assert np.max(np.abs(np.array(thetas) - 1.0)) <= 1e-9
    header, rows = _read_csv(tmp_path / "tube.csv")
    assert header == ["vertex", "p", "t", "u", "v", "theta"]
    assert len(rows) == 1024


def test_eval_prints_point_and_derivatives(tmp_path, capsys):
    code = main(["eval", "--scene", "circling_sphere", "--param", "0.25",
                 "--time", "0.6"])
    assert code == 0
    line = capsys.readouterr().out.strip()
    values = np.array([float(x) for x in line.split(",")])
    assert values.shape == (9,) and np.all(np.isfinite(values))
    # the point sits on the torus envelope: distance 1 from the center path
    center = np.array([-3.0, 0.0, 0.0])
    planar = values[:3] - center
    planar[2] = 0.0
    ring = center + 3.0 * planar / np.linalg.norm(planar)
    assert abs(np.linalg.norm(values[:3] - ring) - 1.0) <= 1e-9


def test_error_paths_exit_two(tmp_path, capsys):
    assert main(["detect", "--scene", "no_such_scene"]) == 2
    assert "bundled" in capsys.readouterr().err
    bad = tmp_path / "bad.toml"
    bad.write_text("name = [unclosed\n")
    assert main(["detect", "--scene", str(bad)]) == 2
    skewed = tmp_path / "skewed.toml"
    skewed.write_text("""
name = "skewed"

[surface]
kind = "sphere"

[trajectory]
kind = "arc_translation"
radius = 2.0
angle = 1.0
e1 = [1.0, 0.0, 0.0]
e2 = [0.9, 0.1, 0.0]
""")
    assert main(["detect", "--scene", str(skewed)]) == 2
    assert main(["mesh", "--scene", "translating_sphere"]) == 2
    assert "--out" in capsys.readouterr().err


def test_scene_accepts_explicit_path(tmp_path, capsys):
    cfg = tmp_path / "ball.toml"
    cfg.write_text("""
name = "ball"

[surface]
kind = "sphere"

[trajectory]
kind = "line_translation"
velocity = [0.0, 0.0, 1.0]
""")
    code = main(["trace", "--scene", str(cfg), "--time", "0.3"])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "u,v,t,x,y,z"
    assert len(lines) > 30
