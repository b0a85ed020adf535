import json
import math

import numpy as np
import pytest

from ellipsoid_geodesics.cli import main


def run(tmp_path, capsys, *argv, name="out.csv"):
    out = tmp_path / name
    code = main([*argv, "-o", str(out)])
    return code, out, capsys.readouterr()


def read_csv(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    return header, lines[1:]


def test_simulate_generic(tmp_path, capsys):
    code, out, cap = run(tmp_path, capsys, "simulate", "--alphas", "0.333333,1,3,4", "--random",
                         "--seed", "7", "--t-end", "100", "--dt", "0.001")
    assert code == 0
    header, rows = read_csv(out)
    assert header[:9] == ["t", "x0", "x1", "x2", "x3", "y0", "y1", "y2", "y3"]
    assert any(h.startswith("drift_") for h in header)
    drift = float(cap.out.split("max relative drift:")[1].split()[0])
    assert drift <= 1e-8


def test_simulate_rejects_unsorted_alphas(tmp_path, capsys):
    code, _, cap = run(tmp_path, capsys, "simulate", "--alphas", "1,3,2,4", "--random")
    assert code == 2
    assert "nondecreasing" in cap.err


def test_simulate_sphere_reports_closure(tmp_path, capsys):
    code, _, cap = run(tmp_path, capsys, "simulate", "--alphas", "1,1,1,1", "--random", "--t-end", "7")
    assert code == 0
    closure = float(cap.out.split("closure error")[1].split(":")[-1].split()[0])
    assert closure <= 1e-8


def test_simulate_is_deterministic(tmp_path, capsys):
    args = ["simulate", "--alphas", "1,2,2,4", "--random", "--seed", "3", "--t-end", "2"]
    _, a, _ = run(tmp_path, capsys, *args, name="a.csv")
    _, b, _ = run(tmp_path, capsys, *args, name="b.csv")
    assert a.read_bytes() == b.read_bytes()
    sa = json.loads((tmp_path / "a.csv.config.json").read_text())
    sb = json.loads((tmp_path / "b.csv.config.json").read_text())
    sa.pop("output_path"), sb.pop("output_path")
    assert sa == sb
    assert sa["options"]["dt"] == 1e-3 and sa["h"] == 0.5


def test_simulate_explicit_start(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, "simulate", "--alphas", "1,1,1,1", "--p0", "1,0,0,0,0,1,0,0",
                       "--t-end", "1", "--stride", "1000")
    assert code == 0
    _, rows = read_csv(out)
    assert len(rows) == 2


def test_bifurcation_generic(tmp_path, capsys):
    code, out, cap = run(tmp_path, capsys, "bifurcation", "--alphas", "0.333333,1,3,4", "--format", "json",
                         name="d.json")
    assert code == 0
    data = json.loads(out.read_text())
    kinds = [c["kind"] for c in data["curves"]]
    assert kinds.count("subflow_line") == 4 and kinds.count("double_root_curve") == 1
    assert sum(p["corank"] == 2 for p in data["points"]) == 6
    assert sum(p["type"] == "degenerate" for p in data["points"]) == 2


def test_bifurcation_near_degenerate_keeps_topology(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, "bifurcation", "--alphas", "0.25,0.25003,1,2", "--format", "json",
                       name="d.json")
    assert code == 0
    data = json.loads(out.read_text())
    assert len(data["curves"]) == 5 and len(data["points"]) == 8


def test_bifurcation_symmetric_csv(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, "bifurcation", "--alphas", "1,2,2,4", "--samples", "9")
    assert code == 0
    header, rows = read_csv(out)
    assert header == ["curve_id", "label", "param", "j", "g", "type_tag"]
    points = {r.split(",")[1]: r.split(",") for r in rows if r.split(",")[2] == "nan"}
    assert float(points["corner +"][3]) == pytest.approx(math.sqrt(2))
    assert float(points["corner +"][4]) == pytest.approx(1.0)
    assert (float(points["focus-focus"][3]), float(points["focus-focus"][4])) == (0.0, 0.0)


def test_actions_grid_marks_outside_cells(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, "actions", "--alphas", "1,2,2,4", "--grid=-1.5:1.5:7,-1:2:7")
    assert code == 0
    header, rows = read_csv(out)
    assert header == ["h", "j", "g", "I1", "I2", "I3", "dI2_dj", "dI3_dj", "side", "status"]
    status = [r.split(",")[-1] for r in rows]
    assert len(rows) == 49
    assert "outside_image" in status and "ok" in status
    assert "pole_collision" in status  # the cell at (0, 0)


def test_monodromy_command(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, "monodromy", "--alphas", "1,2,2,4", "--h", "0.5",
                       "--loop", "0.5,0.5,64", name="m.json")
    assert code == 0
    data = json.loads(out.read_text())
    assert data["M"] == [[1, 0, 0], [2, 1, 0], [-2, 0, 1]]
    assert data["N"] == [[1, 0, 0], [0, 1, 0], [2, 0, 1]]
    assert (tmp_path / "m.json.config.json").exists()


def test_monodromy_wrong_symmetry_is_validation_error(tmp_path, capsys):
    code, _, _ = run(tmp_path, capsys, "monodromy", "--alphas", "1,2,3,4")
    assert code == 2


def test_revolution_command(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, "revolution", "--alpha0", "1", "--alpha1", "2", "--h", "1",
                       "--case", "both")
    assert code == 0
    header, rows = read_csv(out)
    assert header == ["case_id", "rho", "jhat", "I_l", "I_l_quadrature", "abs_diff"]
    cases = {r.split(",")[0] for r in rows}
    assert cases == {"axis0", "axis3"}
    assert max(float(r.split(",")[-1]) for r in rows) <= 1e-9
    for r in rows:
        _, _, jh, value, _, _ = r.split(",")
        assert -1 <= float(jh) <= 1
        if abs(float(jh)) == 1:
            assert float(value) == 0.0


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# shared settings\nalphas = 1,2,2,4\nh = 0.25\nsamples = 5\n")
    code, out, _ = run(tmp_path, capsys, "bifurcation", "--config", str(cfg), "--h", "0.5")
    assert code == 0
    side = json.loads((tmp_path / "out.csv.config.json").read_text())
    assert side["h"] == 0.5 and side["alphas"] == [1.0, 2.0, 2.0, 4.0]
    assert side["options"]["samples"] == "5"


def test_bad_config_line(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("alphas 1,2,2,4\n")
    code, _, _ = run(tmp_path, capsys, "bifurcation", "--config", str(cfg))
    assert code == 2


def test_missing_alphas(tmp_path, capsys):
    code, _, _ = run(tmp_path, capsys, "bifurcation")
    assert code == 2


def test_unknown_command_exits_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
