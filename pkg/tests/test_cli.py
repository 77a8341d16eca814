import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from mpecfunnel.cli import emit_trace, main, parse_vector, read_trace, InputError
from mpecfunnel.funnel import TRACE_FIELDS, solve
from mpecfunnel.problems import registry_get

from oracles import quad_doc_text

HEADER = "k,kind,theta_f,theta_c,theta,theta_max,f,alpha,u,norm_s,norm_t,gamma,qp_iters,stat_res"


def run(*argv):
    out = io.StringIO()
    return main(list(argv), out=out), out.getvalue()


def test_solve_lin_biactive(tmp_path):
    res = tmp_path / "r.json"
    code, text = run("solve", "--problem", "lin_biactive", "--x0", "1,1", "--result", str(res))
    assert code == 0 and "SStationaryPoint" in text
    doc = json.loads(res.read_text())
    assert doc["class"] == "SStationary" and doc["status"] == "SStationaryPoint"
    assert set(doc) >= {"status", "x", "multipliers", "class", "iterations", "wall_time"}


def test_solve_unknown_problem(capsys):
    code, _ = run("solve", "--problem", "nosuch")
    assert code == 4 and "nosuch" in capsys.readouterr().err


def test_bad_rho_config(tmp_path, capsys):
    cfg = tmp_path / "bad_rho.cfg"
    cfg.write_text(json.dumps({"rho": 0.9}))
    code, _ = run("solve", "--problem", "quad_branch", "--config", str(cfg))
    assert code == 4 and "out of range" in capsys.readouterr().err


def test_unknown_config_field(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"rhoo": 0.1}))
    assert run("solve", "--problem", "quad_branch", "--config", str(cfg))[0] == 4


def test_max_iterations_exit(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"max_iter": 2}))
    assert run("solve", "--problem", "quad_branch", "--config", str(cfg))[0] == 2


def test_restoration_failure_exit(tmp_path):
    doc = {"n": 2, "objective": {"P": [[0, 0], [0, 0]], "c": [1, 0]},
           "g": {"A": [[-1, -1]], "b": [-1]}, "G": {"A": [[1, 0]], "b": [0]}, "H": {"A": [[0, 1]], "b": [0]},
           "x0": [0.5, 0.5]}
    path = tmp_path / "infeasible.json"
    path.write_text(json.dumps(doc))
    assert run("solve", "--problem", str(path))[0] == 3


def test_solve_from_file(tmp_path):
    path = tmp_path / "mixed.json"
    path.write_text(quad_doc_text("mixed_eq"))
    res = tmp_path / "r.json"
    code, _ = run("solve", "--problem", str(path), "--result", str(res))
    assert code == 0
    np.testing.assert_allclose(json.loads(res.read_text())["x"], [1.0, 0.0], atol=1e-6)


def test_check_lin_biactive_with_file(tmp_path):
    mult = tmp_path / "m.json"
    mult.write_text(json.dumps({"nu_hat": [1.0], "xi_hat": [1.0]}))
    code, text = run("check", "--problem", "lin_biactive", "--point", "0,0", "--multipliers", str(mult))
    assert code == 0 and "SStationary" in text and "holds" in text


def test_check_quad_branch_origin():
    code, text = run("check", "--problem", "quad_branch", "--point", "0,0")
    assert code == 1 and "CStationary" in text


@pytest.mark.parametrize("point", ["0,a", "1,", "", "0,0,0"])
def test_check_malformed_point(point):
    assert run("check", "--problem", "lin_biactive", "--point", point)[0] == 4


def test_gradcheck():
    code, text = run("gradcheck", "--problem", "cstat_fixture", "--point", "0.1,0.2,0.3")
    assert code == 0 and "pass" in text


def test_missing_arguments():
    assert run("solve")[0] == 4
    assert run()[0] == 4


def test_parse_vector():
    np.testing.assert_array_equal(parse_vector("1,-2.5,3e-1"), [1.0, -2.5, 0.3])
    with pytest.raises(InputError):
        parse_vector("1,nan")


def test_emit_trace_empty_and_small(tmp_path):
    path = tmp_path / "t.csv"
    emit_trace([], path)
    assert path.read_text() == HEADER + "\n"
    recs = solve(registry_get("lin_biactive"), [1.0, 1.0]).trace[:3]
    assert len(recs) == 3
    emit_trace(recs, path)
    lines = path.read_text().splitlines()
    assert len(lines) == 4 and lines[0] == HEADER


def test_trace_round_trip(tmp_path):
    recs = solve(registry_get("mixed_eq"), [0.3, 0.436]).trace
    path = tmp_path / "t.csv"
    emit_trace(recs, path)
    back = read_trace(str(path))
    assert len(back) == len(recs)
    for a, b in zip(recs, back):
        for name in TRACE_FIELDS:
            va, vb = getattr(a, name), getattr(b, name)
            if isinstance(va, float) and math.isnan(va):
                assert math.isnan(vb)
            else:
                assert va == vb


def test_deterministic_files(tmp_path):
    outputs = []
    for i in range(2):
        t, r = tmp_path / f"t{i}.csv", tmp_path / f"r{i}.json"
        run("solve", "--problem", "quad_branch", "--x0", "2,0.1", "--trace", str(t), "--result", str(r),
            "--no-timing")
        outputs.append((t.read_bytes(), r.read_bytes()))
    assert outputs[0] == outputs[1]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "mpecfunnel", "gradcheck", "--problem", "quad_branch",
                           "--point", "0.3,0.7"], capture_output=True, text=True)
    assert proc.returncode == 0 and "pass" in proc.stdout
