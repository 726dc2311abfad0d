import csv
import io
import json
import subprocess
import sys

import pytest

from psplit.cli import main
from psplit.mps import read_mps


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def ex1(tmp_path, capsys):
    path = tmp_path / "ex1.json"
    assert run(["gen", "ex1", "--objective", "1,1,0,0", "--out", path], capsys)[0] == 0
    return path


def test_gen_families_write_model_json(tmp_path, capsys):
    pts = tmp_path / "pts.csv"
    pts.write_text("0,0\n1,0\n5,5\n6,5\n")
    cases = [["kmeans", "--points", 4, "--dim", 2, "--clusters", 2],
             ["kmeans", "--data", pts, "--clusters", 2],
             ["pball", "--balls", 3, "--points", 2, "--dim", 2],
             ["relu", "--layers", "2,3,1"]]
    for args in cases:
        code, out, _ = run(["gen", *args, "--seed", 3], capsys)
        assert code == 0
        assert "disjunctions" in json.loads(out)


def test_formulate_reports_sizes(ex1, capsys):
    code, out, _ = run(["formulate", "--model", ex1, "--formulation", "psplit", "--P", 2], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["alpha"] == 4 and rep["binary"] == 2 and rep["findings"] == []


def test_relax_and_solve(ex1, capsys):
    code, out, _ = run(["relax", "--model", ex1, "--formulation", "bigm"], capsys)
    assert code == 0 and json.loads(out)["status"] == "optimal"
    code, out, _ = run(["solve", "--model", ex1, "--P", 4, "--gap_tol", 1e-9], capsys)
    res = json.loads(out)
    assert code == 0 and res["objective"] == pytest.approx(-2 ** 0.5, abs=1e-6)


def test_compare_csv(ex1, tmp_path, capsys):
    out_path = tmp_path / "cmp.csv"
    code, _, _ = run(["compare", "--model", ex1, "--formulations", "bigm,psplit", "--P", "1,2,4",
                      "--out", out_path], capsys)
    rows = list(csv.DictReader(out_path.open()))
    assert code == 0 and [r["P"] for r in rows] == ["1", "1", "2", "4"]
    assert list(rows[0]) == ["instance", "formulation", "P", "continuous", "binaries", "rows",
                             "relaxation", "mip", "nodes", "lp_iterations", "wall_time", "status"]


def test_compare_with_partition_and_bounds(ex1, tmp_path, capsys):
    part = tmp_path / "p.json"
    part.write_text("[[0, 1], [2, 3]]")
    bnd = tmp_path / "b.json"
    bnd.write_text(json.dumps([{"disjunction": 0, "disjunct": 0, "group": 0, "lower": 0, "upper": 20}]))
    code, out, _ = run(["compare", "--model", ex1, "--partition", part, "--bounds", bnd, "--no-mip"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and {r["P"] for r in rows} == {"1", "2"}


def test_grid_csv(ex1, capsys):
    code, out, _ = run(["grid", "--model", ex1, "--P", 1, "--resolution", 5], capsys)
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0] == ["x0", "x1", "feasible"] and len(rows) == 26
    assert {r[2] for r in rows[1:]} <= {"0", "1"}


def test_export_mps(ex1, tmp_path, capsys):
    path = tmp_path / "m.mps"
    assert run(["export", "--model", ex1, "--out", path], capsys)[0] == 0
    assert read_mps(path).formulation == "ex1"


@pytest.mark.parametrize("argv", [
    ["relax"],
    ["bogus"],
    ["solve", "--model", "missing.json"],
    ["compare", "--model", "{ex1}", "--formulations", "bigm,nope"],
    ["export", "--model", "{ex1}"],
    ["grid", "--model", "{ex1}", "--dims", "0"],
    ["solve", "--model", "{ex1}", "--P", "x"],
    ["solve", "--model", "{ex1}", "--P", "0"],
    ["solve", "--model", "{ex1}", "--formulation", "hull"],
])
def test_usage_errors_exit_1(argv, ex1, capsys):
    argv = [a.replace("{ex1}", str(ex1)) for a in argv]
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 1


def test_solver_failure_exits_2(tmp_path, capsys):
    model = {"variables": [{"lb": 0, "ub": 1}], "objective": {"coeffs": [1]},
             "disjunctions": [[[{"terms": [{"var": 0, "kind": "affine", "params": {"w": 1}}], "rhs": -1}],
                               [{"terms": [{"var": 0, "kind": "affine", "params": {"w": -1}}], "rhs": -2}]]]}
    path = tmp_path / "inf.json"
    path.write_text(json.dumps(model))
    code, out, _ = run(["solve", "--model", path, "--formulation", "bigm"], capsys)
    assert code == 2 and json.loads(out)["status"] == "infeasible"
    code, _, _ = run(["solve", "--model", path, "--node-limit", 0], capsys)
    assert code == 2


def test_console_entry_point(ex1):
    proc = subprocess.run([sys.executable, "-m", "psplit.cli", "formulate", "--model", str(ex1)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["formulation"] == "psplit"
