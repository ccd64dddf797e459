import json
import subprocess
import sys

import pytest

from modeq import cli


def run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_special_values_default(capsys):
    code, out, _ = run(["special-values"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["pass"] and doc["failed"] == []
    (rep,) = doc["reports"]
    assert set(rep) == {"check", "order", "max_deviation", "pass", "details"}


def test_special_values_deterministic(capsys):
    _, first, _ = run(["special-values", "--order", "30"], capsys)
    _, second, _ = run(["special-values", "--order", "30"], capsys)
    assert first == second


@pytest.mark.xfail(strict=True, reason="listed as too tight for 256 bits, but the achieved deviation "
                   "is ~1e-75 so the run passes; see decisions ledger")
def test_tol_1e60_listed_as_failing(capsys):
    code, _, _ = run(["special-values", "--tol", "1e-60"], capsys)
    assert code == 1


def test_tol_1e60_passes(capsys):
    code, out, _ = run(["special-values", "--tol", "1e-60"], capsys)
    assert code == 0 and json.loads(out)["pass"]


def test_tol_beyond_precision_fails(capsys):
    code, out, _ = run(["special-values", "--tol", "1e-80"], capsys)
    assert code == 1 and not json.loads(out)["pass"]


@pytest.mark.parametrize("args", [
    ["special-values", "--prec-bits", "64"],
    ["special-values", "--order", "0"],
    ["special-values", "--tol", "abc"],
    ["special-values", "--tol", "-1"],
    ["special-values", "--seed", "-3"],
    ["special-values", "--no-json"],
    ["solve", "0", "0", "0", "1"],
    ["solve", "1", "x", "1", "1"],
    ["enumerate", "--m", "2", "--n", "4"],
    ["verify", "--class", "3", "--n", "0"],
    ["level2", "--n", "2", "--variant", "case1"],
    ["bogus"],
])
def test_config_errors(args, capsys):
    code, out, err = run(args, capsys)
    assert code == 2 and out == ""


def test_solve_exact(capsys):
    code, out, _ = run(["solve", "4", "3", "12", "1"], capsys)
    doc = json.loads(out)
    assert code == 0
    (sol,) = doc["solutions"]
    assert {"a", "b", "c", "n", "points", "residual"} <= set(sol)
    assert sol["points"][0]["exact"] == "4/7"


def test_solve_json_roundtrip_points(capsys):
    code, out, _ = run(["solve", "1", "1", "1", "4", "--seed", "3"], capsys)
    doc = json.loads(out)
    assert code == 0
    for sol in doc["solutions"]:
        assert len(sol["points"]) == 4
        for p in sol["points"]:
            complex(float(p["re"]), float(p["im"]))


def test_solve_seed_determinism(capsys):
    _, a, _ = run(["solve", "1", "1", "1", "4", "--seed", "5"], capsys)
    _, b, _ = run(["solve", "1", "1", "1", "4", "--seed", "5"], capsys)
    assert a == b


def test_solve_no_solution_exits_1(capsys):
    code, out, _ = run(["solve", "2", "-2", "-2", "4"], capsys)
    assert code == 1 and json.loads(out)["solutions"] == []


def test_enumerate(capsys):
    code, out, _ = run(["enumerate", "--m", "2", "--n", "5"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["pairs"] == [[7, 0], [2, 1]]


def test_verify_class(capsys):
    code, out, _ = run(["verify", "--class", "7", "--n", "0", "--order", "30"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["pass"]


def test_out_file(tmp_path, capsys):
    path = tmp_path / "r.json"
    code, out, _ = run(["enumerate", "--m", "3", "--n", "2", "--out", str(path)], capsys)
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["pairs"] == [[3, 0], [1, 1]]


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "modeq.cli", "enumerate", "--m", "2", "--n", "3"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["pairs"] == [[4, 0], [1, 1]]


def test_level2_case2_cusp1(capsys):
    code, out, _ = run(["level2", "--n", "3", "--variant", "case2-cusp1", "--order", "30"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["pass"]
    assert any("r=3/2" in rep["check"] for rep in doc["reports"])
