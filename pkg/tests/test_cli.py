import csv
import io
import json
import shutil
import subprocess

import pytest

from ocfem.cli import main
from ocfem.problems import manufactured_unconstrained, serialize
from numpy.polynomial import Polynomial

COLUMNS = ["elements", "h", "L2", "Linf", "H1", "H2",
           "EOC_L2", "EOC_Linf", "EOC_H1", "EOC_H2", "active_nodes", "mass"]


def _rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_solve_writes_csv(tmp_path):
    out = tmp_path / "t1.csv"
    assert main(["solve", "--problem", "example-dirichlet", "--mesh", "uniform",
                 "--base", "2", "--levels", "7", "--out", str(out)]) == 0
    rows = _rows(out.read_text())
    assert rows[0] == COLUMNS
    assert len(rows) == 8
    assert [int(r[0]) for r in rows[1:]] == [2, 4, 8, 16, 32, 64, 128]
    assert rows[1][6] == "nan"
    # seven significant digits in e-notation
    assert rows[-1][5].count("e") == 1 and len(rows[-1][5].split("e")[0].replace(".", "")) == 7


def test_solve_is_deterministic(tmp_path):
    args = ["solve", "--problem", "example-mixed", "--base", "4", "--levels", "4"]
    assert main(args + ["--out", str(tmp_path / "a.csv")]) == 0
    assert main(args + ["--out", str(tmp_path / "b.csv")]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_solve_third_aligned_to_stdout(capsys):
    assert main(["solve", "--problem", "example-mixed", "--mesh", "third-aligned",
                 "--base-k", "1", "--levels", "6"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert [int(r[0]) for r in rows[1:]] == [6, 12, 24, 48, 96, 192]


@pytest.mark.parametrize("fmt, marker", [("markdown", "| elements"), ("dat", "# elements")])
def test_other_formats(capsys, fmt, marker):
    assert main(["solve", "--problem", "example-dirichlet", "--mesh", "perturbed",
                 "--base", "4", "--levels", "2", "--format", fmt]) == 0
    out = capsys.readouterr().out
    assert out.startswith(marker)
    assert len(out.strip().splitlines()) == (4 if fmt == "markdown" else 3)


def test_problem_from_json_file(tmp_path, capsys):
    doc = serialize(manufactured_unconstrained(Polynomial([0, -1, 0, 1]), "dirichlet"))
    path = tmp_path / "cubic.json"
    path.write_text(json.dumps(doc))
    assert main(["solve", "--problem", str(path), "--base", "1", "--levels", "2"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert all(float(r[c]) < 1e-10 for r in rows[1:] for c in (2, 3, 4, 5))
    assert all(r[10] == "0" for r in rows[1:])


@pytest.mark.parametrize("argv", [
    ["solve", "--problem", "no-such-problem"],
    ["solve", "--problem", "example-dirichlet", "--levels", "0"],
    ["solve", "--problem", "example-dirichlet", "--mesh", "perturbed", "--base", "3"],
    ["solve", "--problem", "example-dirichlet", "--mesh", "perturbed", "--shift", "0.6"],
    ["solve", "--problem", "example-dirichlet", "--quad-order", "0"],
])
def test_config_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert "error" in capsys.readouterr().err


def test_bad_json_exits_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["solve", "--problem", str(bad)]) == 2
    invalid = tmp_path / "invalid.json"
    invalid.write_text(json.dumps({"bc": "mixed"}))
    assert main(["solve", "--problem", str(invalid)]) == 2


def test_bad_environment_override_exits_2(monkeypatch):
    monkeypatch.setenv("OCFEM_QUAD_ORDER", "six")
    assert main(["solve", "--problem", "example-dirichlet", "--levels", "1"]) == 2


def test_solver_failure_exits_3(capsys):
    assert main(["solve", "--problem", "example-mixed", "--base", "64", "--levels", "1",
                 "--max-iter", "1"]) == 3
    assert "64 elements" in capsys.readouterr().err


def test_reproduce_writes_four_tables(tmp_path, capsys):
    assert main(["reproduce", "--outdir", str(tmp_path)]) == 0
    sizes = {"table1": 7, "table2": 7, "table3": 7, "table4": 6}
    for key, n in sizes.items():
        rows = _rows((tmp_path / f"{key}.csv").read_text())
        assert rows[0] == COLUMNS and len(rows) == n + 1
    assert len(capsys.readouterr().out.strip().splitlines()) == 4


def test_verify_reports_each_check(capsys):
    assert main(["verify"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 6
    assert all(line.startswith("PASS") for line in lines)


@pytest.mark.skipif(shutil.which("ocfem") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["ocfem", "solve", "--problem", "example-dirichlet", "--levels", "2"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert res.stdout.splitlines()[0] == ",".join(COLUMNS)
