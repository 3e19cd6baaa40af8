import csv

import pytest

from stokeseg.cli.main import EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK, main
from stokeseg.cli.writers import CONVERGENCE_COLUMNS, SWEEP_COLUMNS
from stokeseg.solver.errors import SingularSystem


def read_rows(path):
    with open(path, newline="") as file:
        return list(csv.DictReader(file))


def test_convergence(tmp_path):
    code = main(["convergence", "--method", "pr-meg", "--levels", "1/4,1/8", "--emit", "csv,svg", "--out", str(tmp_path)])
    assert code == EXIT_OK
    rows = read_rows(tmp_path / "convergence.csv")
    assert list(rows[0].keys()) == list(CONVERGENCE_COLUMNS)
    assert [row["h"] for row in rows] == ["2.500000e-01", "1.250000e-01"]
    assert rows[0]["rate_u"] == "nan"
    assert float(rows[1]["rate_u"]) > 0.5
    assert (tmp_path / "convergence.svg").read_text().lstrip().startswith("<?xml")


def test_penalty_sweep(tmp_path):
    code = main(["sweep", "--method", "eg,meg", "--h", "1/4", "--rho", "10,100", "--rho-m", "0.5,1",
                 "--cond", "--out", str(tmp_path)])
    assert code == EXIT_OK
    rows = read_rows(tmp_path / "sweep.csv")
    assert list(rows[0].keys()) == list(SWEEP_COLUMNS)
    assert [(row["method"], float(row["rho"])) for row in rows] == [("eg", 10.0), ("eg", 100.0),
                                                                     ("meg", 0.5), ("meg", 1.0)]
    assert all(float(row["cond2"]) > 1.0 for row in rows)
    assert not (tmp_path / "sweep.svg").exists()


def test_viscosity_sweep(tmp_path):
    code = main(["sweep", "--method", "meg,pr-meg", "--h", "1/4", "--nu", "1,0.01", "--emit", "csv,svg",
                 "--out", str(tmp_path)])
    assert code == EXIT_OK
    rows = read_rows(tmp_path / "sweep.csv")
    assert [(row["method"], float(row["nu"]), row["rho"]) for row in rows] == [
        ("meg", 1.0, ""), ("meg", 0.01, ""), ("pr-meg", 1.0, ""), ("pr-meg", 0.01, "")]
    assert (tmp_path / "sweep.svg").exists()


def test_export_vtk(tmp_path):
    code = main(["export-vtk", "--method", "eg", "--rho", "10", "--h", "1/4", "--out", str(tmp_path)])
    assert code == EXIT_OK
    text = (tmp_path / "solution.vtk").read_text()
    for name in ("VECTORS u_continuous", "SCALARS enrichment_coeff", "SCALARS pressure", "SCALARS weak_div_u"):
        assert name in text


def test_quality(tmp_path):
    assert main(["quality", "--problem", "lshape", "--h", "1/2", "--out", str(tmp_path)]) == EXIT_OK
    rows = read_rows(tmp_path / "quality.csv")
    assert len(rows) == 24
    assert all(0.0 < float(row["quality"]) <= 1.0 for row in rows)


def test_input_errors_exit_with_two(tmp_path, capsys):
    code = main(["convergence", "--method", "meg", "--rho", "1", "--levels", "4,8", "--out", str(tmp_path)])
    assert code == EXIT_INPUT
    assert "error: mEG accepts no penalty parameter" in capsys.readouterr().err
    assert not (tmp_path / "convergence.csv").exists()


def test_export_vtk_rejects_other_outputs(tmp_path, capsys):
    code = main(["export-vtk", "--method", "meg", "--h", "1/4", "--emit", "vtk,csv", "--out", str(tmp_path)])
    assert code == EXIT_INPUT
    assert "export-vtk does not produce csv" in capsys.readouterr().err
    assert not (tmp_path / "solution.vtk").exists()


def test_quality_rejects_tetrahedra(tmp_path):
    assert main(["quality", "--problem", "cube3d", "--h", "1/2", "--out", str(tmp_path)]) == EXIT_INPUT


def test_argparse_errors_exit_with_two():
    with pytest.raises(SystemExit) as ex:
        main(["convergence", "--levels"])
    assert ex.value.code == 2


def test_numerical_failures_exit_with_three(tmp_path, capsys, mocker):
    mocker.patch("stokeseg.analysis.studies.solve_stokes", side_effect=SingularSystem("factorization broke down"))
    code = main(["convergence", "--levels", "4,8", "--out", str(tmp_path)])
    assert code == EXIT_NUMERICAL
    assert "numerical failure: factorization broke down" in capsys.readouterr().err
