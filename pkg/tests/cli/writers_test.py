import math

import numpy as np
import pytest

from stokeseg.analysis.records import ConvergenceRecord
from stokeseg.cli.writers import (CONVERGENCE_COLUMNS, SWEEP_COLUMNS, atomic_write, format_value, plot_svg,
                                  records_csv, vtk_text, write_quality_csv, write_vtk)
from stokeseg.constants import Method


def test_format_value():
    assert format_value(None) == ""
    assert format_value(Method.PR_MEG) == "pr-meg"
    assert format_value(0.125) == "1.250000e-01"
    assert format_value(np.float64(3.0)) == "3.000000e+00"
    assert format_value(math.nan) == "nan"
    assert format_value(math.inf) == "inf"
    assert format_value(7) == "7"


def test_records_csv():
    records = [
        ConvergenceRecord(Method.EG, 0.25, 1.0, 10.0, 0.5, 0.6, 0.25, 0.2, cond2=1234.5),
        ConvergenceRecord.failure(Method.MEG, 0.25, 1.0, 2.0, "singular"),
    ]
    lines = records_csv(records, SWEEP_COLUMNS).splitlines()
    assert lines[0] == ",".join(SWEEP_COLUMNS)
    assert lines[1] == ("eg,2.500000e-01,1.000000e+00,1.000000e+01,5.000000e-01,6.000000e-01,"
                        "2.500000e-01,2.000000e-01,1.234500e+03")
    assert lines[2] == "meg,2.500000e-01,1.000000e+00,2.000000e+00,nan,nan,nan,nan,nan"


def test_convergence_columns_leave_missing_rho_empty():
    record = ConvergenceRecord(Method.MEG, 0.125, 1.0, None, 0.1, math.nan, 0.2, 0.3)
    row = records_csv([record], CONVERGENCE_COLUMNS).splitlines()[1].split(",")
    assert row[CONVERGENCE_COLUMNS.index("rho")] == ""
    assert len(row) == len(CONVERGENCE_COLUMNS)


def test_atomic_write_replaces_and_leaves_no_temporaries(tmp_path):
    target = tmp_path / "nested" / "out.csv"
    atomic_write(target, "first\n")
    atomic_write(target, "second\n")
    assert target.read_text() == "second\n"
    assert [p.name for p in target.parent.iterdir()] == ["out.csv"]


def test_atomic_write_failure_keeps_the_old_file(tmp_path, mocker):
    target = tmp_path / "out.csv"
    atomic_write(target, "kept\n")
    mocker.patch("stokeseg.cli.writers.os.replace", side_effect=OSError("disk full"))
    with pytest.raises(OSError):
        atomic_write(target, "lost\n")
    assert target.read_text() == "kept\n"
    assert [p.name for p in tmp_path.iterdir()] == ["out.csv"]


def test_quality_csv(tmp_path, square_mesh):
    path = tmp_path / "quality.csv"
    write_quality_csv(path, np.full(square_mesh.n_cells, 0.5))
    lines = path.read_text().splitlines()
    assert lines[0] == "cell,quality"
    assert len(lines) == square_mesh.n_cells + 1
    assert lines[1] == "0,5.000000e-01"


def test_vtk_layout_2d(two_triangles):
    text = vtk_text(two_triangles, {"u": np.ones((4, 2))}, {"p": np.array([1.0, -1.0])})
    lines = text.splitlines()
    assert lines[0] == "# vtk DataFile Version 3.0"
    assert "POINTS 4 double" in lines
    assert "CELLS 2 8" in lines
    types = lines.index("CELL_TYPES 2")
    assert lines[types + 1:types + 3] == ["5", "5"]
    assert "POINT_DATA 4" in lines and "VECTORS u double" in lines
    assert "CELL_DATA 2" in lines and "SCALARS p double 1" in lines
    vectors = lines.index("VECTORS u double")
    assert [float(v) for v in lines[vectors + 1].split()] == [1.0, 1.0, 0.0]


def test_vtk_file_3d(tmp_path, cube_mesh):
    path = tmp_path / "solution.vtk"
    write_vtk(path, cube_mesh, {"u": np.zeros((cube_mesh.n_vertices, 3))}, {"p": np.zeros(cube_mesh.n_cells)})
    lines = path.read_text().splitlines()
    assert f"CELLS {cube_mesh.n_cells} {5 * cube_mesh.n_cells}" in lines
    types = lines.index(f"CELL_TYPES {cube_mesh.n_cells}")
    assert set(lines[types + 1:types + 1 + cube_mesh.n_cells]) == {"10"}


def test_svg_is_deterministic_and_skips_unplottable_points():
    series = {"velocity": ([0.25, 0.125, 0.0625], [1.0, math.nan, 0.25]), "empty": ([1.0], [0.0])}
    first = plot_svg(series, "h", "error", title="meg", invert_x=True)
    assert first.lstrip().startswith("<?xml")
    assert "<svg" in first
    assert first == plot_svg(series, "h", "error", title="meg", invert_x=True)
