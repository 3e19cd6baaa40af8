import csv
import io
import logging
import math
import os
import tempfile
from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from stokeseg.analysis.records import ConvergenceRecord  # noqa: E402
from stokeseg.constants import Constants  # noqa: E402
from stokeseg.mesh.simplicial_mesh import SimplicialMesh  # noqa: E402

logger = logging.getLogger(__name__)

CONVERGENCE_COLUMNS = ("method", "h", "nu", "rho", "err_u_triple", "rate_u", "err_p_l2", "rate_p",
                       "err_p_proj", "cond2", "assemble_s", "solve_s")
SWEEP_COLUMNS = ("method", "h", "nu", "rho", "err_u_triple", "err_u_energy", "err_p_l2", "err_p_proj", "cond2")

VTK_CELL_TYPES = {2: 5, 3: 10}


def atomic_write(path: Path, content: str):
    """Write through a temporary file in the target directory, then rename over the target."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    handle, temporary = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(handle, "w", newline="") as file:
            file.write(content)
        os.replace(temporary, path)
    except BaseException:
        if os.path.exists(temporary):
            os.unlink(temporary)
        raise
    logger.info("Wrote file", extra={"path": str(path), "bytes": len(content)})


def format_value(value) -> str:
    if value is None:
        return ""
    if hasattr(value, "value"):
        return str(value.value)
    if isinstance(value, float) or isinstance(value, np.floating):
        return Constants.CSV_FLOAT_FORMAT % value if math.isfinite(value) else str(float(value)).lower()
    return str(value)


def records_csv(records: Sequence[ConvergenceRecord], columns: Sequence[str]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for record in records:
        writer.writerow([format_value(getattr(record, column)) for column in columns])
    return buffer.getvalue()


def write_records_csv(path: Path, records: Sequence[ConvergenceRecord], columns: Sequence[str]):
    atomic_write(path, records_csv(records, columns))


def write_quality_csv(path: Path, quality: np.ndarray):
    lines = ["cell,quality"] + [f"{cell},{Constants.CSV_FLOAT_FORMAT % value}" for cell, value in enumerate(quality)]
    atomic_write(path, "\n".join(lines) + "\n")


def _padded(values: np.ndarray) -> np.ndarray:
    values = np.atleast_2d(values)
    if values.shape[1] == 3:
        return values
    return np.hstack([values, np.zeros((len(values), 3 - values.shape[1]))])


def vtk_text(mesh: SimplicialMesh, point_vectors: dict[str, np.ndarray], cell_scalars: dict[str, np.ndarray],
             title: str = "stokeseg solution") -> str:
    """Legacy ASCII VTK 3.0 unstructured grid with vector point data and scalar cell data."""
    lines = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET UNSTRUCTURED_GRID"]

    lines.append(f"POINTS {mesh.n_vertices} double")
    lines.extend("%.16e %.16e %.16e" % tuple(point) for point in _padded(mesh.vertices))

    n_local = mesh.dim + 1
    lines.append(f"CELLS {mesh.n_cells} {mesh.n_cells * (n_local + 1)}")
    lines.extend(f"{n_local} " + " ".join(str(int(v)) for v in cell) for cell in mesh.cells)
    lines.append(f"CELL_TYPES {mesh.n_cells}")
    lines.extend([str(VTK_CELL_TYPES[mesh.dim])] * mesh.n_cells)

    if point_vectors:
        lines.append(f"POINT_DATA {mesh.n_vertices}")
        for name, values in point_vectors.items():
            lines.append(f"VECTORS {name} double")
            lines.extend("%.16e %.16e %.16e" % tuple(row) for row in _padded(values))

    if cell_scalars:
        lines.append(f"CELL_DATA {mesh.n_cells}")
        for name, values in cell_scalars.items():
            lines.append(f"SCALARS {name} double 1")
            lines.append("LOOKUP_TABLE default")
            lines.extend("%.16e" % value for value in np.asarray(values, dtype=float))

    return "\n".join(lines) + "\n"


def write_vtk(path: Path, mesh: SimplicialMesh, point_vectors: dict[str, np.ndarray],
              cell_scalars: dict[str, np.ndarray]):
    atomic_write(path, vtk_text(mesh, point_vectors, cell_scalars))


def plot_svg(series: dict[str, tuple[Sequence[float], Sequence[float]]], xlabel: str, ylabel: str,
             title: Optional[str] = None, invert_x: bool = False) -> str:
    """Log-log line plot rendered to SVG text. Non-positive and NaN points are dropped."""
    plt.rcParams["svg.hashsalt"] = "stokeseg"
    figure, axes = plt.subplots(figsize=(6, 4.5))
    try:
        for label, (x, y) in series.items():
            x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
            keep = np.isfinite(x) & np.isfinite(y) & (x > 0) & (y > 0)
            if keep.any():
                axes.plot(x[keep], y[keep], marker="o", label=label)
        axes.set_xscale("log")
        axes.set_yscale("log")
        axes.set_xlabel(xlabel)
        axes.set_ylabel(ylabel)
        if invert_x:
            axes.invert_xaxis()
        if title:
            axes.set_title(title)
        if axes.get_legend_handles_labels()[0]:
            axes.legend()
        axes.grid(True, which="both", linewidth=0.3)

        buffer = io.StringIO()
        figure.savefig(buffer, format="svg", metadata={"Date": None})
        return buffer.getvalue()
    finally:
        plt.close(figure)


def write_plot_svg(path: Path, series: dict[str, tuple[Sequence[float], Sequence[float]]], xlabel: str, ylabel: str,
                   title: Optional[str] = None, invert_x: bool = False):
    atomic_write(path, plot_svg(series, xlabel, ylabel, title, invert_x))
