import argparse
import asyncio
import logging
import sys
from typing import Optional, Sequence

import numpy as np

from stokeseg import config
from stokeseg.analysis.experiment import solve_stokes
from stokeseg.analysis.studies import RunMatrix, convergence_study, penalty_sweep, robustness_sweep
from stokeseg.cli.run_config import RunConfig, build_run_config
from stokeseg.cli.writers import (CONVERGENCE_COLUMNS, SWEEP_COLUMNS, write_plot_svg, write_quality_csv,
                                  write_records_csv, write_vtk)
from stokeseg.constants import Method
from stokeseg.errors import InputError, NumericalError
from stokeseg.mesh.quality import mesh_quality
from stokeseg.weakcalc.weak_gradient import build_weak_gradient_stencil

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

COMMANDS = ("convergence", "sweep", "export-vtk", "quality")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stokeseg", description="Enriched Galerkin Stokes experiments")
    commands = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        sub = commands.add_parser(command)
        sub.add_argument('--method', type=str, default="meg", help="eg, meg or pr-meg; comma list for sweep")
        sub.add_argument('--problem', type=str, default="vortex2d", help="vortex2d, cube3d, lshape, hole or file:PATH")
        sub.add_argument('--levels', type=str, default=None, help="mesh sizes, e.g. 8,16,32 or 1/8,1/16")
        sub.add_argument('--h', type=str, default=None, help="single mesh size 1/n")
        sub.add_argument('--nu', type=str, default="1", help="viscosity; a grid for sweep")
        sub.add_argument('--rho', type=str, default=None, help="EG penalty; a grid for sweep")
        if command == "sweep":
            sub.add_argument('--rho-m', dest="rho_m", type=str, default=None, help="hypothetical mEG penalty grid")
        sub.add_argument('--seed', type=int, default=0)
        sub.add_argument('--perturb', type=float, default=0.0, help="vertex perturbation amplitude in [0, 0.5)")
        sub.add_argument('--out', type=str, default=config.OUTPUT_DIR)
        sub.add_argument('--emit', type=str, default=None, help="comma list of csv, vtk, svg")
        sub.add_argument('--cond', action="store_true", help="compute condition numbers")
    return parser


def _matrix() -> RunMatrix:
    return RunMatrix(concurrency=config.THREADS, condition_budget=config.CONDITION_NUMBER_BUDGET)


async def cmd_convergence(run_config: RunConfig) -> int:
    exact = run_config.exact()
    records = await convergence_study(run_config.method, exact, run_config.mesh, run_config.levels,
                                      rho=run_config.single_rho, condition=run_config.condition, matrix=_matrix())
    if "csv" in run_config.emit:
        write_records_csv(run_config.out / "convergence.csv", records, CONVERGENCE_COLUMNS)
    if "svg" in run_config.emit:
        h = [r.h for r in records]
        write_plot_svg(run_config.out / "convergence.svg", {
            "velocity (triple norm)": (h, [r.err_u_triple for r in records]),
            "pressure (L2)": (h, [r.err_p_l2 for r in records]),
        }, xlabel="h", ylabel="error", title=f"{run_config.method.value}, {exact.name}", invert_x=True)
    return EXIT_OK


async def cmd_sweep(run_config: RunConfig) -> int:
    n = run_config.levels[0] if run_config.levels else None
    mesh_factory = run_config.mesh_factory(n)
    matrix = _matrix()

    if len(run_config.nu) > 1:
        exact = run_config.exact(nu=1.0, dim=mesh_factory().dim)
        records = await robustness_sweep(run_config.methods, exact, mesh_factory, run_config.nu,
                                         rho=run_config.single_rho, condition=run_config.condition, matrix=matrix)
        parameter, label = "nu", "viscosity"
    else:
        exact = run_config.exact(dim=mesh_factory().dim)
        records = []
        for method in run_config.methods:
            grid = run_config.rho if method is Method.EG else run_config.rho_m
            records.extend(await penalty_sweep([method], exact, mesh_factory, grid, matrix=matrix))
        parameter, label = "rho", "penalty parameter"

    if "csv" in run_config.emit:
        write_records_csv(run_config.out / "sweep.csv", records, SWEEP_COLUMNS)
    if "svg" in run_config.emit:
        series = {}
        for method in run_config.methods:
            selected = [r for r in records if r.method is method]
            x = [getattr(r, parameter) for r in selected]
            series[f"{method.value} velocity"] = (x, [r.err_u_triple for r in selected])
            series[f"{method.value} pressure"] = (x, [r.err_p_l2 for r in selected])
            if any(np.isfinite(r.cond2) for r in selected):
                series[f"{method.value} condition number"] = (x, [r.cond2 for r in selected])
        write_plot_svg(run_config.out / "sweep.svg", series, xlabel=label, ylabel="error")
    return EXIT_OK


async def cmd_export_vtk(run_config: RunConfig) -> int:
    n = run_config.levels[0] if run_config.levels else None
    mesh = run_config.mesh(n)
    exact = run_config.exact(dim=mesh.dim)
    _, solution = await asyncio.to_thread(solve_stokes, mesh, exact, run_config.method, run_config.single_rho)

    velocity = solution.velocity
    weak_divergence = build_weak_gradient_stencil(solution.space).divergence_of(velocity)
    if "vtk" in run_config.emit:
        write_vtk(run_config.out / "solution.vtk", mesh,
                  point_vectors={"u_continuous": velocity.cont_coeffs},
                  cell_scalars={"enrichment_coeff": velocity.enr_coeffs,
                                "pressure": solution.pressure.values,
                                "weak_div_u": weak_divergence})
    logger.info("Exported solution", extra={"cells": mesh.n_cells,
                                            "max_weak_divergence": float(np.abs(weak_divergence).max())})
    return EXIT_OK


async def cmd_quality(run_config: RunConfig) -> int:
    n = run_config.levels[0] if run_config.levels else None
    mesh = run_config.mesh(n)
    quality = mesh_quality(mesh)
    if "csv" in run_config.emit:
        write_quality_csv(run_config.out / "quality.csv", quality)
    logger.info("Mesh quality", extra={"cells": mesh.n_cells, "min_quality": float(quality.min()),
                                       "mean_quality": float(quality.mean())})
    return EXIT_OK


HANDLERS = {
    "convergence": cmd_convergence,
    "sweep": cmd_sweep,
    "export-vtk": cmd_export_vtk,
    "quality": cmd_quality,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Exit codes: 0 success, 2 bad input, 3 numerical failure. argparse itself exits with 2."""
    args = build_parser().parse_args(argv)
    try:
        run_config = build_run_config(args)
        return asyncio.run(HANDLERS[run_config.command](run_config))
    except InputError as ex:
        logger.error("Invalid input", exc_info=True, extra={"command": args.command})
        print(f"error: {ex.message}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as ex:
        logger.error("Numerical failure", exc_info=True, extra={"command": args.command})
        print(f"numerical failure: {ex.message}", file=sys.stderr)
        return EXIT_NUMERICAL


def boot():
    sys.exit(main())


if __name__ == "__main__":
    boot()
