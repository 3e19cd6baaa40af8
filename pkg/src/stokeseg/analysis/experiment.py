import logging
import math
import time
from dataclasses import dataclass, replace
from typing import Optional

from stokeseg import config
from stokeseg.analysis.error_norms import error_norms
from stokeseg.analysis.errors import InvalidStudy
from stokeseg.analysis.exact_solutions import ExactSolution
from stokeseg.analysis.records import ConvergenceRecord
from stokeseg.assembly.dirichlet import ReducedSystem, apply_dirichlet
from stokeseg.assembly.eg import assemble_eg
from stokeseg.assembly.errors import InvalidPenalty
from stokeseg.assembly.load import assemble_load, assemble_load_pr
from stokeseg.assembly.meg import assemble_meg, assemble_meg_penalized
from stokeseg.assembly.reconstruction import ReconstructionOperator, build_reconstruction
from stokeseg.assembly.saddle_system import SaddleSystem
from stokeseg.constants import Method
from stokeseg.mesh.simplicial_mesh import SimplicialMesh
from stokeseg.solver.conditioning import condition_number
from stokeseg.solver.errors import BudgetExceeded
from stokeseg.solver.saddle_solver import ResidualReport, solve
from stokeseg.spaces.eg_space import EGField, EGSpace, PressureField

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class StokesSolution:
    mesh: SimplicialMesh
    space: EGSpace
    system: SaddleSystem
    reduced: ReducedSystem
    velocity: EGField
    pressure: PressureField
    report: ResidualReport
    reconstruction: Optional[ReconstructionOperator] = None


def assemble_system(mesh: SimplicialMesh, space: EGSpace, method: Method, nu: float,
                    rho: Optional[float] = None) -> SaddleSystem:
    """
    Stiffness and divergence blocks for a method. EG needs rho; mEG takes rho only as the
    hypothetical penalty of a sweep; PR-mEG shares the mEG matrices and takes none.
    """
    if method is Method.EG:
        if rho is None:
            raise InvalidPenalty("EG requires a penalty parameter")
        return assemble_eg(mesh, space, nu, rho)
    if method is Method.PR_MEG:
        if rho is not None:
            raise InvalidPenalty("the pressure-robust method accepts no penalty parameter")
        return replace(assemble_meg(mesh, space, nu), method=Method.PR_MEG)
    if rho is None:
        return assemble_meg(mesh, space, nu)
    return assemble_meg_penalized(mesh, space, nu, rho)


def with_method_load(system: SaddleSystem, mesh: SimplicialMesh, f) -> tuple[SaddleSystem, Optional[ReconstructionOperator]]:
    if system.method is Method.PR_MEG:
        reconstruction = build_reconstruction(mesh, system.space)
        return system.with_load(assemble_load_pr(mesh, system.space, f, reconstruction)), reconstruction
    return system.with_load(assemble_load(mesh, system.space, f)), None


def solve_stokes(mesh: SimplicialMesh, exact: ExactSolution, method: Method, rho: Optional[float] = None,
                 condition: bool = False,
                 condition_budget: int = config.CONDITION_NUMBER_BUDGET) -> tuple[ConvergenceRecord, StokesSolution]:
    """Assemble, impose g = u on the boundary, solve and measure errors for one mesh."""
    if exact.dim != mesh.dim:
        raise InvalidStudy(f"a {exact.dim}D solution cannot be solved on a {mesh.dim}D mesh")

    started = time.perf_counter()
    space = EGSpace(mesh)
    system = assemble_system(mesh, space, method, exact.nu, rho)
    system, reconstruction = with_method_load(system, mesh, exact.f)
    reduced = apply_dirichlet(system, exact.g)
    assemble_s = time.perf_counter() - started

    velocity, pressure, report = solve(reduced)
    norms = error_norms(mesh, space, exact, velocity, pressure, method, rho)

    cond2 = math.nan
    if condition:
        try:
            cond2 = condition_number(reduced, condition_budget)
        except BudgetExceeded as ex:
            logger.warning("Skipping condition number", extra={"reason": ex.message, "h": mesh.nominal_h})

    record = ConvergenceRecord(
        method=method, h=mesh.nominal_h, nu=exact.nu, rho=rho,
        err_u_triple=norms.err_u_triple, err_u_energy=norms.err_u_energy,
        err_p_l2=norms.err_p_l2, err_p_proj=norms.err_p_proj,
        cond2=cond2, assemble_s=assemble_s, solve_s=report.seconds,
    )
    logger.info("Record produced", extra={
        "method": method.value, "problem": exact.name, "h": record.h, "nu": record.nu, "rho": rho,
        "err_u_triple": record.err_u_triple, "err_p_l2": record.err_p_l2
    })
    solution = StokesSolution(mesh=mesh, space=space, system=system, reduced=reduced, velocity=velocity,
                              pressure=pressure, report=report, reconstruction=reconstruction)
    return record, solution
