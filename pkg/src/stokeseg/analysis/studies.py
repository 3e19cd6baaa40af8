import asyncio
import logging
import uuid
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

from stokeseg import config
from stokeseg.analysis.errors import InvalidStudy
from stokeseg.analysis.exact_solutions import ExactSolution, with_viscosity
from stokeseg.analysis.experiment import solve_stokes
from stokeseg.analysis.records import ConvergenceRecord, attach_rates
from stokeseg.constants import Method
from stokeseg.errors import NumericalError
from stokeseg.mesh.simplicial_mesh import SimplicialMesh

logger = logging.getLogger(__name__)

MeshFamily = Callable[[int], SimplicialMesh]


@dataclass(frozen=True)
class StudyJob:
    """One solve of a run matrix; the mesh is built inside the worker."""
    method: Method
    exact: ExactSolution
    mesh_factory: Callable[[], SimplicialMesh]
    rho: Optional[float] = None
    condition: bool = False


class RunMatrix:
    """
    Runs independent solves concurrently, each in a worker thread, with at most
    ``concurrency`` in flight. Records come back in job order.
    """

    def __init__(self, concurrency: int = config.THREADS, condition_budget: int = config.CONDITION_NUMBER_BUDGET):
        self.concurrency_semaphore = asyncio.Semaphore(max(1, concurrency))
        self.condition_budget = condition_budget

    def _run_job(self, job: StudyJob) -> ConvergenceRecord:
        record, _ = solve_stokes(job.mesh_factory(), job.exact, job.method, job.rho,
                                 condition=job.condition, condition_budget=self.condition_budget)
        return record

    async def run(self, jobs: Sequence[StudyJob], tolerate_failures: bool = False) -> list[ConvergenceRecord]:
        batch_id = uuid.uuid4()
        logging_extra = {"batch_id": str(batch_id), "jobs": len(jobs)}
        logger.info("Run matrix started", extra=logging_extra)

        async def execute(job: StudyJob) -> ConvergenceRecord:
            async with self.concurrency_semaphore:
                try:
                    return await asyncio.to_thread(self._run_job, job)
                except NumericalError as ex:
                    if not tolerate_failures:
                        raise
                    logger.warning("Sweep point failed", extra={
                        "batch_id": str(batch_id), "method": job.method.value, "nu": job.exact.nu,
                        "rho": job.rho, "reason": ex.message
                    })
                    mesh = job.mesh_factory()
                    return ConvergenceRecord.failure(job.method, mesh.nominal_h, job.exact.nu, job.rho, ex.message)

        records = await asyncio.gather(*(execute(job) for job in jobs))

        logger.info("Run matrix completed", extra=logging_extra)
        return list(records)


def _check_grid(name: str, grid: Iterable[float]) -> list[float]:
    values = [float(v) for v in grid]
    if not values:
        raise InvalidStudy(f"{name} grid is empty")
    if any(not v > 0 for v in values):
        raise InvalidStudy(f"{name} grid must be positive, got {values}")
    return values


async def convergence_study(method: Method, exact: ExactSolution, mesh_family: MeshFamily, levels: Sequence[int],
                            rho: Optional[float] = None, condition: bool = False,
                            matrix: Optional[RunMatrix] = None) -> list[ConvergenceRecord]:
    """One record per level (h = 1/n for each n in ``levels``), with pairwise rates. Failures propagate."""
    if len(levels) < 2:
        raise InvalidStudy("a convergence study needs at least two mesh levels")
    matrix = matrix or RunMatrix()
    jobs = [StudyJob(method, exact, lambda n=n: mesh_family(n), rho, condition) for n in levels]
    return attach_rates(await matrix.run(jobs))


async def penalty_sweep(methods: Sequence[Method], exact: ExactSolution, mesh_factory: Callable[[], SimplicialMesh],
                        rho_grid: Iterable[float], condition: bool = True,
                        matrix: Optional[RunMatrix] = None) -> list[ConvergenceRecord]:
    """
    Errors and condition numbers over a penalty grid at fixed h: rho for EG, the hypothetical
    rho_m for mEG. Ordered by method, then grid value.
    """
    grid = _check_grid("penalty", rho_grid)
    if Method.PR_MEG in methods:
        raise InvalidStudy("the pressure-robust method has no penalty parameter to sweep")
    matrix = matrix or RunMatrix()
    jobs = [StudyJob(method, exact, mesh_factory, rho, condition) for method in methods for rho in grid]
    return await matrix.run(jobs, tolerate_failures=True)


async def robustness_sweep(methods: Sequence[Method], exact: ExactSolution, mesh_factory: Callable[[], SimplicialMesh],
                           nu_grid: Iterable[float], rho: Optional[float] = None, condition: bool = False,
                           matrix: Optional[RunMatrix] = None) -> list[ConvergenceRecord]:
    """Errors over a viscosity grid at fixed h; ``rho`` applies to EG only."""
    grid = _check_grid("viscosity", nu_grid)
    if Method.EG in methods and rho is None:
        raise InvalidStudy("EG requires a penalty parameter")
    matrix = matrix or RunMatrix()
    jobs = [StudyJob(method, with_viscosity(exact, nu), mesh_factory, rho if method is Method.EG else None, condition)
            for method in methods for nu in grid]
    return await matrix.run(jobs, tolerate_failures=True)
