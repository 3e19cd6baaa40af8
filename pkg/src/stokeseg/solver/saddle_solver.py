import logging
import time
from dataclasses import dataclass

import numpy as np
from scipy.sparse import bmat, csc_matrix, csr_matrix
from scipy.sparse.linalg import LinearOperator, SuperLU, gmres, splu

from stokeseg.assembly.dirichlet import ReducedSystem
from stokeseg.constants import Constants
from stokeseg.solver.errors import NonConvergence, SingularSystem
from stokeseg.spaces.eg_space import EGField, PressureField

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class AugmentedSystem:
    """
    [[A, B^T, 0], [B, 0, m], [0, m^T, 0]] acting on (u, -p, multiplier).
    The pressure block carries -p so that the matrix stays symmetric.
    """
    matrix: csc_matrix
    rhs: np.ndarray
    n_velocity: int
    n_pressure: int

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class ResidualReport:
    relative_residual: float
    refinement_steps: int
    strategy: str
    seconds: float


def build_augmented(reduced: ReducedSystem) -> AugmentedSystem:
    m = csr_matrix(reduced.m.reshape(-1, 1))
    matrix = bmat([[reduced.A, reduced.B.T, None],
                   [reduced.B, None, m],
                   [None, m.T, None]], format="csc")
    rhs = np.concatenate([reduced.F, reduced.G, [0.0]])
    return AugmentedSystem(matrix=matrix, rhs=rhs, n_velocity=reduced.A.shape[0], n_pressure=reduced.B.shape[0])


def factorize(matrix: csc_matrix) -> SuperLU:
    try:
        return splu(csc_matrix(matrix))
    except RuntimeError as ex:
        raise SingularSystem(f"factorization broke down: {ex}")


def _relative_residual(matrix, x: np.ndarray, rhs: np.ndarray) -> float:
    scale = np.linalg.norm(rhs)
    residual = np.linalg.norm(rhs - matrix @ x)
    return float(residual / scale) if scale > 0 else float(residual)


def solve_augmented(augmented: AugmentedSystem) -> tuple[np.ndarray, ResidualReport]:
    started = time.perf_counter()
    tolerance = Constants.SOLVER_RELATIVE_RESIDUAL
    matrix, rhs = augmented.matrix, augmented.rhs

    lu = factorize(matrix)
    x = lu.solve(rhs)
    if not np.all(np.isfinite(x)):
        raise SingularSystem("factorization produced non-finite values")

    residual = _relative_residual(matrix, x, rhs)
    steps = 0
    while residual > tolerance and steps < Constants.SOLVER_REFINEMENT_STEPS:
        x = x + lu.solve(rhs - matrix @ x)
        residual = _relative_residual(matrix, x, rhs)
        steps += 1

    strategy = "lu"
    if residual > tolerance:
        logger.warning("Direct solve above tolerance, falling back to preconditioned GMRES",
                       extra={"relative_residual": residual, "refinement_steps": steps})
        preconditioner = LinearOperator(matrix.shape, matvec=lu.solve)
        x, info = gmres(matrix, rhs, x0=x, M=preconditioner, rtol=tolerance,
                        maxiter=Constants.GMRES_MAX_ITERATIONS)
        residual = _relative_residual(matrix, x, rhs)
        strategy = "gmres"
        if info != 0 or residual > tolerance:
            raise NonConvergence(f"GMRES stopped at relative residual {residual:.3e} (info={info})")

    report = ResidualReport(relative_residual=residual, refinement_steps=steps, strategy=strategy,
                            seconds=time.perf_counter() - started)
    return x, report


def solve(reduced: ReducedSystem) -> tuple[EGField, PressureField, ResidualReport]:
    """Solve with the mean-zero pressure multiplier; returns the full velocity and a de-meaned pressure."""
    augmented = build_augmented(reduced)
    x, report = solve_augmented(augmented)

    space = reduced.system.space
    n_free = augmented.n_velocity
    velocity = EGField(space, reduced.expand(x[:n_free]))
    pressure = PressureField(space, -x[n_free:n_free + augmented.n_pressure]).demeaned()

    logger.info("Solved saddle system", extra={
        "unknowns": augmented.size, "relative_residual": report.relative_residual,
        "strategy": report.strategy, "seconds": round(report.seconds, 4)
    })
    return velocity, pressure, report
