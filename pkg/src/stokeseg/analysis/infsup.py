import logging
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.linalg import eigh, null_space

from stokeseg import config
from stokeseg.assembly.dirichlet import apply_dirichlet
from stokeseg.assembly.meg import assemble_meg
from stokeseg.mesh.simplicial_mesh import SimplicialMesh
from stokeseg.solver.errors import BudgetExceeded
from stokeseg.solver.saddle_solver import factorize
from stokeseg.spaces.eg_space import EGSpace

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InfSupEstimate:
    h: float
    n_velocity: int
    beta: float


def infsup_constant(mesh: SimplicialMesh, exclude_constants: bool = True,
                    budget: int = config.INFSUP_VELOCITY_BUDGET) -> InfSupEstimate:
    """
    Smallest generalized singular value of b(v, q) with the triple norm on velocities
    (homogeneous boundary values) and the L2 norm on pressures:
    beta^2 = min eig of B X^{-1} B^T against the pressure mass. Constant pressures are
    left out unless ``exclude_constants`` is false, in which case beta is zero.
    """
    space = EGSpace(mesh)
    if space.n_velocity > budget:
        raise BudgetExceeded(f"inf-sup probe on {space.n_velocity} velocity unknowns exceeds the budget of {budget}")

    # nu = 1 and unit penalty weight make A the triple-norm Gram matrix
    reduced = apply_dirichlet(assemble_meg(mesh, space, 1.0))
    lu = factorize(reduced.A.tocsc())
    B = reduced.B.toarray()
    schur = B @ lu.solve(np.ascontiguousarray(B.T))
    schur = 0.5 * (schur + schur.T)
    mass = np.diag(mesh.cell_measures)

    if exclude_constants:
        basis = null_space(mesh.cell_measures[None, :])
        schur = basis.T @ schur @ basis
        mass = basis.T @ mass @ basis

    smallest = eigh(schur, mass, eigvals_only=True, subset_by_index=[0, 0])[0]
    beta = math.sqrt(max(float(smallest), 0.0))
    logger.info("Inf-sup estimate", extra={"h": mesh.nominal_h, "velocity_dofs": space.n_velocity, "beta": beta})
    return InfSupEstimate(h=mesh.nominal_h, n_velocity=space.n_velocity, beta=beta)


def infsup_probe(meshes: Iterable[SimplicialMesh], budget: int = config.INFSUP_VELOCITY_BUDGET) -> list[InfSupEstimate]:
    return [infsup_constant(mesh, budget=budget) for mesh in meshes]
