import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.sparse import csr_matrix

from stokeseg.assembly.saddle_system import SaddleSystem

logger = logging.getLogger(__name__)

BoundaryData = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class ReducedSystem:
    """
    The saddle system restricted to free velocity DOFs: boundary continuous DOFs
    are fixed to nodal values of g, enrichment DOFs are always free.
    ``G`` is the pressure-equation right-hand side, -B_b g_b.
    """
    system: SaddleSystem
    A: csr_matrix
    B: csr_matrix
    F: np.ndarray
    G: np.ndarray
    free_dofs: np.ndarray
    boundary_dofs: np.ndarray
    boundary_values: np.ndarray

    @property
    def m(self) -> np.ndarray:
        return self.system.m

    def expand(self, free_values: np.ndarray) -> np.ndarray:
        full = np.zeros(self.system.space.n_velocity)
        full[self.free_dofs] = free_values
        full[self.boundary_dofs] = self.boundary_values
        return full


def boundary_dof_values(system: SaddleSystem, g: Optional[BoundaryData]) -> np.ndarray:
    space = system.space
    mesh = space.mesh
    values = np.zeros(space.n_velocity)
    if g is not None:
        nodal = np.asarray(g(mesh.vertices[mesh.boundary_vertices]), dtype=float)
        for component in range(space.dim):
            values[component * mesh.n_vertices + mesh.boundary_vertices] = nodal[:, component]
    return values[space.boundary_dofs]


def apply_dirichlet(system: SaddleSystem, g: Optional[BoundaryData] = None) -> ReducedSystem:
    """Eliminate boundary continuous DOFs by lifting: F_free -= A_fb g_b, G = -B_b g_b."""
    space = system.space
    free = space.free_dofs
    fixed = space.boundary_dofs
    values = boundary_dof_values(system, g)

    A = system.A.tocsc()
    B = system.B.tocsc()
    A_free = A[:, free].tocsr()[free]
    B_free = B[:, free].tocsr()

    F = system.F[free] - A[:, fixed].tocsr()[free] @ values
    G = -(B[:, fixed] @ values)

    logger.debug("Dirichlet reduction", extra={
        "free_dofs": len(free), "fixed_dofs": len(fixed), "max_boundary_value": float(np.abs(values).max(initial=0.0))
    })
    return ReducedSystem(system=system, A=A_free, B=B_free, F=F, G=np.asarray(G).ravel(),
                         free_dofs=free, boundary_dofs=fixed, boundary_values=values)
