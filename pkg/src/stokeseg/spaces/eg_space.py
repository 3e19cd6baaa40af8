import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from stokeseg.mesh.simplicial_mesh import SimplicialMesh

logger = logging.getLogger(__name__)


class EGSpace:
    """
    Enriched Galerkin velocity space (continuous P1 vectors plus one x - x_T
    enrichment per cell) and the piecewise-constant pressure space.

    Velocity DOFs are numbered component-major over vertices, then one
    enrichment DOF per cell: ``[u_x(v0..), u_y(v0..), (u_z(v0..)), c(T0..)]``.
    Pressure DOFs are numbered by cell.
    """

    def __init__(self, mesh: SimplicialMesh):
        self.mesh = mesh
        self.dim = mesh.dim
        self.n_cont = mesh.dim * mesh.n_vertices
        self.n_enr = mesh.n_cells
        self.n_pres = mesh.n_cells
        self.n_velocity = self.n_cont + self.n_enr
        self.boundary_vertex_set = frozenset(int(v) for v in mesh.boundary_vertices)

    def cont_dof(self, component: int, vertex: int) -> int:
        return component * self.mesh.n_vertices + vertex

    def enr_dof(self, cell: int) -> int:
        return self.n_cont + cell

    @cached_property
    def boundary_dofs(self) -> np.ndarray:
        vertices = self.mesh.boundary_vertices
        dofs = np.concatenate([c * self.mesh.n_vertices + vertices for c in range(self.dim)])
        dofs.sort()
        dofs.flags.writeable = False
        return dofs

    @cached_property
    def free_dofs(self) -> np.ndarray:
        dofs = np.setdiff1d(np.arange(self.n_velocity), self.boundary_dofs)
        dofs.flags.writeable = False
        return dofs

    def cell_dofs(self, cell: int) -> np.ndarray:
        """Velocity DOFs whose basis function is supported on the cell."""
        vertices = self.mesh.cells[cell]
        cont = [self.cont_dof(c, int(v)) for c in range(self.dim) for v in vertices]
        return np.array(cont + [self.enr_dof(cell)])

    def zero_field(self) -> "EGField":
        return EGField(self, np.zeros(self.n_velocity))

    def basis_function(self, dof: int) -> "EGField":
        coefficients = np.zeros(self.n_velocity)
        coefficients[dof] = 1.0
        return EGField(self, coefficients)

    def field(self, cont_coeffs, enr_coeffs) -> "EGField":
        cont_coeffs = np.asarray(cont_coeffs, dtype=float).reshape(self.mesh.n_vertices, self.dim)
        enr_coeffs = np.asarray(enr_coeffs, dtype=float).reshape(self.n_enr)
        return EGField(self, np.concatenate([cont_coeffs.T.ravel(), enr_coeffs]))

    def random_field(self, rng: np.random.Generator) -> "EGField":
        return EGField(self, rng.standard_normal(self.n_velocity))


@dataclass(frozen=True, eq=False)
class EGField:
    """Velocity v = v^C + v^D; on cell T, v(x) = sum_k v_k lambda_k(x) + c_T (x - x_T)."""
    space: EGSpace
    coefficients: np.ndarray

    @property
    def cont_coeffs(self) -> np.ndarray:
        return self.coefficients[:self.space.n_cont].reshape(self.space.dim, -1).T

    @property
    def enr_coeffs(self) -> np.ndarray:
        return self.coefficients[self.space.n_cont:]

    def continuous_part(self) -> "EGField":
        coefficients = self.coefficients.copy()
        coefficients[self.space.n_cont:] = 0.0
        return EGField(self.space, coefficients)

    def enrichment_part(self) -> "EGField":
        coefficients = self.coefficients.copy()
        coefficients[:self.space.n_cont] = 0.0
        return EGField(self.space, coefficients)

    def cell_gradients(self) -> np.ndarray:
        """Broken gradient per cell, shape (C, d, d) with [i, j] = d v_i / d x_j."""
        mesh = self.space.mesh
        nodal = self.cont_coeffs[mesh.cells]
        gradients = np.einsum("cki,ckj->cij", nodal, mesh.cell_gradients)
        gradients += self.enr_coeffs[:, None, None] * np.eye(self.space.dim)
        return gradients

    def cell_center_values(self) -> np.ndarray:
        """v(x_T) per cell; the enrichment vanishes at the barycenter."""
        return self.cont_coeffs[self.space.mesh.cells].mean(axis=1)

    def values(self, cell_ids, points) -> np.ndarray:
        """Values of the restriction to each cell (broadcast against points[..., 0]) at points (..., d)."""
        cell_ids = np.asarray(cell_ids)
        points = np.asarray(points, dtype=float)
        mesh = self.space.mesh
        lam = mesh.barycentric(cell_ids, points)
        nodal = self.cont_coeffs[mesh.cells[cell_ids]]
        continuous = np.einsum("...k,...ki->...i", lam, nodal)
        offset = points - mesh.cell_barycenters[cell_ids]
        return continuous + self.enr_coeffs[cell_ids][..., None] * offset

    def evaluate(self, cell: int, x) -> np.ndarray:
        return self.values(np.int64(cell), np.asarray(x, dtype=float))

    def __add__(self, other: "EGField") -> "EGField":
        return EGField(self.space, self.coefficients + other.coefficients)

    def __sub__(self, other: "EGField") -> "EGField":
        return EGField(self.space, self.coefficients - other.coefficients)

    def __mul__(self, scale: float) -> "EGField":
        return EGField(self.space, scale * self.coefficients)

    __rmul__ = __mul__


def eval_field(field: EGField, cell: int, x) -> np.ndarray:
    return field.evaluate(cell, x)


@dataclass(frozen=True, eq=False)
class PressureField:
    space: EGSpace
    values: np.ndarray

    def mean(self) -> float:
        measures = self.space.mesh.cell_measures
        return float(np.dot(measures, self.values) / measures.sum())

    def demeaned(self) -> "PressureField":
        return PressureField(self.space, self.values - self.mean())
