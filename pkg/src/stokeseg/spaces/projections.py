from dataclasses import dataclass
from typing import Callable

import numpy as np

from stokeseg.constants import Constants
from stokeseg.quadrature.rules import facet_rule, simplex_rule
from stokeseg.spaces.eg_space import EGField, EGSpace, PressureField
from stokeseg.spaces.errors import SingularLocalMass

VectorField = Callable[[np.ndarray], np.ndarray]
TensorField = Callable[[np.ndarray], np.ndarray]
ScalarField = Callable[[np.ndarray], np.ndarray]


def cell_integrals(space: EGSpace, integrand: Callable[[np.ndarray], np.ndarray],
                   degree: int = Constants.ERROR_CELL_QUADRATURE_DEGREE) -> np.ndarray:
    """Integral of integrand(points) over every cell; integrand maps (C, q, d) to (C, q, ...)."""
    mesh = space.mesh
    rule = simplex_rule(space.dim, degree)
    values = integrand(mesh.map_to_cells(rule.points))
    weights = rule.normalized_weights[None, :] * mesh.cell_measures[:, None]
    return np.einsum("cq,cq...->c...", weights, values)


def p1_mass(dim: int) -> np.ndarray:
    """Mass matrix of the barycentric basis on a simplex of unit measure."""
    n = dim + 1
    return (np.ones((n, n)) + np.eye(n)) / (n * (n + 1))


def interpolate_Pi_h(space: EGSpace, u: VectorField, grad_u: TensorField) -> EGField:
    """
    Nodal interpolant in the continuous part; the enrichment restores the cell
    mean of the divergence, c_T = (int_T div(u - Pi^C u)) / (d |T|).
    """
    mesh = space.mesh
    nodal = np.asarray(u(mesh.vertices), dtype=float)
    continuous = space.field(nodal, np.zeros(space.n_enr))

    div_u = cell_integrals(space, lambda x: np.trace(grad_u(x), axis1=-2, axis2=-1))
    div_nodal = np.trace(continuous.cell_gradients(), axis1=1, axis2=2) * mesh.cell_measures
    enrichment = (div_u - div_nodal) / (space.dim * mesh.cell_measures)
    return space.field(nodal, enrichment)


def project_P0(space: EGSpace, q: ScalarField) -> PressureField:
    return PressureField(space, cell_integrals(space, q) / space.mesh.cell_measures)


@dataclass(frozen=True, eq=False)
class ThetaProjection:
    """Local L2 projections: cell_values (C, d+1, d) at cell vertices, facet_values (F, d, d) at facet vertices."""
    cell_values: np.ndarray
    facet_values: np.ndarray


def _solve_local(mass: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(mass, rhs)
    except np.linalg.LinAlgError as ex:
        raise SingularLocalMass(f"local mass matrix is singular: {ex}")


def project_Theta_h(space: EGSpace, u: VectorField) -> ThetaProjection:
    mesh = space.mesh
    d = space.dim
    degree = Constants.ERROR_CELL_QUADRATURE_DEGREE

    if np.any(mesh.cell_measures <= 0) or np.any(mesh.facet_measures <= 0):
        raise SingularLocalMass("degenerate cell or facet")

    cell_rule = simplex_rule(d, degree)
    points = mesh.map_to_cells(cell_rule.points)
    weights = cell_rule.normalized_weights[None, :] * mesh.cell_measures[:, None]
    rhs = np.einsum("cq,qk,cqi->cki", weights, cell_rule.points, u(points))
    mass = mesh.cell_measures[:, None, None] * p1_mass(d)
    cell_values = _solve_local(mass, rhs)

    rule = facet_rule(d, degree)
    points = mesh.map_to_facets(rule.points)
    weights = rule.normalized_weights[None, :] * mesh.facet_measures[:, None]
    rhs = np.einsum("fq,qa,fqi->fai", weights, rule.points, u(points))
    mass = mesh.facet_measures[:, None, None] * p1_mass(d - 1)
    facet_values = _solve_local(mass, rhs)

    return ThetaProjection(cell_values=cell_values, facet_values=facet_values)
