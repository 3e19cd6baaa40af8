import logging
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix, diags, kron

from stokeseg.assembly.errors import SingularLocalBDM
from stokeseg.constants import Constants
from stokeseg.mesh.simplicial_mesh import SimplicialMesh
from stokeseg.quadrature.rules import facet_rule, simplex_rule
from stokeseg.spaces.eg_space import EGField, EGSpace
from stokeseg.weakcalc.traces import MINUS, PLUS, facet_traces

logger = logging.getLogger(__name__)


def facet_moment_basis(dim: int, facet_barycentric: np.ndarray) -> np.ndarray:
    """
    P1 test functions for the normal moments, evaluated at facet barycentric points (q, d).
    Edges: 1 and 2s/|e| - 1 with s measured from the lower-indexed vertex.
    Faces: 1, mu_1 - 1/3, mu_2 - 1/3 with vertices in ascending global order.
    """
    mu = np.atleast_2d(facet_barycentric)
    if dim == 2:
        return np.stack([np.ones(len(mu)), 2.0 * mu[:, 1] - 1.0], axis=1)
    return np.stack([np.ones(len(mu)), mu[:, 1] - 1.0 / 3.0, mu[:, 2] - 1.0 / 3.0], axis=1)


def reference_moments(dim: int) -> np.ndarray:
    """Q[k, a] = (1/|e|) int_e q_k mu_a, exact by a degree-2 facet rule."""
    rule = facet_rule(dim, 2)
    return np.einsum("q,qk,qa->ka", rule.normalized_weights, facet_moment_basis(dim, rule.points), rule.points)


@dataclass(frozen=True, eq=False)
class ReconstructionOperator:
    """
    Map R from EG velocities to BDM1: ``moments`` (F*d, n_velocity) gives the
    normal moments int_e (Rv . n_e) q_k, row f*d + k; ``local_inverse`` (C, m, m)
    takes a cell's facet moments, ordered (local facet, k), to the values of Rv at
    the cell vertices, ordered (local vertex, component).
    """
    space: EGSpace
    moments: csr_matrix
    local_inverse: np.ndarray

    def moments_of(self, field: EGField) -> np.ndarray:
        return (self.moments @ field.coefficients).reshape(self.space.mesh.n_facets, self.space.dim)

    def cell_coefficients(self, field: EGField) -> np.ndarray:
        """Values of Rv at the vertices of each cell, shape (C, d+1, d)."""
        mesh = self.space.mesh
        local_moments = self.moments_of(field)[mesh.cell_facets].reshape(mesh.n_cells, -1)
        values = np.einsum("cml,cl->cm", self.local_inverse, local_moments)
        return values.reshape(mesh.n_cells, mesh.dim + 1, mesh.dim)

    def evaluate(self, field: EGField, cell: int, x) -> np.ndarray:
        mesh = self.space.mesh
        lam = mesh.barycentric(np.int64(cell), np.asarray(x, dtype=float))
        return lam @ self.cell_coefficients(field)[cell]

    def cell_divergence(self, field: EGField) -> np.ndarray:
        return np.einsum("cki,cki->c", self.cell_coefficients(field), self.space.mesh.cell_gradients)


def _vertex_slots(mesh: SimplicialMesh) -> np.ndarray:
    """slot[c, l, i]: position of local vertex i within local facet l's sorted vertices, -1 if opposite."""
    n_local = mesh.dim + 1
    facet_vertices = mesh.facet_vertices[mesh.cell_facets]
    matches = facet_vertices[:, :, None, :] == mesh.cells[:, None, :, None]
    slots = np.where(matches.any(axis=3), matches.argmax(axis=3), -1)
    slots[:, np.arange(n_local), np.arange(n_local)] = -1
    return slots


def local_moment_matrices(mesh: SimplicialMesh) -> np.ndarray:
    """L[c, (l, k), (i, comp)] = int_{e_l} lambda_i n_{e_l, comp} q_k ds."""
    d = mesh.dim
    n_local = d + 1
    moments = reference_moments(d)
    slots = _vertex_slots(mesh)
    normals = mesh.facet_normals[mesh.cell_facets]
    measures = mesh.facet_measures[mesh.cell_facets]

    # (c, l, k, i)
    facet_integrals = np.where(slots[:, :, None, :] >= 0,
                               moments[:, np.maximum(slots, 0)].transpose(1, 2, 0, 3),
                               0.0)
    facet_integrals = facet_integrals * measures[:, :, None, None]
    matrices = np.einsum("clki,clj->clkij", facet_integrals, normals)
    return matrices.reshape(mesh.n_cells, n_local * d, n_local * d)


def _moment_operator(space: EGSpace) -> csr_matrix:
    mesh = space.mesh
    d = space.dim
    traces = facet_traces(space)
    average = traces.continuous + 0.5 * (traces.enrichment[PLUS] + traces.enrichment[MINUS])

    # (F*d (a), F*d*d (a, i)): dot with n_e at each facet vertex
    cols = np.arange(mesh.n_facets * d * d).reshape(mesh.n_facets, d, d)
    rows = np.broadcast_to(np.arange(mesh.n_facets * d).reshape(mesh.n_facets, d, 1), cols.shape)
    values = np.broadcast_to(mesh.facet_normals[:, None, :], cols.shape)
    normal_values = coo_matrix((values.ravel(), (rows.ravel(), cols.ravel())),
                               shape=(mesh.n_facets * d, mesh.n_facets * d * d))

    # (F*d (k), F*d (a)): |e| Q, zero on boundary facets
    scale = np.where(mesh.boundary_facets, 0.0, mesh.facet_measures)
    moment_weights = kron(diags(scale), reference_moments(d))

    return (moment_weights @ normal_values @ average).tocsr()


def build_reconstruction(mesh: SimplicialMesh, space: EGSpace) -> ReconstructionOperator:
    matrices = local_moment_matrices(mesh)
    try:
        inverse = np.linalg.inv(matrices)
    except np.linalg.LinAlgError as ex:
        raise SingularLocalBDM(f"local BDM1 moment matrix is singular: {ex}")
    if not np.all(np.isfinite(inverse)):
        raise SingularLocalBDM("local BDM1 moment matrix is singular")

    reconstruction = ReconstructionOperator(space=space, moments=_moment_operator(space), local_inverse=inverse)
    logger.debug("Reconstruction built", extra={"facets": mesh.n_facets, "nonzeros": reconstruction.moments.nnz})
    return reconstruction


def bdm_load(reconstruction: ReconstructionOperator, f, degree: int = Constants.LOAD_QUADRATURE_DEGREE) -> np.ndarray:
    """G[f*d + k] = int_Omega f . Phi_{f,k} for the BDM1 basis dual to the moments."""
    space = reconstruction.space
    mesh = space.mesh
    d = space.dim
    rule = simplex_rule(d, degree)
    weights = rule.normalized_weights[None, :] * mesh.cell_measures[:, None]
    values = np.asarray(f(mesh.map_to_cells(rule.points)), dtype=float)
    nodal_loads = np.einsum("cq,qi,cqj->cij", weights, rule.points, values).reshape(mesh.n_cells, -1)

    local = np.einsum("cml,cm->cl", reconstruction.local_inverse, nodal_loads)
    slots = (mesh.cell_facets[:, :, None] * d + np.arange(d)[None, None, :]).ravel()
    return np.bincount(slots, weights=local.ravel(), minlength=mesh.n_facets * d)
