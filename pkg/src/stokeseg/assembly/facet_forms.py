"""Sparse building blocks shared by the EG and mEG bilinear forms."""
import numpy as np
from scipy.sparse import coo_matrix, csr_matrix, diags, identity, kron

from stokeseg.constants import Constants
from stokeseg.mesh.simplicial_mesh import SimplicialMesh
from stokeseg.quadrature.rules import facet_rule
from stokeseg.spaces.eg_space import EGSpace
from stokeseg.weakcalc.traces import DEFAULT_CONVENTION, FacetValueConvention


def reference_facet_mass(dim: int, degree: int = Constants.BILINEAR_QUADRATURE_DEGREE) -> np.ndarray:
    """int over a unit-measure facet of mu_a mu_b, by quadrature."""
    rule = facet_rule(dim, degree)
    return np.einsum("q,qa,qb->ab", rule.normalized_weights, rule.points, rule.points)


def facet_mass_matrix(mesh: SimplicialMesh) -> csr_matrix:
    """(F*d*d) square: L2 inner product of vector-valued linear facet functions given at facet vertices."""
    block = np.kron(reference_facet_mass(mesh.dim), np.eye(mesh.dim))
    return kron(diags(mesh.facet_measures), block, format="csr")


def penalty_matrix(space: EGSpace, convention: FacetValueConvention = DEFAULT_CONVENTION) -> csr_matrix:
    """sum_e h_e^{-1} <[phi_i], [phi_j]>_e over all facets."""
    mesh = space.mesh
    jump = convention.jump_operator(space)
    weights = diags(np.repeat(1.0 / mesh.facet_h, mesh.dim * mesh.dim))
    return (jump.T @ weights @ facet_mass_matrix(mesh) @ jump).tocsr()


def cell_tensor_mass(mesh: SimplicialMesh) -> csr_matrix:
    return diags(np.repeat(mesh.cell_measures, mesh.dim * mesh.dim)).tocsr()


def strong_gradient_matrix(space: EGSpace) -> csr_matrix:
    """(C*d*d, n_velocity): broken gradient of each basis function, row T*d*d + i*d + j."""
    mesh = space.mesh
    d = mesh.dim
    n_local = d + 1

    cell = np.arange(mesh.n_cells)[:, None, None, None]
    i = np.arange(d)[None, None, :, None]
    j = np.arange(d)[None, None, None, :]
    shape = (mesh.n_cells, n_local, d, d)

    rows = np.broadcast_to(cell * d * d + i * d + j, shape)
    cols = np.broadcast_to(i * mesh.n_vertices + mesh.cells[:, :, None, None], shape)
    values = np.broadcast_to(mesh.cell_gradients[:, :, None, :], shape)

    enr_rows = np.arange(mesh.n_cells)[:, None] * d * d + np.arange(d)[None, :] * (d + 1)
    enr_cols = np.broadcast_to(space.n_cont + np.arange(mesh.n_cells)[:, None], enr_rows.shape)

    all_rows = np.concatenate([rows.ravel(), enr_rows.ravel()])
    all_cols = np.concatenate([cols.ravel(), enr_cols.ravel()])
    all_values = np.concatenate([values.ravel(), np.ones(enr_rows.size)])
    return coo_matrix((all_values, (all_rows, all_cols)), shape=(mesh.n_cells * d * d, space.n_velocity)).tocsr()


def facet_average(mesh: SimplicialMesh, block: int = 1) -> csr_matrix:
    """
    (F*block, C*block): average of a piecewise-constant cell quantity of size ``block``
    on each facet; one-sided on boundary facets.
    """
    plus, minus = mesh.facet_cells[:, 0], mesh.facet_cells[:, 1]
    interior = minus >= 0
    rows = np.concatenate([np.arange(mesh.n_facets), np.flatnonzero(interior)])
    cols = np.concatenate([plus, minus[interior]])
    values = np.concatenate([np.where(interior, 0.5, 1.0), np.full(interior.sum(), 0.5)])
    scalar = coo_matrix((values, (rows, cols)), shape=(mesh.n_facets, mesh.n_cells)).tocsr()
    if block == 1:
        return scalar
    return kron(scalar, identity(block), format="csr")


def facet_integral_operator(mesh: SimplicialMesh) -> csr_matrix:
    """(F*d, F*d*d): integral over the facet of a linear facet vector given at facet vertices."""
    d = mesh.dim
    cols = np.arange(mesh.n_facets * d * d).reshape(mesh.n_facets, d, d)
    rows = np.broadcast_to(np.arange(mesh.n_facets * d).reshape(mesh.n_facets, 1, d), cols.shape)
    values = np.broadcast_to((mesh.facet_measures / d)[:, None, None], cols.shape)
    return coo_matrix((values.ravel(), (rows.ravel(), cols.ravel())),
                      shape=(mesh.n_facets * d, mesh.n_facets * d * d)).tocsr()


def normal_contraction(mesh: SimplicialMesh, tensor: bool) -> csr_matrix:
    """
    Contraction with n_e: tensor=True maps (F*d*d) tensors X to X n_e (F*d);
    tensor=False maps (F*d) vectors w to w . n_e (F).
    """
    d = mesh.dim
    if tensor:
        rows = np.broadcast_to(np.arange(mesh.n_facets * d).reshape(mesh.n_facets, d, 1), (mesh.n_facets, d, d))
        cols = np.arange(mesh.n_facets * d * d).reshape(mesh.n_facets, d, d)
        values = np.broadcast_to(mesh.facet_normals[:, None, :], cols.shape)
        shape = (mesh.n_facets * d, mesh.n_facets * d * d)
    else:
        rows = np.broadcast_to(np.arange(mesh.n_facets)[:, None], (mesh.n_facets, d))
        cols = np.arange(mesh.n_facets * d).reshape(mesh.n_facets, d)
        values = mesh.facet_normals
        shape = (mesh.n_facets, mesh.n_facets * d)
    return coo_matrix((np.ravel(values), (rows.ravel(), cols.ravel())), shape=shape).tocsr()


def jump_integral_operator(space: EGSpace, convention: FacetValueConvention = DEFAULT_CONVENTION) -> csr_matrix:
    """(F*d, n_velocity): int_e [phi] ds per facet and component."""
    return (facet_integral_operator(space.mesh) @ convention.jump_operator(space)).tocsr()


def symmetrized(matrix) -> csr_matrix:
    return (0.5 * (matrix + matrix.T)).tocsr()
