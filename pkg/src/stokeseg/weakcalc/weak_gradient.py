import logging
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix

from stokeseg.mesh.simplicial_mesh import SimplicialMesh
from stokeseg.quadrature.rules import facet_rule
from stokeseg.spaces.eg_space import EGField, EGSpace
from stokeseg.weakcalc.traces import DEFAULT_CONVENTION, FacetValueConvention

logger = logging.getLogger(__name__)


def facet_mean_operator(mesh: SimplicialMesh) -> csr_matrix:
    """(F*d, F*d*d): mean over the facet vertices of a linear facet function, per component."""
    d = mesh.dim
    rows = np.arange(mesh.n_facets * d).reshape(mesh.n_facets, 1, d)
    cols = np.arange(mesh.n_facets * d * d).reshape(mesh.n_facets, d, d)
    rows = np.broadcast_to(rows, cols.shape)
    return coo_matrix((np.full(cols.size, 1.0 / d), (rows.ravel(), cols.ravel())),
                      shape=(mesh.n_facets * d, mesh.n_facets * d * d)).tocsr()


def lifting_operator(mesh: SimplicialMesh) -> csr_matrix:
    """
    (C*d*d, F*d): facet mean values to cell tensors,
    G_T[i, j] = 1/|T| sum_{e in dT} |e| vbar_e[i] n_{T,e}[j].
    """
    d = mesh.dim
    n_local = d + 1
    cell = np.repeat(np.arange(mesh.n_cells), n_local)
    facet = mesh.cell_facets.ravel()
    outward = mesh.cell_facet_signs.ravel()[:, None] * mesh.facet_normals[facet]
    scale = (mesh.facet_measures[facet] / mesh.cell_measures[cell])[:, None] * outward

    i = np.arange(d)[None, :, None]
    j = np.arange(d)[None, None, :]
    rows = cell[:, None, None] * d * d + i * d + j
    cols = facet[:, None, None] * d + i + 0 * j
    values = np.broadcast_to(scale[:, None, :], rows.shape)
    return coo_matrix((values.ravel(), (rows.ravel(), cols.ravel())),
                      shape=(mesh.n_cells * d * d, mesh.n_facets * d)).tocsr()


def trace_operator(mesh: SimplicialMesh) -> csr_matrix:
    """(C, C*d*d): trace of each cell tensor."""
    d = mesh.dim
    rows = np.repeat(np.arange(mesh.n_cells), d)
    cols = (rows * d * d + np.tile(np.arange(d) * (d + 1), mesh.n_cells))
    return coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(mesh.n_cells, mesh.n_cells * d * d)).tocsr()


@dataclass(frozen=True, eq=False)
class WeakGradientStencil:
    """
    Weak gradients of every velocity basis function, as a sparse matrix of
    shape (C*d*d, n_velocity): column k holds (grad_w phi_k)|_T for all T,
    row ``T*d*d + i*d + j``. ``divergence`` is its cell-wise trace, (C, n_velocity).
    """
    space: EGSpace
    convention: FacetValueConvention
    gradient: csr_matrix
    divergence: csr_matrix

    def tensor(self, cell: int, dof: int) -> np.ndarray:
        d = self.space.dim
        block = self.gradient[cell * d * d:(cell + 1) * d * d, dof]
        return block.toarray().reshape(d, d)

    def of(self, field: EGField) -> np.ndarray:
        d = self.space.dim
        return (self.gradient @ field.coefficients).reshape(-1, d, d)

    def divergence_of(self, field: EGField) -> np.ndarray:
        return self.divergence @ field.coefficients


def build_weak_gradient_stencil(space: EGSpace,
                                convention: FacetValueConvention = DEFAULT_CONVENTION) -> WeakGradientStencil:
    mesh = space.mesh
    gradient = (lifting_operator(mesh) @ facet_mean_operator(mesh) @ convention.value_operator(space)).tocsr()
    gradient.eliminate_zeros()
    divergence = (trace_operator(mesh) @ gradient).tocsr()
    logger.debug("Weak gradient stencil built", extra={"cells": mesh.n_cells, "nonzeros": gradient.nnz})
    return WeakGradientStencil(space=space, convention=convention, gradient=gradient, divergence=divergence)


def weak_gradient_cell(field: EGField, cell: int,
                       convention: FacetValueConvention = DEFAULT_CONVENTION) -> np.ndarray:
    """(1/|T|) sum_e |e| {v}(midpoint of e) (x) n_{T,e}, facet values evaluated directly."""
    mesh = field.space.mesh
    gradient = np.zeros((mesh.dim, mesh.dim))
    for facet, sign in zip(mesh.cell_facets[cell], mesh.cell_facet_signs[cell]):
        midpoint_value = convention.facet_value_direct(field, int(facet)).mean(axis=0)
        gradient += mesh.facet_measures[facet] * np.outer(midpoint_value, sign * mesh.facet_normals[facet])
    return gradient / mesh.cell_measures[cell]


def weak_divergence_cell(field: EGField, cell: int,
                         convention: FacetValueConvention = DEFAULT_CONVENTION) -> float:
    return float(np.trace(weak_gradient_cell(field, cell, convention)))


def weak_gradient_from_facet_values(mesh: SimplicialMesh, facet_values: np.ndarray, degree: int = 1) -> np.ndarray:
    """
    Weak gradients (C, d, d) of a weak function whose facet part is linear with the
    given values at facet vertices (F, d, d), integrating with a facet rule of the
    requested degree.
    """
    rule = facet_rule(mesh.dim, degree)
    at_points = np.einsum("qa,fai->fqi", rule.points, facet_values)
    means = np.einsum("q,fqi->fi", rule.normalized_weights, at_points)
    tensors = lifting_operator(mesh) @ means.ravel()
    return tensors.reshape(mesh.n_cells, mesh.dim, mesh.dim)
