import numpy as np

from stokeseg.spaces.eg_space import EGField
from stokeseg.weakcalc.traces import DEFAULT_CONVENTION, FacetValueConvention
from stokeseg.weakcalc.weak_gradient import build_weak_gradient_stencil


def jump_on_facet(field: EGField, facet: int,
                  convention: FacetValueConvention = DEFAULT_CONVENTION,
                  reverse: bool = False) -> np.ndarray:
    """
    Jump at the facet vertices, shape (d, d): [facet vertex, component].

    Interior facets: v+ - v-; boundary facets: trace minus facet value, i.e. the
    enrichment trace under the default convention. ``reverse`` swaps the roles of
    T+ and T-, which flips the sign.
    """
    mesh = field.space.mesh
    corners = mesh.vertices[mesh.facet_vertices[facet]]
    plus, minus = mesh.facet_cells[facet]
    plus_trace = field.values(np.full(len(corners), plus), corners)
    if minus >= 0:
        jump = plus_trace - field.values(np.full(len(corners), minus), corners)
    else:
        jump = plus_trace - convention.facet_value_direct(field, facet)
    return -jump if reverse else jump


def _facet_jumps(field: EGField, convention: FacetValueConvention) -> np.ndarray:
    space = field.space
    jumps = convention.jump_operator(space) @ field.coefficients
    return jumps.reshape(space.mesh.n_facets, space.dim, space.dim)


def _facet_average(mesh, per_cell: np.ndarray) -> np.ndarray:
    plus, minus = mesh.facet_cells[:, 0], mesh.facet_cells[:, 1]
    interior = minus >= 0
    average = per_cell[plus].copy()
    average[interior] = 0.5 * (per_cell[plus[interior]] + per_cell[minus[interior]])
    return average


def strong_weak_residual(field: EGField, tensors: np.ndarray,
                         convention: FacetValueConvention = DEFAULT_CONVENTION) -> tuple[float, float]:
    """
    Both sides of (grad v - grad_w v, X)_T = <[v], {X} n_e>_E for a piecewise-constant
    tensor field X given per cell, shape (C, d, d).
    """
    space = field.space
    mesh = space.mesh
    stencil = build_weak_gradient_stencil(space, convention)
    difference = field.cell_gradients() - stencil.of(field)
    lhs = np.einsum("c,cij,cij->", mesh.cell_measures, difference, tensors)

    jump_means = _facet_jumps(field, convention).mean(axis=1)
    flux = np.einsum("fij,fj->fi", _facet_average(mesh, tensors), mesh.facet_normals)
    rhs = np.einsum("f,fi,fi->", mesh.facet_measures, jump_means, flux)
    return float(lhs), float(rhs)


def strong_weak_divergence_residual(field: EGField, q: np.ndarray,
                                    convention: FacetValueConvention = DEFAULT_CONVENTION) -> tuple[float, float]:
    """Both sides of (div v - div_w v, q)_T = <[v] . n_e, {q}>_E for piecewise-constant q."""
    space = field.space
    mesh = space.mesh
    stencil = build_weak_gradient_stencil(space, convention)
    strong = np.trace(field.cell_gradients(), axis1=1, axis2=2)
    lhs = np.dot(mesh.cell_measures * (strong - stencil.divergence_of(field)), q)

    jump_means = _facet_jumps(field, convention).mean(axis=1)
    normal_flux = np.einsum("fi,fi->f", jump_means, mesh.facet_normals)
    rhs = np.dot(mesh.facet_measures * normal_flux, _facet_average(mesh, np.asarray(q, dtype=float)))
    return float(lhs), float(rhs)
