from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix, diags

from stokeseg.spaces.eg_space import EGField, EGSpace

PLUS = 0
MINUS = 1


@dataclass(frozen=True, eq=False)
class FacetTraces:
    """
    Sparse maps from velocity coefficients to traces at facet vertices.

    Rows are ordered (facet, facet vertex, component), i.e. row ``(f*d + a)*d + i``.
    ``continuous`` is the trace of v^C (single valued); ``enrichment[side]`` is the
    trace of v^D from T+ or T- (zero rows where the side does not exist).
    """
    space: EGSpace
    continuous: csr_matrix
    enrichment: tuple[csr_matrix, csr_matrix]

    def side(self, side: int) -> csr_matrix:
        return (self.continuous + self.enrichment[side]).tocsr()


def _continuous_trace(space: EGSpace) -> csr_matrix:
    mesh = space.mesh
    d = space.dim
    rows = np.arange(mesh.n_facets * d * d).reshape(mesh.n_facets, d, d)
    vertex = np.broadcast_to(mesh.facet_vertices[:, :, None], rows.shape)
    component = np.broadcast_to(np.arange(d)[None, None, :], rows.shape)
    cols = component * mesh.n_vertices + vertex
    return coo_matrix((np.ones(rows.size), (rows.ravel(), cols.ravel())),
                      shape=(rows.size, space.n_velocity)).tocsr()


def _enrichment_trace(space: EGSpace, side: int) -> csr_matrix:
    mesh = space.mesh
    d = space.dim
    cells = mesh.facet_cells[:, side]
    present = cells >= 0
    rows = np.arange(mesh.n_facets * d * d).reshape(mesh.n_facets, d, d)[present]
    corners = mesh.vertices[mesh.facet_vertices[present]]
    values = corners - mesh.cell_barycenters[cells[present]][:, None, :]
    cols = np.broadcast_to((space.n_cont + cells[present])[:, None, None], rows.shape)
    return coo_matrix((values.ravel(), (rows.ravel(), cols.ravel())),
                      shape=(mesh.n_facets * d * d, space.n_velocity)).tocsr()


@lru_cache(maxsize=8)
def facet_traces(space: EGSpace) -> FacetTraces:
    return FacetTraces(
        space=space,
        continuous=_continuous_trace(space),
        enrichment=(_enrichment_trace(space, PLUS), _enrichment_trace(space, MINUS)),
    )


def _row_scaling(space: EGSpace, per_facet: np.ndarray):
    d = space.dim
    return diags(np.repeat(per_facet, d * d))


@dataclass(frozen=True)
class FacetValueConvention:
    """
    The value an EG field takes on a facet for weak derivatives.

    Interior facets use the average of both traces. Boundary facets use the
    trace of the continuous component only, which weakly imposes a vanishing
    enrichment there; ``boundary_enrichment=True`` selects the full one-sided
    trace instead and is meant for tests.

    The jump is the two-sided difference on interior facets and the trace minus
    the facet value on boundary facets, so that the strong and weak derivatives
    differ exactly by jump terms under either choice.
    """
    boundary_enrichment: bool = False

    def _boundary_weight(self, space: EGSpace) -> np.ndarray:
        mesh = space.mesh
        weight = np.full(mesh.n_facets, 0.5)
        weight[mesh.boundary_facets] = 1.0 if self.boundary_enrichment else 0.0
        return weight

    def value_operator(self, space: EGSpace) -> csr_matrix:
        traces = facet_traces(space)
        plus_weight = _row_scaling(space, self._boundary_weight(space))
        return (traces.continuous + plus_weight @ traces.enrichment[PLUS] + 0.5 * traces.enrichment[MINUS]).tocsr()

    def jump_operator(self, space: EGSpace) -> csr_matrix:
        traces = facet_traces(space)
        mesh = space.mesh
        plus_factor = np.ones(mesh.n_facets)
        plus_factor[mesh.boundary_facets] = 1.0 - self._boundary_weight(space)[mesh.boundary_facets]
        return (_row_scaling(space, plus_factor) @ traces.enrichment[PLUS] - traces.enrichment[MINUS]).tocsr()

    def facet_values(self, field: EGField) -> np.ndarray:
        """Facet values at facet vertices, shape (F, d, d): [facet, facet vertex, component]."""
        space = field.space
        return (self.value_operator(space) @ field.coefficients).reshape(space.mesh.n_facets, space.dim, space.dim)

    def facet_value_direct(self, field: EGField, facet: int) -> np.ndarray:
        """Facet value at the vertices of one facet, evaluated cell by cell."""
        mesh = field.space.mesh
        corners = mesh.vertices[mesh.facet_vertices[facet]]
        plus, minus = mesh.facet_cells[facet]
        plus_trace = field.values(np.full(len(corners), plus), corners)
        if minus >= 0:
            return 0.5 * (plus_trace + field.values(np.full(len(corners), minus), corners))
        if self.boundary_enrichment:
            return plus_trace
        return field.continuous_part().values(np.full(len(corners), plus), corners)


DEFAULT_CONVENTION = FacetValueConvention()
