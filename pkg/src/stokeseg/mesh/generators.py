import itertools
import logging
import math

import numpy as np
from scipy.spatial import Delaunay
from scipy.sparse import coo_matrix

from stokeseg.constants import Constants
from stokeseg.mesh.errors import InvalidMeshParameter, PerturbationFoldover
from stokeseg.mesh.simplicial_mesh import SimplicialMesh, validate_connectivity

logger = logging.getLogger(__name__)

OUTER_BOUNDARY_MARKER = 1
HOLE_BOUNDARY_MARKER = 2


def _check_subdivisions(n: int):
    if n < 1:
        raise InvalidMeshParameter(f"subdivision count must be at least 1, got {n}")


def _split_squares(index: np.ndarray, i: np.ndarray, j: np.ndarray) -> np.ndarray:
    v00 = index[j, i]
    v10 = index[j, i + 1]
    v11 = index[j + 1, i + 1]
    v01 = index[j + 1, i]
    lower = np.stack([v00, v10, v11], axis=1)
    upper = np.stack([v00, v11, v01], axis=1)
    return np.stack([lower, upper], axis=1).reshape(-1, 3)


def generate_unit_square(n: int) -> SimplicialMesh:
    _check_subdivisions(n)
    ticks = np.linspace(0.0, 1.0, n + 1)
    x, y = np.meshgrid(ticks, ticks)
    vertices = np.stack([x.ravel(), y.ravel()], axis=1)
    index = np.arange((n + 1) ** 2).reshape(n + 1, n + 1)

    j, i = np.divmod(np.arange(n * n), n)
    cells = _split_squares(index, i, j)
    return SimplicialMesh(vertices, cells, nominal_h=1.0 / n)


def generate_unit_cube(n: int) -> SimplicialMesh:
    _check_subdivisions(n)
    ticks = np.linspace(0.0, 1.0, n + 1)
    z, y, x = np.meshgrid(ticks, ticks, ticks, indexing="ij")
    vertices = np.stack([x.ravel(), y.ravel(), z.ravel()], axis=1)
    stride = np.array([1, n + 1, (n + 1) ** 2])

    k, rest = np.divmod(np.arange(n ** 3), n * n)
    j, i = np.divmod(rest, n)
    corner = i * stride[0] + j * stride[1] + k * stride[2]

    # Kuhn split: one tetrahedron per monotone path from (0,0,0) to (1,1,1)
    tets = []
    for axes in itertools.permutations(range(3)):
        path = [corner]
        for axis in axes:
            path.append(path[-1] + stride[axis])
        tets.append(np.stack(path, axis=1))
    cells = np.stack(tets, axis=1).reshape(-1, 4)
    return SimplicialMesh(vertices, cells, nominal_h=1.0 / n)


def generate_lshape(n: int) -> SimplicialMesh:
    """(-1,1)^2 minus the quadrant [0,1]x[-1,0], squares of side 1/n split along one diagonal."""
    _check_subdivisions(n)
    m = 2 * n
    ticks = np.linspace(-1.0, 1.0, m + 1)
    x, y = np.meshgrid(ticks, ticks)
    index = np.arange((m + 1) ** 2).reshape(m + 1, m + 1)

    j, i = np.divmod(np.arange(m * m), m)
    kept = ~((i >= n) & (j < n))
    cells = _split_squares(index, i[kept], j[kept])

    used, compressed = np.unique(cells, return_inverse=True)
    vertices = np.stack([x.ravel(), y.ravel()], axis=1)[used]
    return SimplicialMesh(vertices, compressed.reshape(cells.shape), nominal_h=1.0 / n)


def generate_square_with_hole(n: int,
                              radius: float = Constants.HOLE_RADIUS,
                              center: tuple[float, float] = (0.5, 0.5)) -> SimplicialMesh:
    """
    Unit square with a polygonal hole approximating a disc.

    The circle is sampled with spacing close to 1/n, grid points within half a
    grid step of the circle are dropped, and the rest is Delaunay triangulated.
    Triangles spanned by circle points alone fill the hole and are removed.
    """
    _check_subdivisions(n)
    h = 1.0 / n
    center = np.asarray(center, dtype=float)
    if radius <= 0 or np.any(center - radius <= h) or np.any(center + radius >= 1.0 - h):
        raise InvalidMeshParameter("hole must lie strictly inside the square, at least one grid step from its sides")

    ticks = np.linspace(0.0, 1.0, n + 1)
    x, y = np.meshgrid(ticks, ticks)
    grid = np.stack([x.ravel(), y.ravel()], axis=1)
    grid = grid[np.linalg.norm(grid - center, axis=1) > radius + 0.5 * h]

    segments = max(8, math.ceil(2.0 * math.pi * radius * n))
    angles = 2.0 * math.pi * np.arange(segments) / segments
    circle = center + radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)

    points = np.concatenate([grid, circle])
    on_circle = np.zeros(len(points), dtype=bool)
    on_circle[len(grid):] = True

    triangles = Delaunay(points).simplices
    corners = points[triangles]
    area = 0.5 * np.abs(np.linalg.det(corners[:, 1:] - corners[:, :1]))
    kept = ~on_circle[triangles].all(axis=1) & (area > 1e-12 * h * h)
    triangles = triangles[kept]

    used, compressed = np.unique(triangles, return_inverse=True)
    mesh = SimplicialMesh(points[used], compressed.reshape(triangles.shape), nominal_h=h)
    validate_connectivity(mesh)

    circle_vertex = on_circle[used]
    markers = {}
    for facet_id in mesh.boundary_facet_ids:
        facet = tuple(int(v) for v in mesh.facet_vertices[facet_id])
        markers[facet] = HOLE_BOUNDARY_MARKER if circle_vertex[list(facet)].all() else OUTER_BOUNDARY_MARKER

    logger.info("Generated square with hole", extra={"n": n, "radius": radius, "cells": mesh.n_cells})
    return SimplicialMesh(mesh.vertices, mesh.cells, nominal_h=h, boundary_markers=markers)


def _vertex_cells(mesh: SimplicialMesh):
    rows = mesh.cells.ravel()
    cols = np.repeat(np.arange(mesh.n_cells), mesh.dim + 1)
    incidence = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(mesh.n_vertices, mesh.n_cells)).tocsr()
    return incidence.indptr, incidence.indices


def _vertex_h(mesh: SimplicialMesh) -> np.ndarray:
    d = mesh.dim
    pairs = [(i, j) for i in range(d + 1) for j in range(i + 1, d + 1)]
    vertex_h = np.full(mesh.n_vertices, np.inf)
    for column, (i, j) in enumerate(pairs):
        lengths = mesh.cell_edge_lengths[:, column]
        np.minimum.at(vertex_h, mesh.cells[:, i], lengths)
        np.minimum.at(vertex_h, mesh.cells[:, j], lengths)
    return vertex_h


def perturb(mesh: SimplicialMesh,
            amplitude: float = Constants.PERTURBATION_AMPLITUDE,
            seed: int = 0) -> SimplicialMesh:
    """
    Move every interior vertex by a uniform offset in [-amplitude*h_v, amplitude*h_v]^d,
    h_v being the shortest edge at the vertex. Vertices are visited in index order and
    each draw is retried until every incident cell keeps a positive measure.
    """
    if not 0.0 <= amplitude < 0.5:
        raise InvalidMeshParameter(f"perturbation amplitude must lie in [0, 0.5), got {amplitude}")
    if amplitude == 0.0:
        return SimplicialMesh(mesh.vertices, mesh.cells, nominal_h=mesh.nominal_h,
                              boundary_markers=mesh.boundary_markers)

    rng = np.random.default_rng(seed)
    coords = np.array(mesh.vertices)
    indptr, incident = _vertex_cells(mesh)
    vertex_h = _vertex_h(mesh)

    interior = np.setdiff1d(np.arange(mesh.n_vertices), mesh.boundary_vertices)
    for vertex in interior:
        cells = mesh.cells[incident[indptr[vertex]:indptr[vertex + 1]]]
        floor = 1e-12 * mesh.cell_measures[incident[indptr[vertex]:indptr[vertex + 1]]]
        original = coords[vertex].copy()
        bound = amplitude * vertex_h[vertex]
        for _ in range(Constants.PERTURBATION_RETRIES):
            coords[vertex] = original + rng.uniform(-bound, bound, size=mesh.dim)
            corners = coords[cells]
            signed = np.linalg.det(corners[:, 1:] - corners[:, :1])
            if np.all(signed > floor):
                break
        else:
            raise PerturbationFoldover(
                f"vertex {int(vertex)} could not be moved without folding a cell "
                f"after {Constants.PERTURBATION_RETRIES} draws")

    logger.info("Perturbed mesh", extra={"amplitude": amplitude, "seed": seed, "moved": len(interior)})
    return SimplicialMesh(coords, mesh.cells, nominal_h=mesh.nominal_h, boundary_markers=mesh.boundary_markers)
