import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import networkx as nx
import numpy as np

from stokeseg.mesh.errors import DegenerateCellError, TopologyError

logger = logging.getLogger(__name__)

NO_CELL = -1


@dataclass(frozen=True)
class Facet:
    vertices: tuple[int, ...]
    cell_plus: int
    cell_minus: Optional[int]
    normal: tuple[float, ...]
    measure: float
    h_e: float
    midpoint: tuple[float, ...]
    boundary: bool


def _readonly(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


class SimplicialMesh:
    """
    Conforming triangle (2D) or tetrahedron (3D) mesh.

    Cells are reoriented to positive measure on construction. Facets are
    enumerated from the cells: facet vertices are sorted ascending, T+ is the
    incident cell with the smaller index, and the facet normal points out of T+.
    All arrays are read-only after construction.
    """

    def __init__(self,
                 vertices,
                 cells,
                 nominal_h: Optional[float] = None,
                 boundary_markers: Optional[dict[tuple[int, ...], int]] = None):
        vertices = np.array(vertices, dtype=float)
        cells = np.array(cells, dtype=np.int64)

        if vertices.ndim != 2 or vertices.shape[1] not in (2, 3):
            raise TopologyError(f"vertices must be an (n, 2) or (n, 3) array, got shape {vertices.shape}")
        self.dim = vertices.shape[1]
        if cells.ndim != 2 or cells.shape[1] != self.dim + 1:
            raise TopologyError(f"cells must have {self.dim + 1} vertices each, got shape {cells.shape}")
        if cells.size and (cells.min() < 0 or cells.max() >= len(vertices)):
            raise TopologyError("cell refers to a vertex index out of range")

        cells = self._orient(vertices, cells)

        self.vertices = _readonly(vertices)
        self.cells = _readonly(cells)

        self._build_cell_geometry()
        self._build_facets()

        self.nominal_h = float(nominal_h) if nominal_h is not None else float(self.cell_diameters.max())
        self.boundary_markers = dict(boundary_markers or {})

        logger.debug("Mesh built", extra={
            "dim": self.dim, "vertices": self.n_vertices, "cells": self.n_cells, "facets": self.n_facets
        })

    @staticmethod
    def _orient(vertices: np.ndarray, cells: np.ndarray) -> np.ndarray:
        dim = vertices.shape[1]
        edges = vertices[cells[:, 1:]] - vertices[cells[:, :1]]
        det = np.linalg.det(edges)
        scale = np.max(np.linalg.norm(edges, axis=2), axis=1) ** dim
        degenerate = np.abs(det) <= 1e-13 * scale
        if np.any(degenerate):
            raise DegenerateCellError(f"cell {int(np.argmax(degenerate))} has zero measure")
        cells = cells.copy()
        flip = det < 0
        cells[flip, -2:] = cells[flip, -2:][:, ::-1]
        return cells

    def _build_cell_geometry(self):
        d = self.dim
        coords = self.vertices[self.cells]
        edges = coords[:, 1:] - coords[:, :1]

        self.cell_measures = _readonly(np.linalg.det(edges) / math.factorial(d))
        self.cell_barycenters = _readonly(coords.mean(axis=1))

        pairs = [(i, j) for i in range(d + 1) for j in range(i + 1, d + 1)]
        lengths = np.stack([np.linalg.norm(coords[:, i] - coords[:, j], axis=1) for i, j in pairs], axis=1)
        self.cell_edge_lengths = _readonly(lengths)
        self.cell_diameters = _readonly(lengths.max(axis=1))

        gradients = np.empty((self.n_cells, d + 1, d))
        # rows of inv(J)^T are the gradients of lambda_1..lambda_d
        gradients[:, 1:] = np.linalg.inv(edges).transpose(0, 2, 1)
        gradients[:, 0] = -gradients[:, 1:].sum(axis=1)
        self.cell_gradients = _readonly(gradients)

    def _build_facets(self):
        d = self.dim
        n_local = d + 1
        local = [[j for j in range(n_local) if j != i] for i in range(n_local)]

        # local facet i is opposite local vertex i
        candidates = np.sort(self.cells[:, local], axis=2).reshape(-1, d)
        facet_vertices, first, inverse, counts = np.unique(
            candidates, axis=0, return_index=True, return_inverse=True, return_counts=True)
        inverse = inverse.reshape(-1)

        if np.any(counts > 2):
            shared = facet_vertices[np.argmax(counts > 2)]
            raise TopologyError(f"facet {tuple(int(v) for v in shared)} is shared by more than 2 cells")

        order = np.argsort(inverse, kind="stable")
        starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
        plus_slot = order[starts]
        minus_slot = np.where(counts == 2, order[np.minimum(starts + 1, len(order) - 1)], NO_CELL)

        n_facets = len(facet_vertices)
        facet_cells = np.full((n_facets, 2), NO_CELL, dtype=np.int64)
        facet_cells[:, 0] = plus_slot // n_local
        interior = counts == 2
        facet_cells[interior, 1] = minus_slot[interior] // n_local

        plus_local = plus_slot % n_local
        opposite_gradient = self.cell_gradients[facet_cells[:, 0], plus_local]
        normals = -opposite_gradient / np.linalg.norm(opposite_gradient, axis=1, keepdims=True)

        facet_coords = self.vertices[facet_vertices]
        if d == 2:
            measures = np.linalg.norm(facet_coords[:, 1] - facet_coords[:, 0], axis=1)
        else:
            measures = 0.5 * np.linalg.norm(
                np.cross(facet_coords[:, 1] - facet_coords[:, 0], facet_coords[:, 2] - facet_coords[:, 0]), axis=1)

        self.facet_vertices = _readonly(facet_vertices.astype(np.int64))
        self.facet_cells = _readonly(facet_cells)
        self.facet_normals = _readonly(normals)
        self.facet_measures = _readonly(measures)
        self.facet_h = _readonly(measures ** (1.0 / (d - 1)))
        self.facet_midpoints = _readonly(facet_coords.mean(axis=1))
        self.boundary_facets = _readonly(~interior)

        cell_facets = inverse.reshape(self.n_cells, n_local)
        self.cell_facets = _readonly(cell_facets)
        plus_cells = facet_cells[cell_facets, 0]
        self.cell_facet_signs = _readonly(np.where(plus_cells == np.arange(self.n_cells)[:, None], 1.0, -1.0))

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    @property
    def n_facets(self) -> int:
        return len(self.facet_vertices)

    @property
    def domain_measure(self) -> float:
        return float(self.cell_measures.sum())

    @cached_property
    def interior_facet_ids(self) -> np.ndarray:
        return _readonly(np.flatnonzero(~self.boundary_facets))

    @cached_property
    def boundary_facet_ids(self) -> np.ndarray:
        return _readonly(np.flatnonzero(self.boundary_facets))

    @cached_property
    def boundary_vertices(self) -> np.ndarray:
        return _readonly(np.unique(self.facet_vertices[self.boundary_facets]))

    def facet(self, index: int) -> Facet:
        minus = int(self.facet_cells[index, 1])
        return Facet(
            vertices=tuple(int(v) for v in self.facet_vertices[index]),
            cell_plus=int(self.facet_cells[index, 0]),
            cell_minus=None if minus == NO_CELL else minus,
            normal=tuple(float(c) for c in self.facet_normals[index]),
            measure=float(self.facet_measures[index]),
            h_e=float(self.facet_h[index]),
            midpoint=tuple(float(c) for c in self.facet_midpoints[index]),
            boundary=bool(self.boundary_facets[index]),
        )

    @cached_property
    def facets(self) -> list[Facet]:
        return [self.facet(i) for i in range(self.n_facets)]

    def barycentric(self, cell_ids, points) -> np.ndarray:
        """Barycentric coordinates of points (..., d) in the given cells (broadcast against points[..., 0])."""
        cell_ids = np.asarray(cell_ids)
        points = np.asarray(points, dtype=float)
        origin = self.vertices[self.cells[cell_ids, 0]]
        gradients = self.cell_gradients[cell_ids]
        shift = points - origin
        tail = np.einsum("...kd,...d->...k", gradients[..., 1:, :], shift)
        return np.concatenate([1.0 - tail.sum(axis=-1, keepdims=True), tail], axis=-1)

    def map_to_cells(self, barycentric_points: np.ndarray) -> np.ndarray:
        """Physical images (C, q, d) of reference barycentric points (q, d+1) in every cell."""
        return np.einsum("qk,ckd->cqd", barycentric_points, self.vertices[self.cells])

    def map_to_facets(self, barycentric_points: np.ndarray, facet_ids=None) -> np.ndarray:
        """Physical images (F, q, d) of facet barycentric points (q, d) on the chosen facets."""
        facet_ids = np.arange(self.n_facets) if facet_ids is None else facet_ids
        return np.einsum("qk,fkd->fqd", barycentric_points, self.vertices[self.facet_vertices[facet_ids]])

    def dual_graph(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n_cells))
        interior = self.facet_cells[self.interior_facet_ids]
        graph.add_edges_from(map(tuple, interior.tolist()))
        return graph


def validate_connectivity(mesh: SimplicialMesh):
    if mesh.n_cells and not nx.is_connected(mesh.dual_graph()):
        components = nx.number_connected_components(mesh.dual_graph())
        raise TopologyError(f"mesh is not connected through its facets ({components} components)")
