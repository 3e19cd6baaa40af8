import math

import numpy as np

from stokeseg.mesh.errors import UnsupportedDimension
from stokeseg.mesh.simplicial_mesh import SimplicialMesh

_EQUILATERAL_SCALE = 4.0 * math.sqrt(3.0)


def triangle_quality(corners) -> float:
    """4*sqrt(3)*area / sum of squared sides; 1 for equilateral, 0 for collinear corners."""
    a, b, c = np.asarray(corners, dtype=float)
    area = 0.5 * abs(np.linalg.det(np.stack([b - a, c - a])))
    squares = np.sum((b - a) ** 2) + np.sum((c - b) ** 2) + np.sum((a - c) ** 2)
    if squares == 0.0:
        return 0.0
    return float(_EQUILATERAL_SCALE * area / squares)


def mesh_quality(mesh: SimplicialMesh) -> np.ndarray:
    if mesh.dim != 2:
        raise UnsupportedDimension("mesh quality is defined for triangle meshes only")
    squares = np.sum(mesh.cell_edge_lengths ** 2, axis=1)
    return _EQUILATERAL_SCALE * mesh.cell_measures / squares
