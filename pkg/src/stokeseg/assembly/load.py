from typing import Callable

import numpy as np

from stokeseg.assembly.reconstruction import ReconstructionOperator, bdm_load
from stokeseg.constants import Constants
from stokeseg.mesh.simplicial_mesh import SimplicialMesh
from stokeseg.quadrature.rules import simplex_rule
from stokeseg.spaces.eg_space import EGSpace

Forcing = Callable[[np.ndarray], np.ndarray]


def assemble_load(mesh: SimplicialMesh, space: EGSpace, f: Forcing) -> np.ndarray:
    """F_i = sum_T int_T f . phi_i dx."""
    d = space.dim
    rule = simplex_rule(d, Constants.LOAD_QUADRATURE_DEGREE)
    points = mesh.map_to_cells(rule.points)
    values = np.asarray(f(points), dtype=float)
    weights = rule.normalized_weights[None, :] * mesh.cell_measures[:, None]

    nodal = np.einsum("cq,qk,cqi->cki", weights, rule.points, values)
    dofs = np.arange(d)[None, None, :] * mesh.n_vertices + mesh.cells[:, :, None]
    continuous = np.bincount(dofs.ravel(), weights=nodal.ravel(), minlength=space.n_cont)

    offsets = points - mesh.cell_barycenters[:, None, :]
    enrichment = np.einsum("cq,cqi,cqi->c", weights, values, offsets)
    return np.concatenate([continuous, enrichment])


def assemble_load_pr(mesh: SimplicialMesh, space: EGSpace, f: Forcing, R: ReconstructionOperator) -> np.ndarray:
    """F_i = (f, R phi_i), through the dual BDM1 basis: F = R^T G."""
    return R.moments.T @ bdm_load(R, f)
