import logging

import numpy as np
from scipy.sparse import csr_matrix, diags

from stokeseg.assembly.errors import InvalidPenalty
from stokeseg.assembly.facet_forms import (cell_tensor_mass, facet_average, jump_integral_operator,
                                           normal_contraction, penalty_matrix, strong_gradient_matrix,
                                           symmetrized)
from stokeseg.assembly.saddle_system import SaddleSystem
from stokeseg.constants import Method
from stokeseg.mesh.simplicial_mesh import SimplicialMesh
from stokeseg.spaces.eg_space import EGSpace
from stokeseg.weakcalc.weak_gradient import trace_operator

logger = logging.getLogger(__name__)


def consistency_matrix(space: EGSpace, strong_gradient: csr_matrix) -> csr_matrix:
    """K[i, j] = sum_e <{grad phi_j} n_e, [phi_i]>_e."""
    mesh = space.mesh
    average_flux = normal_contraction(mesh, tensor=True) @ facet_average(mesh, mesh.dim * mesh.dim) @ strong_gradient
    return (jump_integral_operator(space).T @ average_flux).tocsr()


def divergence_block(space: EGSpace, strong_gradient: csr_matrix) -> csr_matrix:
    """b(phi_j, q_T) = (div phi_j, 1)_T - <[phi_j] . n_e, {q_T}>."""
    mesh = space.mesh
    cell_part = diags(mesh.cell_measures) @ trace_operator(mesh) @ strong_gradient
    normal_jumps = normal_contraction(mesh, tensor=False) @ jump_integral_operator(space)
    return (cell_part - facet_average(mesh).T @ normal_jumps).tocsr()


def assemble_eg(mesh: SimplicialMesh, space: EGSpace, nu: float, rho: float) -> SaddleSystem:
    """
    a(w, v) = nu [(grad w, grad v) - <{grad w} n_e, [v]> - <{grad v} n_e, [w]> + rho <h_e^{-1}[w], [v]>]
    over all facets, with one-sided averages on the boundary.
    """
    if not rho > 0:
        raise InvalidPenalty(f"EG penalty parameter must be positive, got {rho}")

    strong = strong_gradient_matrix(space)
    consistency = consistency_matrix(space, strong)
    A = nu * (strong.T @ cell_tensor_mass(mesh) @ strong - consistency - consistency.T + rho * penalty_matrix(space))

    system = SaddleSystem(
        space=space,
        method=Method.EG,
        nu=nu,
        A=symmetrized(A),
        B=divergence_block(space, strong),
        F=np.zeros(space.n_velocity),
        m=np.array(mesh.cell_measures),
        rho=rho,
    )
    logger.info("Assembled EG system", extra={
        "cells": mesh.n_cells, "velocity_dofs": space.n_velocity, "nu": nu, "rho": rho, "A_nnz": system.A.nnz
    })
    return system
