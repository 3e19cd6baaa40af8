import logging
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix, diags

from stokeseg.assembly.errors import InvalidPenalty
from stokeseg.assembly.facet_forms import cell_tensor_mass, penalty_matrix, symmetrized
from stokeseg.assembly.saddle_system import SaddleSystem
from stokeseg.constants import Method
from stokeseg.mesh.simplicial_mesh import SimplicialMesh
from stokeseg.spaces.eg_space import EGSpace
from stokeseg.weakcalc.weak_gradient import WeakGradientStencil, build_weak_gradient_stencil

logger = logging.getLogger(__name__)


def weak_divergence_block(stencil: WeakGradientStencil) -> csr_matrix:
    """b_w(phi_j, q_T) = |T| (div_w phi_j)|_T."""
    return (diags(stencil.space.mesh.cell_measures) @ stencil.divergence).tocsr()


def _assemble_weak(mesh: SimplicialMesh, space: EGSpace, nu: float, penalty_weight: float,
                   rho_m: Optional[float]) -> SaddleSystem:
    stencil = build_weak_gradient_stencil(space)
    weak = stencil.gradient
    A = nu * (weak.T @ cell_tensor_mass(mesh) @ weak + penalty_weight * penalty_matrix(space))
    system = SaddleSystem(
        space=space,
        method=Method.MEG,
        nu=nu,
        A=symmetrized(A),
        B=weak_divergence_block(stencil),
        F=np.zeros(space.n_velocity),
        m=np.array(mesh.cell_measures),
        rho=rho_m,
    )
    logger.info("Assembled weak-derivative system", extra={
        "cells": mesh.n_cells, "velocity_dofs": space.n_velocity, "nu": nu, "A_nnz": system.A.nnz
    })
    return system


def assemble_meg(mesh: SimplicialMesh, space: EGSpace, nu: float) -> SaddleSystem:
    """
    a_w(w, v) = nu [(grad_w w, grad_w v) + <h_e^{-1} [w], [v]>], b_w(w, q) = (div_w w, q).
    The penalty weight is fixed; this form takes no penalty parameter.
    """
    return _assemble_weak(mesh, space, nu, 1.0, None)


def assemble_meg_penalized(mesh: SimplicialMesh, space: EGSpace, nu: float, rho_m: float) -> SaddleSystem:
    """The weak-derivative form with a penalty nu rho_m <h_e^{-1}[.],[.]>, for penalty sweeps only."""
    if not rho_m > 0:
        raise InvalidPenalty(f"penalty parameter must be positive, got {rho_m}")
    return _assemble_weak(mesh, space, nu, rho_m, rho_m)
