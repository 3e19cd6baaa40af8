import logging
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from stokeseg.analysis.exact_solutions import ExactSolution
from stokeseg.constants import Constants, Method
from stokeseg.mesh.simplicial_mesh import SimplicialMesh
from stokeseg.quadrature.rules import facet_rule
from stokeseg.spaces.eg_space import EGField, EGSpace, PressureField
from stokeseg.spaces.projections import cell_integrals
from stokeseg.weakcalc.traces import DEFAULT_CONVENTION, PLUS, facet_traces
from stokeseg.weakcalc.weak_gradient import build_weak_gradient_stencil

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ErrorNorms:
    """err_u_energy is NaN for methods without a penalty parameter."""
    err_u_triple: float
    err_u_energy: float
    err_p_l2: float
    err_p_proj: float


def exact_pressure_mean(space: EGSpace, exact: ExactSolution) -> float:
    return float(cell_integrals(space, exact.p).sum() / space.mesh.domain_measure)


def _gradient_error_squared(space: EGSpace, exact: ExactSolution, cell_tensors: np.ndarray) -> float:
    def integrand(x):
        difference = exact.grad_u(x) - cell_tensors[:, None, :, :]
        return np.sum(difference ** 2, axis=(-2, -1))

    return float(cell_integrals(space, integrand).sum())


def _facet_error_squared(mesh: SimplicialMesh, u_h: EGField, exact: ExactSolution) -> tuple[float, float]:
    """
    Scaled jump contributions sum_e h_e^{-1} int_e |.|^2, split as (interior, boundary).
    Interior facets measure [u_h]; boundary facets measure g - trace(u_h) with the full trace.
    """
    space = u_h.space
    d = space.dim
    rule = facet_rule(d, Constants.ERROR_FACET_QUADRATURE_DEGREE)
    scale = rule.normalized_weights[None, :] * (mesh.facet_measures / mesh.facet_h)[:, None]

    interior = mesh.interior_facet_ids
    jump_values = (DEFAULT_CONVENTION.jump_operator(space) @ u_h.coefficients).reshape(mesh.n_facets, d, d)
    jumps = np.einsum("qa,fai->fqi", rule.points, jump_values[interior])
    interior_part = float(np.einsum("fq,fqi->", scale[interior], jumps ** 2))

    boundary = mesh.boundary_facet_ids
    trace_values = (facet_traces(space).side(PLUS) @ u_h.coefficients).reshape(mesh.n_facets, d, d)
    traces = np.einsum("qa,fai->fqi", rule.points, trace_values[boundary])
    g = exact.g(mesh.map_to_facets(rule.points, boundary))
    boundary_part = float(np.einsum("fq,fqi->", scale[boundary], (g - traces) ** 2))
    return interior_part, boundary_part


def pressure_errors(space: EGSpace, exact: ExactSolution, p_h: PressureField) -> tuple[float, float]:
    """(||p - p_h||_0, ||P_0 p - p_h||_0) against the mean-free exact pressure."""
    mean = exact_pressure_mean(space, exact)
    p_h = p_h.demeaned()
    cell_values = p_h.values

    squared = cell_integrals(space, lambda x: (exact.p(x) - mean - cell_values[:, None]) ** 2)
    projected = cell_integrals(space, exact.p) / space.mesh.cell_measures - mean
    proj_squared = space.mesh.cell_measures * (projected - cell_values) ** 2
    return math.sqrt(float(squared.sum())), math.sqrt(float(proj_squared.sum()))


def error_norms(mesh: SimplicialMesh, space: EGSpace, exact: ExactSolution, u_h: EGField, p_h: PressureField,
                method: Method, rho: Optional[float] = None) -> ErrorNorms:
    """
    err_u_triple^2 = ||grad u - grad_w u_h||^2 + sum_e h_e^{-1} ||jump||_e^2, with the exact
    gradient against the weak gradient; err_u_energy uses the broken gradient and rho-weighted
    jumps and is only defined for EG.
    """
    interior, boundary = _facet_error_squared(mesh, u_h, exact)
    jumps = interior + boundary

    weak = build_weak_gradient_stencil(space).of(u_h)
    triple = math.sqrt(_gradient_error_squared(space, exact, weak) + jumps)

    energy = math.nan
    if method is Method.EG:
        broken = u_h.cell_gradients()
        energy = math.sqrt(_gradient_error_squared(space, exact, broken) + (1.0 if rho is None else rho) * jumps)

    err_p_l2, err_p_proj = pressure_errors(space, exact, p_h)
    norms = ErrorNorms(err_u_triple=triple, err_u_energy=energy, err_p_l2=err_p_l2, err_p_proj=err_p_proj)
    logger.debug("Error norms", extra={"method": method.value, "h": mesh.nominal_h, **asdict(norms)})
    return norms
