import math

import numpy as np
import pytest

from stokeseg.analysis.errors import InvalidStudy
from stokeseg.analysis.exact_solutions import solution_cube3d, solution_vortex2d, with_gradient_forcing
from stokeseg.analysis.experiment import assemble_system, solve_stokes
from stokeseg.assembly.errors import InvalidPenalty
from stokeseg.constants import Method
from stokeseg.mesh.generators import generate_unit_square
from stokeseg.spaces.eg_space import EGSpace


def phi(x):
    return 10 * x[..., 0] ** 3 * x[..., 1]


def grad_phi(x):
    return np.stack([30 * x[..., 0] ** 2 * x[..., 1], 10 * x[..., 0] ** 3], axis=-1)


def test_assembly_rules(square_mesh):
    space = EGSpace(square_mesh)
    with pytest.raises(InvalidPenalty):
        assemble_system(square_mesh, space, Method.EG, 1.0)
    with pytest.raises(InvalidPenalty):
        assemble_system(square_mesh, space, Method.PR_MEG, 1.0, rho=2.0)
    assert assemble_system(square_mesh, space, Method.PR_MEG, 1.0).method is Method.PR_MEG
    assert assemble_system(square_mesh, space, Method.MEG, 1.0, rho=3.0).rho == 3.0


def test_dimension_mismatch(square_mesh):
    with pytest.raises(InvalidStudy):
        solve_stokes(square_mesh, solution_cube3d(1.0), Method.MEG)


@pytest.mark.parametrize("method, rho", [(Method.EG, 10.0), (Method.MEG, None), (Method.PR_MEG, None)])
def test_record_fields(method, rho):
    mesh = generate_unit_square(8)
    record, solution = solve_stokes(mesh, solution_vortex2d(1.0), method, rho, condition=True)
    assert record.method is method
    assert record.h == 0.125
    assert record.rho == rho
    assert 0 < record.err_u_triple < 1.0
    assert 0 < record.err_p_l2 < 2.0
    assert record.cond2 > 1.0
    assert record.assemble_s >= 0 and record.solve_s >= 0
    assert (solution.reconstruction is not None) == (method is Method.PR_MEG)
    assert abs(solution.pressure.mean()) < 1e-12


def test_condition_number_over_budget_is_skipped(square_mesh):
    record, _ = solve_stokes(square_mesh, solution_vortex2d(1.0), Method.MEG, condition=True, condition_budget=5)
    assert math.isnan(record.cond2)
    assert not record.failed


def test_refinement_reduces_the_error():
    coarse, _ = solve_stokes(generate_unit_square(4), solution_vortex2d(1.0), Method.MEG)
    fine, _ = solve_stokes(generate_unit_square(8), solution_vortex2d(1.0), Method.MEG)
    assert fine.err_u_triple < 0.8 * coarse.err_u_triple
    assert fine.err_p_l2 < coarse.err_p_l2


def test_pressure_robust_velocity_ignores_gradient_forces():
    mesh = generate_unit_square(8)
    exact = solution_vortex2d(1e-4)
    forced = with_gradient_forcing(exact, phi, grad_phi)

    _, plain = solve_stokes(mesh, exact, Method.PR_MEG)
    _, shifted = solve_stokes(mesh, forced, Method.PR_MEG)
    difference = np.abs(plain.velocity.coefficients - shifted.velocity.coefficients).max()
    assert difference <= 1e-8 * max(1.0, np.abs(plain.velocity.coefficients).max())


def test_standard_load_leaks_gradient_forces_into_the_velocity():
    mesh = generate_unit_square(8)
    exact = solution_vortex2d(1e-4)
    forced = with_gradient_forcing(exact, phi, grad_phi)

    _, plain = solve_stokes(mesh, exact, Method.MEG)
    _, shifted = solve_stokes(mesh, forced, Method.MEG)
    assert np.abs(plain.velocity.coefficients - shifted.velocity.coefficients).max() > 1e-3
