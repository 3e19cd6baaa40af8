import numpy as np
import pytest

from stokeseg.analysis.exact_solutions import solution_vortex2d
from stokeseg.assembly.dirichlet import apply_dirichlet
from stokeseg.assembly.load import assemble_load
from stokeseg.assembly.meg import assemble_meg
from stokeseg.constants import Constants
from stokeseg.solver.errors import NonConvergence, SingularSystem
from stokeseg.solver.saddle_solver import build_augmented, solve
from stokeseg.spaces.eg_space import EGSpace


@pytest.fixture
def vortex_system(square_mesh):
    exact = solution_vortex2d(1.0)
    space = EGSpace(square_mesh)
    system = assemble_meg(square_mesh, space, exact.nu)
    system = system.with_load(assemble_load(square_mesh, space, exact.f))
    return apply_dirichlet(system, exact.g)


def test_augmented_matrix_is_symmetric(vortex_system):
    augmented = build_augmented(vortex_system)
    n_free = len(vortex_system.free_dofs)
    assert augmented.n_velocity == n_free
    assert augmented.size == n_free + vortex_system.B.shape[0] + 1
    dense = augmented.matrix.toarray()
    assert np.abs(dense - dense.T).max() == 0.0


def test_solution_satisfies_the_discrete_equations(vortex_system):
    velocity, pressure, report = solve(vortex_system)
    system = vortex_system.system
    assert report.strategy == "lu"
    assert report.relative_residual <= Constants.SOLVER_RELATIVE_RESIDUAL
    assert abs(pressure.mean()) < 1e-12

    # the velocity vanishes on the boundary, so the multiplier is zero and div_w u_h = 0
    assert np.abs(system.B @ velocity.coefficients).max() < 1e-10
    momentum = system.A @ velocity.coefficients - system.B.T @ pressure.values - system.F
    assert np.abs(momentum[system.space.free_dofs]).max() < 1e-9


def test_boundary_dofs_carry_the_data(vortex_system):
    velocity, _, _ = solve(vortex_system)
    assert np.all(velocity.coefficients[vortex_system.boundary_dofs] == 0.0)


def test_factorization_failure(vortex_system, mocker):
    mocker.patch("stokeseg.solver.saddle_solver.splu", side_effect=RuntimeError("Factor is exactly singular"))
    with pytest.raises(SingularSystem):
        solve(vortex_system)


def test_gmres_fallback_that_stalls(vortex_system, mocker):
    mocker.patch.object(Constants, "SOLVER_RELATIVE_RESIDUAL", 0.0)
    gmres = mocker.patch("stokeseg.solver.saddle_solver.gmres", side_effect=lambda matrix, rhs, x0, **kwargs: (x0, 1))
    with pytest.raises(NonConvergence):
        solve(vortex_system)
    gmres.assert_called_once()


def test_zero_data_gives_the_zero_solution(perturbed_square_mesh):
    space = EGSpace(perturbed_square_mesh)
    velocity, pressure, _ = solve(apply_dirichlet(assemble_meg(perturbed_square_mesh, space, 1.0)))
    assert np.abs(velocity.coefficients).max() < 1e-12
    assert np.abs(pressure.values).max() < 1e-12


def test_solution_is_linear_in_the_load(vortex_system):
    system = vortex_system.system
    velocity, pressure, _ = solve(vortex_system)
    tripled = apply_dirichlet(system.with_load(3.0 * system.F))
    velocity_3, pressure_3, _ = solve(tripled)
    assert np.allclose(velocity_3.coefficients, 3.0 * velocity.coefficients,
                       rtol=1e-10, atol=1e-14 * np.abs(velocity.coefficients).max())
    assert np.allclose(pressure_3.values, 3.0 * pressure.values, rtol=1e-10, atol=1e-14 * np.abs(pressure.values).max())
