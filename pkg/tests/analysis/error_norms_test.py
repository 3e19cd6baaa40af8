import math

import numpy as np
import pytest

from stokeseg.analysis.error_norms import error_norms, pressure_errors
from stokeseg.analysis.exact_solutions import ExactSolution
from stokeseg.constants import Method
from stokeseg.spaces.eg_space import EGSpace, PressureField
from stokeseg.spaces.projections import project_P0

GRADIENT = np.array([[1.0, 2.0], [-0.5, -1.0]])


def linear_solution() -> ExactSolution:
    return ExactSolution(
        name="linear", dim=2, nu=1.0,
        u=lambda x: x @ GRADIENT.T + np.array([0.25, -1.0]),
        grad_u=lambda x: np.broadcast_to(GRADIENT, x.shape[:-1] + (2, 2)),
        p=lambda x: 3 * x[..., 0] - x[..., 1],
        grad_p=lambda x: np.broadcast_to([3.0, -1.0], x.shape),
        laplacian_u=lambda x: np.zeros(x.shape),
    )


@pytest.fixture
def interpolated(perturbed_square_mesh):
    exact = linear_solution()
    space = EGSpace(perturbed_square_mesh)
    velocity = space.field(exact.u(perturbed_square_mesh.vertices), np.zeros(space.n_enr))
    pressure = project_P0(space, exact.p)
    return exact, space, velocity, pressure


@pytest.mark.parametrize("method", list(Method))
def test_linear_fields_are_reproduced(perturbed_square_mesh, interpolated, method):
    exact, space, velocity, pressure = interpolated
    rho = 5.0 if method is Method.EG else None
    norms = error_norms(perturbed_square_mesh, space, exact, velocity, pressure, method, rho)
    assert norms.err_u_triple == pytest.approx(0.0, abs=1e-11)
    assert norms.err_p_proj == pytest.approx(0.0, abs=1e-11)
    assert norms.err_p_l2 > 0.0
    if method is Method.EG:
        assert norms.err_u_energy == pytest.approx(0.0, abs=1e-11)
    else:
        assert math.isnan(norms.err_u_energy)


def test_jumps_are_penalized(square_mesh):
    exact = linear_solution()
    space = EGSpace(square_mesh)
    velocity = space.field(exact.u(square_mesh.vertices), np.full(space.n_enr, 0.1))
    weak = error_norms(square_mesh, space, exact, velocity, project_P0(space, exact.p), Method.EG, 1.0)
    strong = error_norms(square_mesh, space, exact, velocity, project_P0(space, exact.p), Method.EG, 100.0)
    assert weak.err_u_triple > 0.0
    assert strong.err_u_energy > weak.err_u_energy


def test_pressure_errors_ignore_constant_shifts(interpolated):
    exact, space, _, pressure = interpolated
    shifted = PressureField(space, pressure.values + 42.0)
    assert pressure_errors(space, exact, shifted) == pytest.approx(pressure_errors(space, exact, pressure))


def test_zero_energy_penalty_drops_the_jumps(square_mesh):
    exact = linear_solution()
    space = EGSpace(square_mesh)
    velocity = space.field(exact.u(square_mesh.vertices), np.full(space.n_enr, 0.1))
    pressure = project_P0(space, exact.p)

    def energy(rho):
        return error_norms(square_mesh, space, exact, velocity, pressure, Method.EG, rho).err_u_energy

    # the broken gradient is off by 0.1 I on every cell of the unit square
    assert energy(0.0) == pytest.approx(math.sqrt(0.02), rel=1e-10)
    assert energy(None) == pytest.approx(energy(1.0), rel=1e-14)
    assert energy(None) > energy(0.0)
