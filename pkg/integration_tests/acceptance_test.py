"""
Experiment-scale checks on refined meshes. These take minutes; run with
``pytest integration_tests -m slow``.
"""
import numpy as np
import pytest

from stokeseg.analysis.exact_solutions import solution_cube3d, solution_vortex2d, with_gradient_forcing
from stokeseg.analysis.experiment import solve_stokes
from stokeseg.analysis.infsup import infsup_probe
from stokeseg.analysis.studies import RunMatrix, convergence_study, penalty_sweep, robustness_sweep
from stokeseg.constants import Method
from stokeseg.mesh.generators import generate_unit_cube, generate_unit_square, perturb

pytestmark = pytest.mark.slow

LEVELS_2D = [8, 16, 32, 64]

def within_factor(values, targets, factor=2.0):
    ratios = np.asarray(values) / np.asarray(targets)
    return bool(np.all((ratios <= factor) & (ratios >= 1.0 / factor)))

async def test_meg_converges_in_2d():
    records = await convergence_study(Method.MEG, solution_vortex2d(1.0), generate_unit_square, LEVELS_2D)
    assert all(r.rate_u >= 0.9 and r.rate_p >= 0.9 for r in records[1:])
    assert within_factor([r.err_u_triple for r in records], [2.749e-1, 1.024e-1, 3.940e-2, 1.606e-2])
    assert within_factor([r.err_p_l2 for r in records], [5.815e-1, 2.733e-1, 1.322e-1, 6.498e-2])

async def test_eg_pressure_stalls_with_a_small_penalty():
    records = await convergence_study(Method.EG, solution_vortex2d(1.0), generate_unit_square, LEVELS_2D, rho=1.0)
    assert any(r.rate_p < 0.5 for r in records[1:])

async def test_penalty_sweeps():
    mesh_factory = lambda: generate_unit_square(16)  # noqa: E731
    exact = solution_vortex2d(1.0)

    meg = await penalty_sweep([Method.MEG], exact, mesh_factory, [0.1, 0.5, 1.0, 2.0, 5.0], condition=False)
    errors = [r.err_u_triple for r in meg]
    assert max(errors) / min(errors) <= 5.0

    eg = await penalty_sweep([Method.EG], exact, mesh_factory, [0.5, 2.0, 5.0, 10.0])
    by_rho = {r.rho: r for r in eg}
    assert by_rho[0.5].err_u_triple >= 3.0 * by_rho[5.0].err_u_triple
    assert by_rho[2.0].cond2 <= by_rho[5.0].cond2 <= by_rho[10.0].cond2

async def test_pressure_robust_convergence_at_tiny_viscosity():
    records = await convergence_study(Method.PR_MEG, solution_vortex2d(1e-6), generate_unit_square, LEVELS_2D)
    assert all(r.rate_u >= 0.9 for r in records[1:])
    assert within_factor([r.err_u_triple for r in records], [9.727e-2, 4.749e-2, 2.339e-2, 1.159e-2])

async def test_viscosity_robustness():
    mesh_factory = lambda: generate_unit_square(32)  # noqa: E731
    grid = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
    records = await robustness_sweep([Method.MEG, Method.PR_MEG], solution_vortex2d(1.0), mesh_factory, grid,
                                     matrix=RunMatrix(concurrency=2))
    meg = [r for r in records if r.method is Method.MEG]
    pr = [r for r in records if r.method is Method.PR_MEG]

    assert meg[-1].err_u_triple / pr[-1].err_u_triple >= 1e5
    assert 10 ** 3.3 <= meg[-1].err_u_triple / meg[0].err_u_triple <= 10 ** 4.7

    velocity = [r.err_u_triple for r in pr]
    assert max(velocity) / min(velocity) <= 1.1
    scaled = [r.err_p_l2 / r.nu for r in pr]
    assert max(scaled) / min(scaled) <= 3.0

async def test_convergence_in_3d():
    levels = [4, 8, 16]
    exact = solution_cube3d(1.0)
    records = await convergence_study(Method.MEG, exact, generate_unit_cube, levels)
    assert all(r.rate_u >= 0.9 for r in records[1:])
    assert within_factor([r.err_u_triple for r in records], [2.284, 1.121, 5.552e-1])

    weak = await convergence_study(Method.EG, exact, generate_unit_cube, levels, rho=2.0)
    strong = await convergence_study(Method.EG, exact, generate_unit_cube, levels, rho=10.0)
    for low, high in zip(weak, strong):
        assert 5.0 <= high.err_p_l2 / low.err_p_l2 <= 20.0

def test_gradient_forcing_invariance():
    mesh = generate_unit_square(16)
    exact = solution_vortex2d(1e-4)
    forced = with_gradient_forcing(exact, lambda x: 10 * x[..., 0] ** 3 * x[..., 1],
                                   lambda x: np.stack([30 * x[..., 0] ** 2 * x[..., 1], 10 * x[..., 0] ** 3], axis=-1))

    def relative_change(method):
        _, plain = solve_stokes(mesh, exact, method)
        _, shifted = solve_stokes(mesh, forced, method)
        scale = np.linalg.norm(plain.velocity.coefficients)
        return np.linalg.norm(plain.velocity.coefficients - shifted.velocity.coefficients) / scale

    assert relative_change(Method.PR_MEG) <= 1e-8
    assert relative_change(Method.MEG) > 1e-3

@pytest.mark.parametrize("amplitude", [0.0, 0.3])
def test_infsup_estimates_are_stable(amplitude):
    meshes = [perturb(generate_unit_square(n), amplitude, seed=1) for n in (4, 8, 16)]
    betas = [estimate.beta for estimate in infsup_probe(meshes)]
    assert min(betas) > 0
    assert (max(betas) - min(betas)) / max(betas) < 0.2
