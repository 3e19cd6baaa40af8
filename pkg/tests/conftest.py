import numpy as np
import pytest

from stokeseg.mesh.generators import generate_unit_cube, generate_unit_square, perturb
from stokeseg.mesh.simplicial_mesh import SimplicialMesh
from stokeseg.spaces.eg_space import EGSpace


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def single_triangle():
    return SimplicialMesh([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], [[0, 1, 2]])


@pytest.fixture
def two_triangles():
    return SimplicialMesh([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], [[0, 1, 2], [0, 2, 3]])


@pytest.fixture
def four_triangles():
    """Unit square split through an off-center interior vertex into four triangles."""
    vertices = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.4, 0.55]]
    return SimplicialMesh(vertices, [[0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]])


@pytest.fixture
def square_mesh():
    return generate_unit_square(4)


@pytest.fixture
def perturbed_square_mesh():
    return perturb(generate_unit_square(4), 0.3, seed=7)


@pytest.fixture
def cube_mesh():
    return generate_unit_cube(2)


@pytest.fixture
def square_space(square_mesh):
    return EGSpace(square_mesh)
