import math

import numpy as np
import pytest
from scipy.sparse import csr_matrix, diags

from stokeseg.assembly.dirichlet import apply_dirichlet
from stokeseg.assembly.meg import assemble_meg
from stokeseg.solver.conditioning import condition_number
from stokeseg.solver.errors import BudgetExceeded
from stokeseg.solver.saddle_solver import build_augmented
from stokeseg.spaces.eg_space import EGSpace


def test_dense_diagonal():
    assert condition_number(diags([1.0, 1e-6]).tocsr()) == pytest.approx(1e6)


def test_singular_dense_matrix_is_infinite():
    assert condition_number(csr_matrix(np.array([[1.0, 0.0], [0.0, 0.0]]))) == math.inf


def test_iterative_estimate_on_a_large_diagonal():
    values = np.linspace(1.0, 40.0, 600)
    assert condition_number(diags(values).tocsr()) == pytest.approx(40.0, rel=0.05)


def test_budget(square_mesh):
    reduced = apply_dirichlet(assemble_meg(square_mesh, EGSpace(square_mesh), 1.0))
    with pytest.raises(BudgetExceeded):
        condition_number(reduced, budget=10)


def test_accepts_reduced_and_augmented_systems(square_mesh):
    reduced = apply_dirichlet(assemble_meg(square_mesh, EGSpace(square_mesh), 1.0))
    from_reduced = condition_number(reduced)
    from_augmented = condition_number(build_augmented(reduced))
    assert from_reduced == from_augmented
    assert 1.0 < from_reduced < math.inf


def test_iterative_and_dense_estimates_agree(mocker, square_mesh):
    reduced = apply_dirichlet(assemble_meg(square_mesh, EGSpace(square_mesh), 1.0))
    dense = condition_number(reduced)
    mocker.patch("stokeseg.solver.conditioning.Constants.CONDITION_NUMBER_DENSE_LIMIT", 0)
    assert condition_number(reduced) == pytest.approx(dense, rel=0.01)
