import logging
import math

import numpy as np
from scipy.sparse import issparse
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from stokeseg import config
from stokeseg.assembly.dirichlet import ReducedSystem
from stokeseg.constants import Constants
from stokeseg.solver.errors import BudgetExceeded, NonConvergence, SingularSystem
from stokeseg.solver.saddle_solver import AugmentedSystem, build_augmented, factorize

logger = logging.getLogger(__name__)


def _as_matrix(system):
    if isinstance(system, ReducedSystem):
        return build_augmented(system).matrix
    if isinstance(system, AugmentedSystem):
        return system.matrix
    return system


def _largest_eigenvalue(operator: LinearOperator) -> float:
    try:
        values = eigsh(operator, k=1, which="LM", tol=Constants.CONDITION_NUMBER_TOLERANCE,
                       return_eigenvectors=False)
    except ArpackNoConvergence as ex:
        raise NonConvergence(f"eigenvalue iteration did not converge: {ex}")
    return float(np.max(np.abs(values)))


def condition_number(system, budget: int = config.CONDITION_NUMBER_BUDGET) -> float:
    """
    2-norm condition number sigma_max / sigma_min.

    Small systems use a dense SVD. Larger ones run Lanczos on K^T K for sigma_max
    and on (K^T K)^{-1}, applied through one sparse LU of K, for sigma_min.
    """
    matrix = _as_matrix(system)
    n = matrix.shape[0]
    if n > budget:
        raise BudgetExceeded(f"condition number of a {n}-unknown system exceeds the budget of {budget}")

    if n <= Constants.CONDITION_NUMBER_DENSE_LIMIT:
        dense = matrix.toarray() if issparse(matrix) else np.asarray(matrix, dtype=float)
        singular_values = np.linalg.svd(dense, compute_uv=False)
        if singular_values[-1] == 0.0:
            return math.inf
        return float(singular_values[0] / singular_values[-1])

    matrix = matrix.tocsc()
    transposed = matrix.T.tocsc()
    try:
        lu = factorize(matrix)
    except SingularSystem:
        logger.warning("Singular matrix in condition number estimate", extra={"unknowns": n})
        return math.inf

    normal = LinearOperator((n, n), matvec=lambda x: transposed @ (matrix @ x), dtype=float)
    inverse_normal = LinearOperator((n, n), matvec=lambda x: lu.solve(lu.solve(x, trans="T")), dtype=float)

    sigma_max = math.sqrt(_largest_eigenvalue(normal))
    sigma_min = 1.0 / math.sqrt(_largest_eigenvalue(inverse_normal))
    logger.debug("Condition number estimate", extra={"unknowns": n, "sigma_max": sigma_max, "sigma_min": sigma_min})
    return sigma_max / sigma_min
