import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from stokeseg.quadrature.errors import UnsupportedDegree

MAX_DEGREE = 6


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """
    Rule on the reference simplex of dimension ``dim`` (interval, triangle or tetrahedron).
    ``points`` are barycentric coordinates of shape (q, dim + 1); weights sum to the
    reference measure 1/dim!.
    """
    dim: int
    degree: int
    points: np.ndarray
    weights: np.ndarray

    @property
    def reference_measure(self) -> float:
        return 1.0 / math.factorial(self.dim)

    @property
    def normalized_weights(self) -> np.ndarray:
        """Weights scaled to sum to one: the integral over a simplex is measure * sum(w * f)."""
        return self.weights / self.reference_measure

    def __len__(self):
        return len(self.weights)


def _frozen(dim: int, degree: int, cartesian: np.ndarray, weights: np.ndarray) -> QuadratureRule:
    cartesian = np.atleast_2d(np.asarray(cartesian, dtype=float))
    points = np.concatenate([1.0 - cartesian.sum(axis=1, keepdims=True), cartesian], axis=1)
    weights = np.asarray(weights, dtype=float).reshape(-1)
    points.flags.writeable = False
    weights.flags.writeable = False
    return QuadratureRule(dim=dim, degree=degree, points=points, weights=weights)


def _gauss_points(degree: int) -> int:
    return max(1, math.ceil((degree + 1) / 2))


def _interval(degree: int) -> QuadratureRule:
    if degree <= 1:
        return _frozen(1, degree, [[0.5]], [1.0])
    x, w = roots_legendre(_gauss_points(degree))
    return _frozen(1, degree, ((x + 1) / 2).reshape(-1, 1), w / 2)


def _collapsed_triangle(n: int) -> tuple[np.ndarray, np.ndarray]:
    x00, w00 = roots_legendre(n)
    x01, w01 = roots_jacobi(n, 1, 0)
    x00s = (x00 + 1) / 2
    x01s = (x01 + 1) / 2
    # 2 from the Legendre map, 4 from the Jacobi(1,0) map
    weights = np.outer(w01, w00).reshape(-1) / 8
    x = np.outer(x01s, np.ones_like(x00s)).reshape(-1)
    y = np.outer(1 - x01s, x00s).reshape(-1)
    return np.stack([x, y], axis=1), weights


def _collapsed_tetrahedron(n: int) -> tuple[np.ndarray, np.ndarray]:
    txy, tw = _collapsed_triangle(n)
    x02, w02 = roots_jacobi(n, 2, 0)
    x02s = (x02 + 1) / 2
    xy = ((1 - x02s).reshape(-1, 1, 1) * txy.reshape(1, -1, 2)).reshape(-1, 2)
    z = np.repeat(x02s, len(txy)).reshape(-1, 1)
    weights = (tw.reshape(1, -1) * w02.reshape(-1, 1)).reshape(-1) / 8
    return np.hstack([xy, z]), weights


def _triangle(degree: int) -> QuadratureRule:
    if degree <= 1:
        return _frozen(2, degree, [[1 / 3, 1 / 3]], [0.5])
    if degree == 2:
        return _frozen(2, degree, [[1 / 6, 1 / 6], [2 / 3, 1 / 6], [1 / 6, 2 / 3]], [1 / 6] * 3)
    return _frozen(2, degree, *_collapsed_triangle(_gauss_points(degree)))


def _tetrahedron(degree: int) -> QuadratureRule:
    if degree <= 1:
        return _frozen(3, degree, [[0.25, 0.25, 0.25]], [1 / 6])
    if degree == 2:
        a, b = 0.5854101966249685, 0.1381966011250105
        points = [[b, b, b], [a, b, b], [b, a, b], [b, b, a]]
        return _frozen(3, degree, points, [1 / 24] * 4)
    return _frozen(3, degree, *_collapsed_tetrahedron(_gauss_points(degree)))


_BUILDERS = {1: _interval, 2: _triangle, 3: _tetrahedron}


@lru_cache(maxsize=None)
def _rule(simplex_dim: int, degree: int) -> QuadratureRule:
    return _BUILDERS[simplex_dim](degree)


def simplex_rule(dim: int, degree: int) -> QuadratureRule:
    if dim not in (2, 3):
        raise UnsupportedDegree(f"cell rules exist for triangles and tetrahedra only, got dim={dim}")
    if not 1 <= degree <= MAX_DEGREE:
        raise UnsupportedDegree(f"no rule of degree {degree}; supported degrees are 1..{MAX_DEGREE}")
    return _rule(dim, degree)


def facet_rule(dim: int, degree: int) -> QuadratureRule:
    """Rule on the facet of a ``dim``-simplex: an interval for triangles, a triangle for tetrahedra."""
    if dim not in (2, 3):
        raise UnsupportedDegree(f"facet rules exist for dim 2 and 3 only, got dim={dim}")
    if not 1 <= degree <= MAX_DEGREE:
        raise UnsupportedDegree(f"no rule of degree {degree}; supported degrees are 1..{MAX_DEGREE}")
    return _rule(dim - 1, degree)
