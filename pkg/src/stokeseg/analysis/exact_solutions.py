from dataclasses import dataclass, replace
from typing import Callable

import numpy as np


Field = Callable[[np.ndarray], np.ndarray]

PI = np.pi


@dataclass(frozen=True)
class ExactSolution:
    """
    Manufactured Stokes solution. Every callback takes points of shape (..., d) and
    returns (..., d) for u and f, (..., d, d) for grad_u ([i, j] = d u_i / d x_j)
    and (...) for p. Boundary data is g = u on the boundary.
    """
    name: str
    dim: int
    nu: float
    u: Field
    grad_u: Field
    p: Field
    grad_p: Field
    laplacian_u: Field

    def f(self, x: np.ndarray) -> np.ndarray:
        return -self.nu * self.laplacian_u(x) + self.grad_p(x)

    def g(self, x: np.ndarray) -> np.ndarray:
        return self.u(x)

    def divergence(self, x: np.ndarray) -> np.ndarray:
        return np.trace(self.grad_u(x), axis1=-2, axis2=-1)


def _check_viscosity(nu: float):
    if not nu > 0:
        raise ValueError(f"viscosity must be positive, got {nu}")


def _quartic(t):
    """a(t) = t^2 (t - 1)^2 and its first three derivatives."""
    return (t ** 2 * (t - 1) ** 2,
            2 * t * (t - 1) * (2 * t - 1),
            12 * t ** 2 - 12 * t + 2,
            24 * t - 12)


def solution_vortex2d(nu: float) -> ExactSolution:
    """u = curl of 5 x^2 (x-1)^2 y^2 (y-1)^2, p = 10 (2x - 1)(2y - 1) on the unit square."""
    _check_viscosity(nu)

    def u(x):
        a, da, _, _ = _quartic(x[..., 0])
        b, db, _, _ = _quartic(x[..., 1])
        return np.stack([5 * a * db, -5 * da * b], axis=-1)

    def grad_u(x):
        a, da, dda, _ = _quartic(x[..., 0])
        b, db, ddb, _ = _quartic(x[..., 1])
        row_x = np.stack([5 * da * db, 5 * a * ddb], axis=-1)
        row_y = np.stack([-5 * dda * b, -5 * da * db], axis=-1)
        return np.stack([row_x, row_y], axis=-2)

    def laplacian_u(x):
        a, da, dda, ddda = _quartic(x[..., 0])
        b, db, ddb, dddb = _quartic(x[..., 1])
        return np.stack([5 * (dda * db + a * dddb), -5 * (ddda * b + da * ddb)], axis=-1)

    def p(x):
        return 10 * (2 * x[..., 0] - 1) * (2 * x[..., 1] - 1)

    def grad_p(x):
        return np.stack([20 * (2 * x[..., 1] - 1), 20 * (2 * x[..., 0] - 1)], axis=-1)

    return ExactSolution("vortex2d", 2, nu, u, grad_u, p, grad_p, laplacian_u)


def solution_cube3d(nu: float) -> ExactSolution:
    """Cyclic sin/cos field on the unit cube with p = sin(pi x) sin(pi y) sin(pi z); Laplacian of u is -2 pi^2 u."""
    _check_viscosity(nu)

    def trig(x):
        return np.sin(PI * x), np.cos(PI * x)

    def u(x):
        s, c = trig(x)
        return np.stack([
            s[..., 0] * (c[..., 1] - c[..., 2]),
            s[..., 1] * (c[..., 2] - c[..., 0]),
            s[..., 2] * (c[..., 0] - c[..., 1]),
        ], axis=-1)

    def grad_u(x):
        s, c = trig(x)
        sx, sy, sz = s[..., 0], s[..., 1], s[..., 2]
        cx, cy, cz = c[..., 0], c[..., 1], c[..., 2]
        rows = [
            np.stack([cx * (cy - cz), -sx * sy, sx * sz], axis=-1),
            np.stack([sy * sx, cy * (cz - cx), -sy * sz], axis=-1),
            np.stack([-sz * sx, sz * sy, cz * (cx - cy)], axis=-1),
        ]
        return PI * np.stack(rows, axis=-2)

    def laplacian_u(x):
        return -2 * PI ** 2 * u(x)

    def p(x):
        s, _ = trig(x)
        return s[..., 0] * s[..., 1] * s[..., 2]

    def grad_p(x):
        s, c = trig(x)
        return PI * np.stack([
            c[..., 0] * s[..., 1] * s[..., 2],
            s[..., 0] * c[..., 1] * s[..., 2],
            s[..., 0] * s[..., 1] * c[..., 2],
        ], axis=-1)

    return ExactSolution("cube3d", 3, nu, u, grad_u, p, grad_p, laplacian_u)


def solution_lshape(nu: float) -> ExactSolution:
    """u = (sin(pi x) sin(pi y), cos(pi x) cos(pi y)), p = |y|, which has a kink along y = 0."""
    _check_viscosity(nu)

    def u(x):
        s, c = np.sin(PI * x), np.cos(PI * x)
        return np.stack([s[..., 0] * s[..., 1], c[..., 0] * c[..., 1]], axis=-1)

    def grad_u(x):
        s, c = np.sin(PI * x), np.cos(PI * x)
        row_x = np.stack([c[..., 0] * s[..., 1], s[..., 0] * c[..., 1]], axis=-1)
        row_y = np.stack([-s[..., 0] * c[..., 1], -c[..., 0] * s[..., 1]], axis=-1)
        return PI * np.stack([row_x, row_y], axis=-2)

    def laplacian_u(x):
        return -2 * PI ** 2 * u(x)

    def p(x):
        return np.abs(x[..., 1])

    def grad_p(x):
        return np.stack([np.zeros_like(x[..., 1]), np.sign(x[..., 1])], axis=-1)

    return ExactSolution("lshape", 2, nu, u, grad_u, p, grad_p, laplacian_u)


def with_gradient_forcing(exact: ExactSolution, phi: Field, grad_phi: Field) -> ExactSolution:
    """Same velocity, pressure p + phi: the forcing gains grad(phi)."""
    return replace(
        exact,
        name=f"{exact.name}+grad",
        p=lambda x: exact.p(x) + phi(x),
        grad_p=lambda x: exact.grad_p(x) + grad_phi(x),
    )


def with_viscosity(exact: ExactSolution, nu: float) -> ExactSolution:
    _check_viscosity(nu)
    return replace(exact, nu=nu)
