"""Hyperbolic space of constant curvature kappa < 0, hyperboloid model.

Points live on ``{x in R^{n+1} : <x, x>_L = 1/kappa, x_0 > 0}`` where
``<u, v>_L = -u_0 v_0 + sum_i u_i v_i`` is the Minkowski form.  With
``R = 1/sqrt(-kappa)``, every formula below is the unit-hyperboloid one
rescaled by R.
"""

import numpy as np

from ..errors import ContractViolation
from .base import BoundaryDirection, Manifold, gram_schmidt


def minkowski(u, v):
    """Minkowski form over the last axis."""
    u = np.asarray(u)
    v = np.asarray(v)
    return np.sum(u[..., 1:] * v[..., 1:], axis=-1) - u[..., 0] * v[..., 0]


def _sinhc(z):
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-6
    zs = np.where(small, 1.0, z)
    return np.where(small, 1.0 + z * z / 6.0, np.sinh(zs) / zs)


class Hyperboloid(Manifold):
    """n-dimensional hyperbolic space embedded in Minkowski (n+1)-space."""

    name = "hyperboloid"

    def __init__(self, n, kappa=-1.0):
        if int(n) < 1:
            raise ValueError("dimension must be positive")
        if not kappa < 0:
            raise ValueError("curvature must be negative")
        self.dim = int(n)
        self.kappa = float(kappa)
        self.radius = 1.0 / np.sqrt(-self.kappa)
        self.point_shape = (self.dim + 1,)

    def __repr__(self):
        return f"Hyperboloid(n={self.dim}, kappa={self.kappa})"

    @property
    def origin(self):
        o = np.zeros(self.point_shape)
        o[0] = self.radius
        return o

    # -- charts ------------------------------------------------------------
    def renormalize(self, x):
        """Recompute the time coordinate so that x lies on the sheet exactly."""
        x = np.array(x, dtype=float)
        x[..., 0] = np.sqrt(self.radius**2 + np.sum(x[..., 1:] ** 2, axis=-1))
        return x

    def from_poincare(self, u):
        """Lift points of the open unit ball to the hyperboloid."""
        u = np.asarray(u, dtype=float)
        r2 = np.sum(u * u, axis=-1, keepdims=True)
        if np.any(r2 >= 1.0):
            raise ContractViolation("Poincare-ball points must have norm < 1")
        x = np.concatenate([1.0 + r2, 2.0 * u], axis=-1) / (1.0 - r2)
        return self.renormalize(self.radius * x)

    def to_poincare(self, x):
        x = np.asarray(x, dtype=float)
        return x[..., 1:] / (self.radius + x[..., :1])

    # -- geometry ----------------------------------------------------------
    def inner(self, x, u, v):
        return minkowski(u, v)

    def dist(self, x, y):
        # chord form for nearby points, arccosh once <x, x - y> would cancel
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        R = self.radius
        c = x - y
        c2 = np.maximum(minkowski(c, c), 0.0)
        near = 2.0 * R * np.arcsinh(np.sqrt(c2) / (2.0 * R))
        z = np.maximum(-minkowski(x, y) / R**2, 1.0)
        return np.where(z > 2.0, R * np.arccosh(z), near)

    def exp(self, x, v):
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        nv = np.sqrt(np.maximum(minkowski(v, v), 0.0))
        z = (nv / self.radius)[..., None]
        y = np.cosh(z) * x + _sinhc(z) * v
        return self.renormalize(y)

    def log(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        R2 = self.radius**2
        u = y + (minkowski(x, y) / R2)[..., None] * x
        z = self.dist(x, y) / self.radius
        return u / _sinhc(z)[..., None]

    def transport(self, x, y, v):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        v = np.asarray(v, dtype=float)
        coef = minkowski(y, v) / (self.radius**2 - minkowski(x, y))
        return v + coef[..., None] * (x + y)

    def radial(self, xi: BoundaryDirection, x):
        # the boundary point is the null ray through anchor/R + unit_dir
        x = np.asarray(x, dtype=float)
        b = np.asarray(xi.anchor) / self.radius + xi.unit_dir
        y = x / self.radius
        return -b / minkowski(y, b)[..., None] - y

    def basis(self, x):
        x = np.asarray(x, dtype=float)
        eye = np.eye(self.dim + 1)[1:]
        proj = eye + (minkowski(x, eye) / self.radius**2)[:, None] * x
        return np.stack(gram_schmidt(self, x, proj))

    def curvature_forms(self, p, e1, basis):
        basis = np.asarray(basis)
        gram = minkowski(basis[:, None, :], basis[None, :, :])
        c = minkowski(np.asarray(e1)[..., None, :], basis)
        return self.kappa * (gram - c[..., :, None] * c[..., None, :])

    # -- validation --------------------------------------------------------
    def check_point(self, x, tol=1e-6):
        x = np.array(x, dtype=float)
        if x.shape[-1:] != self.point_shape or not np.all(np.isfinite(x)):
            raise ContractViolation(f"expected finite points of shape {self.point_shape}")
        if np.any(x[..., 0] <= 0):
            raise ContractViolation("hyperboloid points need a positive first coordinate")
        resid = np.abs(minkowski(x, x) + self.radius**2)
        scale = np.maximum(1.0, x[..., 0] ** 2)
        if np.any(resid > tol * scale):
            raise ContractViolation(
                f"point is off the hyperboloid <x,x>_L = {1 / self.kappa} "
                f"(residual {float(np.max(resid)):.3g})"
            )
        return self.renormalize(x)

    def check_tangent(self, x, v, tol=1e-9):
        v = np.array(v, dtype=float)
        if v.shape[-1:] != self.point_shape or not np.all(np.isfinite(v)):
            raise ContractViolation("tangent vector has the wrong shape or is not finite")
        x = np.asarray(x, dtype=float)
        ip = minkowski(x, v)
        scale = np.maximum(1.0, np.linalg.norm(x, axis=-1) * np.linalg.norm(v, axis=-1))
        if np.any(np.abs(ip) > tol * scale):
            raise ContractViolation("vector is not tangent at the base point")
        return v + (ip / self.radius**2)[..., None] * x

    def random_point(self, rng, scale=1.0, size=None):
        shape = () if size is None else tuple(np.atleast_1d(size))
        v = np.zeros(shape + self.point_shape)
        v[..., 1:] = rng.standard_normal(shape + (self.dim,)) * scale
        return self.exp(self.origin, v)

    def random_tangent(self, rng, x, scale=1.0):
        x = np.asarray(x, dtype=float)
        v = rng.standard_normal(x.shape) * scale
        return v + (minkowski(x, v) / self.radius**2)[..., None] * x


def lorentz_boost(n, rapidity, axis=1):
    """Boost of Minkowski (n+1)-space mixing the time axis with ``axis``."""
    L = np.eye(n + 1)
    c, s = np.cosh(rapidity), np.sinh(rapidity)
    L[0, 0] = L[axis, axis] = c
    L[0, axis] = L[axis, 0] = s
    return L


def spatial_rotation(n, angle, i=1, j=2):
    L = np.eye(n + 1)
    c, s = np.cos(angle), np.sin(angle)
    L[i, i] = L[j, j] = c
    L[i, j] = -s
    L[j, i] = s
    return L
