import numpy as np

from ..errors import ContractViolation
from .base import BoundaryDirection, Manifold


class Euclidean(Manifold):
    """Flat space R^n with the standard inner product."""

    name = "euclidean"

    def __init__(self, n):
        if int(n) < 1:
            raise ValueError("dimension must be positive")
        self.dim = int(n)
        self.point_shape = (self.dim,)

    @property
    def origin(self):
        return np.zeros(self.dim)

    def inner(self, x, u, v):
        return np.sum(np.asarray(u) * np.asarray(v), axis=-1)

    def dist(self, x, y):
        return np.linalg.norm(np.asarray(y, dtype=float) - x, axis=-1)

    def exp(self, x, v):
        return np.asarray(x, dtype=float) + v

    def log(self, x, y):
        return np.asarray(y, dtype=float) - x

    def transport(self, x, y, v):
        return np.broadcast_to(v, np.broadcast_shapes(np.shape(v), np.shape(y))).copy()

    def radial(self, xi: BoundaryDirection, x):
        # the field is constant on flat space
        return np.broadcast_to(xi.unit_dir, np.shape(x)).copy()

    def basis(self, x):
        return np.eye(self.dim)

    def curvature_forms(self, p, e1, basis):
        batch = np.shape(e1)[:-1]
        k = len(basis)
        return np.zeros(batch + (k, k))

    def check_point(self, x):
        x = np.array(x, dtype=float)
        if x.shape[-1:] != self.point_shape:
            raise ContractViolation(f"expected points of shape {self.point_shape}, got {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ContractViolation("non-finite coordinates")
        return x

    def check_tangent(self, x, v):
        v = np.array(v, dtype=float)
        if v.shape[-1:] != self.point_shape or not np.all(np.isfinite(v)):
            raise ContractViolation("tangent vector has the wrong shape or is not finite")
        return v

    def random_point(self, rng, scale=1.0, size=None):
        shape = (() if size is None else tuple(np.atleast_1d(size))) + self.point_shape
        return rng.standard_normal(shape) * scale

    def random_tangent(self, rng, x, scale=1.0):
        return rng.standard_normal(np.shape(x)) * scale
