"""Manifold interface and manifold-agnostic numerical helpers.

Points and tangent vectors are plain ``numpy`` arrays in the ambient
representation of the manifold; leading axes are batch axes and broadcast
the usual way.  A tangent vector is always interpreted at the base point
passed alongside it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractViolation, ConvergenceError


TANGENT_TOL = 1e-9
UNIT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class BoundaryDirection:
    """A point of the boundary at infinity.

    Stored as the geodesic ray ``t -> exp(anchor, t * unit_dir)``; every
    ray asymptotic to it names the same boundary point.
    """

    anchor: np.ndarray
    unit_dir: np.ndarray

    def antipode(self) -> "BoundaryDirection":
        """Boundary point reached by the opposite ray from the same anchor."""
        return BoundaryDirection(self.anchor, -self.unit_dir)


class Manifold:
    """Capability set shared by the Hadamard manifolds in this package.

    Subclasses supply the closed-form geometry; everything here is generic.
    """

    name = "manifold"
    #: intrinsic dimension
    dim: int
    #: shape of one point in ambient coordinates
    point_shape: tuple

    # -- to be provided by subclasses -------------------------------------
    def inner(self, x, u, v):
        raise NotImplementedError

    def dist(self, x, y):
        raise NotImplementedError

    def exp(self, x, v):
        raise NotImplementedError

    def log(self, x, y):
        raise NotImplementedError

    def transport(self, x, y, v):
        raise NotImplementedError

    def radial(self, xi: BoundaryDirection, x):
        raise NotImplementedError

    def basis(self, x):
        """Orthonormal basis of the tangent space at a single point x.

        Returns an array of shape ``(dim, *point_shape)``.
        """
        raise NotImplementedError

    def curvature_forms(self, p, e1, basis):
        """Entries ``<R(e1, w_k) e1, w_l>`` for a basis ``w`` of T_p.

        ``e1`` may carry batch axes; the result has shape
        ``(*batch, len(basis), len(basis))``.
        """
        raise NotImplementedError

    def check_point(self, x):
        """Return a cleaned copy of ``x`` or raise ContractViolation."""
        raise NotImplementedError

    def check_tangent(self, x, v):
        raise NotImplementedError

    def random_point(self, rng, scale=1.0, size=None):
        raise NotImplementedError

    def random_tangent(self, rng, x, scale=1.0):
        """Tangent vector at each point of ``x`` with Gaussian coordinates."""
        x = np.asarray(x, dtype=float)
        batch = x.shape[: x.ndim - len(self.point_shape)]
        out = np.empty(x.shape)
        for idx in np.ndindex(*batch):
            b = self.basis(x[idx])
            c = rng.standard_normal(self.dim) * scale
            out[idx] = np.tensordot(c, b, axes=1)
        return out

    # -- generic -----------------------------------------------------------
    def norm(self, x, v):
        return np.sqrt(np.maximum(self.inner(x, v, v), 0.0))

    def zero_tangent(self, x):
        return np.zeros(np.shape(x))

    def boundary_direction(self, anchor, vec) -> BoundaryDirection:
        """Build a BoundaryDirection from a non-zero tangent vector."""
        anchor = self.check_point(anchor)
        vec = self.check_tangent(anchor, vec)
        n = float(self.norm(anchor, vec))
        if not n > 0:
            raise ContractViolation("boundary direction needs a non-zero tangent vector")
        return BoundaryDirection(anchor, vec / n)

    def coords(self, x, v, basis=None):
        """Coordinates of tangent vector(s) v at x in an orthonormal basis."""
        if basis is None:
            basis = self.basis(x)
        return np.stack([self.inner(x, v, b) for b in basis], axis=-1)

    def from_coords(self, x, c, basis=None):
        if basis is None:
            basis = self.basis(x)
        return np.tensordot(c, basis, axes=([-1], [0]))

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"


def metric_inner(manifold: Manifold, x, u, v, check=True):
    """Riemannian inner product of two tangent vectors at x."""
    if check:
        x = manifold.check_point(x)
        manifold.check_tangent(x, u)
        manifold.check_tangent(x, v)
    return manifold.inner(x, u, v)


def gram_schmidt(manifold: Manifold, x, vectors, tol=1e-10):
    """Orthonormalise tangent vectors at x, dropping dependent ones."""
    out = []
    for v in vectors:
        w = np.array(v, dtype=float)
        # two passes keep orthogonality at round-off level
        for _ in range(2):
            for b in out:
                w = w - manifold.inner(x, w, b) * b
        n = float(manifold.norm(x, w))
        if n > tol:
            out.append(w / n)
    return out


def adapted_basis(manifold: Manifold, p, e1):
    """Orthonormal basis of T_p whose first element is the unit vector e1."""
    basis = gram_schmidt(manifold, p, [e1, *manifold.basis(p)])
    if len(basis) != manifold.dim:
        raise ContractViolation("could not complete an orthonormal basis")
    return np.stack(basis)


def orthonormal_basis(manifold: Manifold, x):
    """List of ``dim`` orthonormal tangent vectors at x."""
    return list(manifold.basis(manifold.check_point(x)))


def curvature_operator_matrix(manifold: Manifold, p, e1, basis=None):
    """Matrix of ``u -> R(e1, u) e1`` in an orthonormal basis of T_p.

    By default the basis is adapted to e1 (its first element is e1), so
    row and column 0 vanish.
    """
    n = float(manifold.norm(p, e1))
    if abs(n - 1.0) > 1e-8:
        raise ContractViolation(f"e1 must be a unit vector, got norm {n!r}")
    if basis is None:
        basis = adapted_basis(manifold, p, e1)
    return manifold.curvature_forms(p, e1, basis)


def numerical_gradient(manifold: Manifold, f, p, h=1e-4, basis=None):
    r"""Riemannian gradient of a scalar field by central differences.

    .. math::

        \sum_i \frac{f(\exp_p(h b_i)) - f(\exp_p(-h b_i))}{2h}\, b_i

    over an orthonormal basis :math:`b_i` of :math:`T_pM`.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    if basis is None:
        basis = manifold.basis(p)
    grad = np.zeros(np.shape(p))
    for b in basis:
        fp = f(manifold.exp(p, h * b))
        fm = f(manifold.exp(p, -h * b))
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise FloatingPointError("non-finite function value in finite differences")
        grad = grad + (fp - fm) / (2 * h) * b
    return grad


def radial_limit(manifold: Manifold, xi: BoundaryDirection, x, t):
    """``log_x(g(t)) / d(x, g(t))`` for the anchor ray ``g(t) = exp(anchor, t unit_dir)``."""
    y = manifold.exp(xi.anchor, float(t) * xi.unit_dir)
    return manifold.log(x, y) / manifold.dist(x, y)


def radial_field_numeric(manifold: Manifold, xi: BoundaryDirection, x, t=64.0, tol=1e-8):
    """Radial field by evaluating the ray limit at ``t/2`` and ``t``.

    Raises ConvergenceError (carrying the residual) when the two
    evaluations differ by ``tol`` or more in Riemannian norm.
    """
    a = radial_limit(manifold, xi, x, t / 2)
    b = radial_limit(manifold, xi, x, t)
    resid = float(manifold.norm(x, b - a))
    if not resid < tol:
        raise ConvergenceError(f"ray limit has not settled (residual {resid:.3g})", resid)
    return b
