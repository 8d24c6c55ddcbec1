"""Symmetric positive-definite matrices with the affine-invariant metric.

The metric at ``x`` is ``<u, v>_x = tr(x^{-1} u x^{-1} v)``.  Matrix
functions go through the symmetric eigendecomposition.
"""

import numpy as np

from ..errors import ContractViolation
from .base import BoundaryDirection, Manifold

EIG_FLOOR = 1e-12
EIG_CLAMP_RTOL = 1e-8


def sym(a):
    return 0.5 * (a + np.swapaxes(a, -1, -2))


def _apply(w, U, fw):
    return (U * fw[..., None, :]) @ np.swapaxes(U, -1, -2)


def _clamped_eigh(a):
    w, U = np.linalg.eigh(a)
    wmax = np.max(np.abs(w), axis=-1, keepdims=True)
    if np.any(EIG_FLOOR - w > EIG_CLAMP_RTOL * np.maximum(wmax, 1.0)):
        raise ContractViolation("matrix is not positive definite")
    return np.maximum(w, EIG_FLOOR), U


def sqrtm(a):
    w, U = _clamped_eigh(a)
    return _apply(w, U, np.sqrt(w))


def invsqrtm(a):
    w, U = _clamped_eigh(a)
    return _apply(w, U, 1.0 / np.sqrt(w))


def sqrt_and_invsqrt(a):
    w, U = _clamped_eigh(a)
    r = np.sqrt(w)
    return _apply(w, U, r), _apply(w, U, 1.0 / r)


def logm(a):
    w, U = _clamped_eigh(a)
    return _apply(w, U, np.log(w))


def expm(a):
    w, U = np.linalg.eigh(sym(a))
    return _apply(w, U, np.exp(w))


def _upper_cholesky(a):
    """Upper-triangular b with a = b b^T (flipped lower Cholesky)."""
    flip = a[..., ::-1, ::-1]
    L = np.linalg.cholesky(flip)
    return L[..., ::-1, ::-1]


class SPD(Manifold):
    """Manifold of m x m SPD matrices, dimension m(m+1)/2."""

    name = "spd"

    def __init__(self, m):
        if int(m) < 1:
            raise ValueError("matrix size must be positive")
        self.m = int(m)
        self.dim = self.m * (self.m + 1) // 2
        self.point_shape = (self.m, self.m)
        self._sym_basis = self._frobenius_basis()

    def __repr__(self):
        return f"SPD(m={self.m})"

    @property
    def origin(self):
        return np.eye(self.m)

    def _frobenius_basis(self):
        out = []
        for i in range(self.m):
            for j in range(i, self.m):
                e = np.zeros((self.m, self.m))
                if i == j:
                    e[i, i] = 1.0
                else:
                    e[i, j] = e[j, i] = 1.0 / np.sqrt(2.0)
                out.append(e)
        return np.stack(out)

    # -- geometry ----------------------------------------------------------
    def inner(self, x, u, v):
        x, u, v = np.broadcast_arrays(np.asarray(x, float), np.asarray(u, float), np.asarray(v, float))
        a = np.linalg.solve(x, u)
        b = np.linalg.solve(x, v)
        return np.einsum("...ij,...ji->...", a, b)

    def dist(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        Li = np.linalg.inv(np.linalg.cholesky(x))
        z = Li @ y @ np.swapaxes(Li, -1, -2)
        w = np.linalg.eigvalsh(sym(z))
        wmax = np.max(np.abs(w), axis=-1, keepdims=True)
        if np.any(EIG_FLOOR - w > EIG_CLAMP_RTOL * np.maximum(wmax, 1.0)):
            raise ContractViolation("matrix is not positive definite")
        lw = np.log(np.maximum(w, EIG_FLOOR))
        return np.sqrt(np.sum(lw * lw, axis=-1))

    def exp(self, x, v):
        s, si = sqrt_and_invsqrt(np.asarray(x, dtype=float))
        return sym(s @ expm(si @ v @ si) @ s)

    def log(self, x, y):
        s, si = sqrt_and_invsqrt(np.asarray(x, dtype=float))
        return sym(s @ logm(sym(si @ y @ si)) @ s)

    def transport(self, x, y, v):
        # Gamma(v) = E v E^T with E = (y x^{-1})^{1/2}
        s, si = sqrt_and_invsqrt(np.asarray(x, dtype=float))
        E = s @ sqrtm(sym(si @ y @ si)) @ si
        return sym(E @ v @ np.swapaxes(E, -1, -2))

    def radial(self, xi: BoundaryDirection, x):
        # Work in the frame g = a^{1/2} U where the anchor ray is
        # diag(exp(t*lam)) with lam sorted descending.  Upper-triangular
        # congruences fix that boundary point, so writing x' = b b^T with b
        # upper triangular, the ray from x is b diag(exp(t*lam)) b^T.
        a = np.asarray(xi.anchor, dtype=float)
        s, si = sqrt_and_invsqrt(a)
        lam, U = np.linalg.eigh(sym(si @ xi.unit_dir @ si))
        lam, U = lam[::-1], U[:, ::-1]
        g = s @ U
        gi = U.T @ si
        xp = sym(gi @ np.asarray(x, dtype=float) @ gi.T)
        b = _upper_cholesky(xp)
        gb = g @ b
        return sym((gb * lam) @ np.swapaxes(gb, -1, -2))

    def basis(self, x):
        s = sqrtm(np.asarray(x, dtype=float))
        return sym(s @ self._sym_basis @ s)

    def curvature_forms(self, p, e1, basis):
        pinv = np.linalg.inv(np.asarray(p, dtype=float))
        a = (pinv @ np.asarray(e1))[..., None, :, :]
        b = pinv @ np.asarray(basis)
        c = a @ b - b @ a
        return 0.25 * np.einsum("...kij,...lji->...kl", c, c)

    # -- validation --------------------------------------------------------
    def check_point(self, x):
        x = np.array(x, dtype=float)
        if x.shape[-2:] != self.point_shape or not np.all(np.isfinite(x)):
            raise ContractViolation(f"expected finite {self.m}x{self.m} matrices")
        asym = np.max(np.abs(x - np.swapaxes(x, -1, -2)), initial=0.0)
        if asym > 1e-8 * max(1.0, float(np.max(np.abs(x)))):
            raise ContractViolation("matrix is not symmetric")
        x = sym(x)
        if np.any(np.linalg.eigvalsh(x)[..., 0] <= 0):
            raise ContractViolation("matrix is not positive definite")
        return x

    def check_tangent(self, x, v):
        v = np.array(v, dtype=float)
        if v.shape[-2:] != self.point_shape or not np.all(np.isfinite(v)):
            raise ContractViolation(f"expected finite {self.m}x{self.m} matrices")
        asym = np.max(np.abs(v - np.swapaxes(v, -1, -2)), initial=0.0)
        if asym > 1e-8 * max(1.0, float(np.max(np.abs(v)))):
            raise ContractViolation("tangent vector is not symmetric")
        return sym(v)

    def random_point(self, rng, scale=1.0, size=None):
        shape = () if size is None else tuple(np.atleast_1d(size))
        c = rng.standard_normal(shape + (self.dim,)) * scale
        return expm(np.tensordot(c, self._sym_basis, axes=1))

    def random_tangent(self, rng, x, scale=1.0):
        x = np.asarray(x, dtype=float)
        shape = x.shape[:-2]
        c = rng.standard_normal(shape + (self.dim,)) * scale
        s = sqrtm(x)
        return sym(s @ np.tensordot(c, self._sym_basis, axes=1) @ s)


def congruence(A, x):
    """The isometry x -> A x A^T for invertible A."""
    return sym(A @ x @ np.swapaxes(A, -1, -2))
