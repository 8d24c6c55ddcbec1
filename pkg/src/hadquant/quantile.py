"""Quantile loss functions and their Riemannian gradients.

Data-based loss, with the angle measured at the data point x::

    rho(x, p) = d(p, x) - beta <xi_x, log_x(p)>

Parameter-based loss, with the angle measured at the candidate p::

    rho(x, p) = d(p, x) + beta <xi_p, log_p(x)>

All kernels accept a batch of data points ``x`` against a single ``p``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ContractViolation, DegeneratePairError
from .geometry import BoundaryDirection, Hyperboloid, Manifold, numerical_gradient

#: pairs closer than this are treated as coincident
COINCIDENT_TOL = 1e-10


class LossKind(enum.Enum):
    DATA = "data"
    PARAM = "param"


class GradientMode(enum.Enum):
    EXACT = "exact"
    TRANSPORT = "transport"
    RADIAL = "radial"
    FD = "fd"


@dataclass(frozen=True, eq=False)
class QuantileIndex:
    """Quantile level ``beta`` in [0, 1) and boundary direction ``xi``."""

    beta: float
    xi: BoundaryDirection

    def __post_init__(self):
        if not 0.0 <= self.beta < 1.0:
            raise ContractViolation(f"beta must lie in [0, 1), got {self.beta!r}")


def _t_over_sinh(t):
    t = np.asarray(t, dtype=float)
    small = t < 1e-6
    ts = np.where(small, 1.0, t)
    return np.where(small, 1.0 - t * t / 6.0, ts / np.sinh(ts))


def _cosine(manifold, base, u, w, d):
    """<u, w>/d clipped to [-1, 1], zero where d vanishes."""
    ip = manifold.inner(base, u, w)
    safe = np.where(d > 0, d, 1.0)
    return np.where(d > 0, np.clip(ip / safe, -1.0, 1.0), 0.0)


# -- losses -----------------------------------------------------------------
def data_loss(manifold: Manifold, x, p, beta, xi_x):
    """Data-based loss for data ``x`` with precomputed radial field ``xi_x``."""
    d = manifold.dist(x, p)
    c = _cosine(manifold, x, xi_x, manifold.log(x, p), d)
    # written as d*(1 - beta*c) so that (1-beta)d <= loss <= (1+beta)d in floats
    return d * (1.0 - beta * c)


def param_loss(manifold: Manifold, x, p, beta, xi_p):
    d = manifold.dist(p, x)
    c = _cosine(manifold, p, xi_p, manifold.log(p, x), d)
    return d * (1.0 + beta * c)


def loss(manifold: Manifold, x, p, q: QuantileIndex, kind=LossKind.DATA):
    """Quantile loss of data point(s) ``x`` at candidate ``p``."""
    if kind is LossKind.DATA:
        return data_loss(manifold, x, p, q.beta, manifold.radial(q.xi, x))
    return param_loss(manifold, x, p, q.beta, manifold.radial(q.xi, p))


def _mean(values):
    # fsum makes the mean independent of data order
    values = np.ravel(values)
    return math.fsum(values.tolist()) / values.size


def sample_objective(manifold: Manifold, data, p, q: QuantileIndex, kind=LossKind.DATA):
    """Mean loss over a sample."""
    data = np.asarray(data, dtype=float)
    if data.ndim == len(manifold.point_shape) or data.shape[0] == 0:
        raise ValueError("sample_objective needs a non-empty batch of data points")
    return _mean(loss(manifold, data, p, q, kind))


# -- gradients --------------------------------------------------------------
def _unit_log(manifold, x, p):
    lp = manifold.log(p, x)
    d = manifold.dist(p, x)
    safe = np.where(d > 0, d, 1.0)[(...,) + (None,) * len(manifold.point_shape)]
    return lp / safe, d


def _expand(manifold, a):
    return np.asarray(a)[(...,) + (None,) * len(manifold.point_shape)]


def _curvature_scaled(manifold, p, e1, d, v):
    """Apply sum_i f(kappa_i) <v, e_i> e_i with f = t/sinh(t), t = d sqrt(-kappa_i)."""
    B = manifold.basis(p)
    A = manifold.curvature_forms(p, e1, B)
    A = 0.5 * (A + np.swapaxes(A, -1, -2))
    kappa, Q = np.linalg.eigh(A)
    kappa = np.minimum(kappa, 0.0)
    f = _t_over_sinh(np.asarray(d)[..., None] * np.sqrt(-kappa))
    c = manifold.coords(p, v, B)
    c = np.einsum("...ij,...j->...i", Q, f * np.einsum("...ji,...j->...i", Q, c))
    return manifold.from_coords(p, c, B)


def _exact(manifold, x, p, beta, xi_x, e1, d, method="auto"):
    gx = manifold.transport(x, p, xi_x)
    if method == "auto":
        method = "closed" if isinstance(manifold, Hyperboloid) else "eigen"
    if method == "closed":
        if not isinstance(manifold, Hyperboloid):
            raise ValueError("closed-form gradient is only available on the hyperboloid")
        s = _t_over_sinh(d * np.sqrt(-manifold.kappa))
        c = _cosine(manifold, x, xi_x, manifold.log(x, p), d)
        return -e1 - beta * (_expand(manifold, s) * gx + _expand(manifold, (s - 1.0) * c) * e1)
    return -e1 - beta * _curvature_scaled(manifold, p, e1, d, gx)


def _check_distinct(d):
    if np.any(d < COINCIDENT_TOL):
        raise DegeneratePairError("gradient is undefined when p coincides with x")


def grad_exact(manifold: Manifold, x, p, q: QuantileIndex, method="auto"):
    """Gradient in p of the data-based loss on a locally symmetric space.

    ``method="eigen"`` eigendecomposes the curvature operator along the
    geodesic from p to x; ``"closed"`` uses the constant-curvature formula
    (hyperboloid only).  ``"auto"`` picks the closed form when available.
    """
    e1, d = _unit_log(manifold, x, p)
    _check_distinct(d)
    return _exact(manifold, x, p, q.beta, manifold.radial(q.xi, x), e1, d, method)


def grad_transport_approx(manifold: Manifold, x, p, q: QuantileIndex):
    """``-log_p(x)/d - beta Gamma_{x->p}(xi_x)``; the log term is dropped at p = x."""
    e1, d = _unit_log(manifold, x, p)
    gx = manifold.transport(x, p, manifold.radial(q.xi, x))
    e1 = np.where(_expand(manifold, d) < COINCIDENT_TOL, 0.0, e1)
    return -e1 - q.beta * gx


def grad_radial_approx(manifold: Manifold, x, p, q: QuantileIndex):
    """``-log_p(x)/d - beta xi_p``; the log term is dropped at p = x."""
    e1, d = _unit_log(manifold, x, p)
    e1 = np.where(_expand(manifold, d) < COINCIDENT_TOL, 0.0, e1)
    return -e1 - q.beta * manifold.radial(q.xi, p)


class QuantileProblem:
    """Sample objective for one quantile index, with cached radial fields.

    This is the object the descent solver iterates on.
    """

    def __init__(self, manifold: Manifold, data, q: QuantileIndex, kind=LossKind.DATA):
        data = np.asarray(data, dtype=float)
        if data.ndim == len(manifold.point_shape) or data.shape[0] == 0:
            raise ValueError("need a non-empty batch of data points")
        self.manifold = manifold
        self.data = data
        self.q = q
        self.kind = LossKind(kind)

    @cached_property
    def xi_data(self):
        return self.manifold.radial(self.q.xi, self.data)

    def losses(self, p):
        M, q = self.manifold, self.q
        if self.kind is LossKind.DATA:
            return data_loss(M, self.data, p, q.beta, self.xi_data)
        return param_loss(M, self.data, p, q.beta, M.radial(q.xi, p))

    def value(self, p):
        return _mean(self.losses(p))

    def steps(self, p, mode):
        """Per-datum steps; coincident points contribute ``-beta * xi_p``."""
        M, beta = self.manifold, self.q.beta
        mode = GradientMode(mode)
        e1, d = _unit_log(M, self.data, p)
        near = _expand(M, d < COINCIDENT_TOL)
        if beta == 0.0:
            return np.where(near, 0.0, -e1)
        if mode is GradientMode.RADIAL:
            xi_p = M.radial(self.q.xi, p)
            return np.where(near, 0.0, -e1) - beta * xi_p
        if mode is GradientMode.TRANSPORT:
            gx = M.transport(self.data, p, self.xi_data)
            return np.where(near, 0.0, -e1) - beta * gx
        if mode is GradientMode.EXACT:
            if self.kind is not LossKind.DATA:
                raise ContractViolation("exact gradients exist only for the data-based loss")
            dd = np.where(d < COINCIDENT_TOL, 1.0, d)
            g = _exact(M, self.data, p, beta, self.xi_data, e1, dd)
            gx = M.transport(self.data, p, self.xi_data)
            return np.where(near, -beta * gx, g)
        raise ValueError("finite-difference mode has no per-datum steps")

    def shift(self, p, mode, h=1e-4):
        """Mean descent step at p (the gradient or its approximation)."""
        mode = GradientMode(mode)
        if mode is GradientMode.FD:
            return numerical_gradient(self.manifold, self.value, p, h)
        return np.mean(self.steps(p, mode), axis=0)
