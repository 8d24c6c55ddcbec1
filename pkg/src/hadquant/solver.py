"""Adaptive-learning-rate descent for sample quantiles.

Each iteration moves a unit-speed step of length ``lr`` against the mean
step direction; the move is kept when the sample objective does not
increase (``lr *= 1.1``), otherwise ``lr`` is halved and a rejection is
counted.  The run stops once ``lr <= tol`` or ``maxcount`` rejections have
happened.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import ContractViolation
from .geometry import Manifold
from .quantile import (
    COINCIDENT_TOL,
    GradientMode,
    LossKind,
    QuantileIndex,
    QuantileProblem,
)


class Termination(enum.Enum):
    LR_FLOOR = "lr_floor"
    MAX_COUNT = "max_count"
    #: the mean step vanished exactly
    STATIONARY = "stationary"
    #: safety cap on total iterations
    MAX_ITER = "max_iter"


@dataclass(frozen=True)
class DescentConfig:
    """Solver settings.  ``None`` means "derive from the data"."""

    tol: Optional[float] = None
    maxcount: int = 200
    lr0: Optional[float] = None
    init: Optional[np.ndarray] = field(default=None, compare=False)
    seed: int = 0
    max_iter: int = 100_000
    record_trace: bool = False
    #: lr0 = lr0_scale * diameter estimate, tol = tol_scale * lr0
    lr0_scale: float = 0.1
    tol_scale: float = 1e-6

    def __post_init__(self):
        if self.maxcount < 1:
            raise ContractViolation("maxcount must be at least 1")
        if self.tol is not None and not self.tol > 0:
            raise ContractViolation("tol must be positive")
        if self.tol is not None and self.lr0 is not None and not self.lr0 > self.tol:
            raise ContractViolation("lr0 must exceed tol")

    def resolve(self, manifold: Manifold, data) -> "DescentConfig":
        """Fill in lr0 and tol from the spread of the data."""
        lr0 = self.lr0
        if lr0 is None:
            diam = float(np.max(manifold.dist(data[0], data)))
            lr0 = self.lr0_scale * diam if diam > 0 else 1.0
        tol = self.tol if self.tol is not None else self.tol_scale * lr0
        if not lr0 > tol:
            raise ContractViolation("lr0 must exceed tol")
        return replace(self, lr0=lr0, tol=tol)

    def to_dict(self):
        return {
            "tol": self.tol,
            "maxcount": self.maxcount,
            "lr0": self.lr0,
            "seed": self.seed,
            "max_iter": self.max_iter,
            "lr0_scale": self.lr0_scale,
            "tol_scale": self.tol_scale,
        }


@dataclass(frozen=True, eq=False)
class QuantileResult:
    point: np.ndarray
    objective: float
    first_order_residual: float
    iters: int
    termination: Termination
    lr_final: float
    #: a datum lies within 10 * tol of the point; the residual is then only a bound
    at_kink: bool = False
    trace: Optional[tuple] = None

    def to_dict(self):
        out = {
            "point": np.asarray(self.point).tolist(),
            "objective": self.objective,
            "first_order_residual": self.first_order_residual,
            "iters": self.iters,
            "termination": self.termination.value,
            "lr_final": self.lr_final,
            "at_kink": self.at_kink,
        }
        if self.trace is not None:
            out["trace"] = list(self.trace)
        return out


def canonical_order(data):
    """Lexicographic row order, so solves depend only on the multiset."""
    flat = data.reshape(data.shape[0], -1)
    return np.lexsort(flat.T[::-1])


def _check_mode(mode, kind):
    if mode is GradientMode.EXACT and kind is not LossKind.DATA:
        raise ContractViolation("exact gradients require the data-based loss")


def first_order_residual(manifold: Manifold, data, p, q: QuantileIndex):
    """Norm of the mean exact gradient at p.

    A datum coinciding with p contributes ``-beta * xi_p``, so at a kink the
    value is an upper bound on the distance of zero from the subdifferential
    rather than zero.
    """
    prob = QuantileProblem(manifold, data, q, LossKind.DATA)
    g = np.mean(prob.steps(p, GradientMode.EXACT), axis=0)
    return float(manifold.norm(p, g))


def subgradient_gap(manifold: Manifold, data, p, q: QuantileIndex, radius=COINCIDENT_TOL):
    """Distance from zero to the subdifferential of the sample objective at p.

    Data within ``radius`` of p are treated as coinciding with it; each adds
    a ball of radius 1/N around its convention step.  Zero means p is a
    (possibly non-smooth) minimizer, up to that resolution.
    """
    data = np.asarray(data, dtype=float)
    steps = QuantileProblem(manifold, data, q, LossKind.DATA).steps(p, GradientMode.EXACT)
    near = np.asarray(manifold.dist(p, data)) < radius
    if np.any(near):
        steps[near] = -q.beta * manifold.radial(q.xi, p)
    g = np.mean(steps, axis=0)
    return max(0.0, float(manifold.norm(p, g)) - np.count_nonzero(near) / len(data))


def descent(
    manifold: Manifold,
    data,
    q: QuantileIndex,
    cfg: DescentConfig = DescentConfig(),
    mode=GradientMode.EXACT,
    kind=LossKind.DATA,
) -> QuantileResult:
    """Sample (beta, xi)-quantile by adaptive-learning-rate descent."""
    mode, kind = GradientMode(mode), LossKind(kind)
    _check_mode(mode, kind)
    data = np.asarray(data, dtype=float)
    if data.ndim == len(manifold.point_shape) or data.shape[0] == 0:
        raise ValueError("descent needs a non-empty batch of data points")
    data = data[canonical_order(data)]
    cfg = cfg.resolve(manifold, data)
    prob = QuantileProblem(manifold, data, q, kind)

    p = data[0].copy() if cfg.init is None else manifold.check_point(cfg.init)
    lr, tol = cfg.lr0, cfg.tol
    count = 0
    iters = 0
    f = prob.value(p)
    trace = [f] if cfg.record_trace else None
    shift = prob.shift(p, mode)
    termination = None
    while lr > tol and count < cfg.maxcount:
        if iters >= cfg.max_iter:
            termination = Termination.MAX_ITER
            break
        nrm = float(manifold.norm(p, shift))
        if not nrm > 0:
            termination = Termination.STATIONARY
            break
        iters += 1
        p_new = manifold.exp(p, (-lr / nrm) * shift)
        f_new = prob.value(p_new)
        if f_new <= f:
            p, f = p_new, f_new
            lr *= 1.1
            shift = prob.shift(p, mode)
            if trace is not None:
                trace.append(f)
        else:
            lr /= 2.0
            count += 1
    if termination is None:
        termination = Termination.LR_FLOOR if lr <= tol else Termination.MAX_COUNT

    # the last moves are at most tol long, so closer data are not resolved
    at_kink = bool(np.any(manifold.dist(p, data) < max(COINCIDENT_TOL, 10.0 * tol)))
    return QuantileResult(
        point=p,
        objective=f,
        first_order_residual=first_order_residual(manifold, data, p, q),
        iters=iters,
        termination=termination,
        lr_final=lr,
        at_kink=at_kink,
        trace=None if trace is None else tuple(trace),
    )


def sample_median(manifold: Manifold, data, cfg=DescentConfig(), mode=GradientMode.EXACT):
    """Geometric median: the beta = 0 quantile (xi is irrelevant)."""
    data = np.asarray(data, dtype=float)
    anchor = data[0]
    xi = manifold.boundary_direction(anchor, manifold.basis(anchor)[0])
    return descent(manifold, data, QuantileIndex(0.0, xi), cfg, mode, LossKind.DATA)


def quantile_field(
    manifold: Manifold,
    data,
    betas,
    xis,
    cfg: DescentConfig = DescentConfig(),
    mode=GradientMode.EXACT,
    kind=LossKind.DATA,
    median: Optional[QuantileResult] = None,
):
    """Quantiles over a grid of levels and directions.

    Returns a nested list ``out[i][j]`` for ``betas[i]`` and ``xis[j]``.  For
    each direction the beta sweep starts from the median (or ``cfg.init``)
    and warm-starts every solve at the previous level's result.
    """
    betas = [float(b) for b in betas]
    if any(b2 < b1 for b1, b2 in zip(betas, betas[1:])):
        raise ValueError("betas must be sorted ascending")
    data = np.asarray(data, dtype=float)
    cfg = cfg.resolve(manifold, data[canonical_order(data)])
    if cfg.init is None:
        if median is None:
            median = sample_median(manifold, data, cfg)
        start = median.point
    else:
        start = cfg.init
    out = [[None] * len(xis) for _ in betas]
    for j, xi in enumerate(xis):
        init = start
        for i, b in enumerate(betas):
            res = descent(manifold, data, QuantileIndex(b, xi), replace(cfg, init=init), mode, kind)
            out[i][j] = res
            init = res.point
    return out
