"""Quantile-based descriptive measures and two-sample permutation tests.

For a direction grid ``xi_1..xi_K`` at the sample median ``m`` with
antipodal pairing ``k -> k'``, write ``q_k`` for the ``(beta, xi_k)``
quantile and ``p_k = q_{k'}``.  Then::

    delta1 = max_k |log_m q_k - log_m p_k|
    delta2 = mean_k |log_m q_k - log_m p_k|
    gamma1 = max_k |log_m q_k + log_m p_k| / delta1
    gamma2 = |mean_k log_m q_k| / delta2
    kappa_i = delta_i(beta') / delta_i(beta)
    alpha = log(max_k d(m, q_k) / min_k d(m, q_k))

All norms are Riemannian norms at ``m``.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import ContractViolation, DegenerateSampleError
from .geometry import Manifold
from .quantile import GradientMode, LossKind, QuantileIndex
from .rng import box_muller, uniform_stream
from .solver import DescentConfig, canonical_order, descent, sample_median

#: separations at or below this make the ratio measures undefined
DEGENERATE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DirectionGrid:
    """Boundary directions anchored at a common point, with antipodal pairing."""

    anchor: np.ndarray
    dirs: tuple
    pairing: tuple
    seed: Optional[int] = None

    def __post_init__(self):
        K = len(self.dirs)
        if len(self.pairing) != K:
            raise ContractViolation("pairing must have one entry per direction")
        for k, j in enumerate(self.pairing):
            if not 0 <= j < K or self.pairing[j] != k:
                raise ContractViolation("pairing must be an involution on the grid")

    def __len__(self):
        return len(self.dirs)


def _grid_from_vectors(M, anchor, vecs, pairing, seed=None):
    anchor = M.check_point(anchor)
    dirs = tuple(M.boundary_direction(anchor, v) for v in vecs)
    return DirectionGrid(anchor, dirs, tuple(int(j) for j in pairing), seed)


def directions_circle(M: Manifold, anchor, L: int) -> DirectionGrid:
    """``L`` equally spaced directions ``cos(2 pi l/L) b1 + sin(2 pi l/L) b2``, l = 1..L.

    ``b1, b2`` is the manifold's orthonormal basis at ``anchor``.  Index
    ``k`` (0-based) is paired with ``(k + L/2) mod L``.
    """
    if M.dim != 2:
        raise ContractViolation("circle grids need a 2-dimensional manifold")
    L = int(L)
    if L < 2 or L % 2:
        raise ContractViolation("L must be even and at least 2 so that antipodes exist")
    anchor = M.check_point(anchor)
    b1, b2 = M.basis(anchor)
    ang = 2.0 * np.pi * np.arange(1, L + 1) / L
    vecs = [np.cos(a) * b1 + np.sin(a) * b2 for a in ang]
    # exact zeros for the quarter turns so antipodes negate cleanly
    vecs = [np.where(np.abs(v) < 1e-15, 0.0, v) for v in vecs]
    pairing = [(k + L // 2) % L for k in range(L)]
    return _grid_from_vectors(M, anchor, vecs, pairing)


def directions_random_antipodal(M: Manifold, anchor, half_K: int, seed: int) -> DirectionGrid:
    """``half_K`` uniform unit tangents at ``anchor`` followed by their negations."""
    half_K = int(half_K)
    if half_K < 1:
        raise ContractViolation("half_K must be at least 1")
    anchor = M.check_point(anchor)
    B = M.basis(anchor)
    z = box_muller(uniform_stream(seed), half_K * M.dim).reshape(half_K, M.dim)
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    first = [M.from_coords(anchor, c, B) for c in z]
    dirs = [M.boundary_direction(anchor, v) for v in first]
    dirs += [d.antipode() for d in dirs]
    pairing = [(k + half_K) % (2 * half_K) for k in range(2 * half_K)]
    return DirectionGrid(anchor, tuple(dirs), tuple(pairing), int(seed))


@dataclass(frozen=True)
class MeasureReport:
    delta1: float
    delta2: float
    gamma1: float
    gamma2_norm: float
    kappa1: float
    kappa2: float
    alpha: float
    beta: float
    beta_prime: float
    K: int
    seed: Optional[int] = None
    #: level whose separations form the kappa denominators (defaults to beta)
    beta_kappa: Optional[float] = None

    def to_dict(self):
        return dict(self.__dict__)


def _separations(M, m, Q, pairing):
    """Log-coordinates at m of a quantile set and its antipodal partners."""
    lq = M.log(m, Q)
    lp = lq[list(pairing)]
    diff = M.norm(m, lq - lp)
    return lq, lp, diff


def _solve_grid(M, data, beta, grid, cfg, mode, kind, start):
    cfg = replace(cfg, init=start)
    out = []
    for xi in grid.dirs:
        out.append(descent(M, data, QuantileIndex(beta, xi), cfg, mode, kind).point)
    return np.stack(out)


def measures(
    M: Manifold,
    data,
    beta: float,
    beta_prime: float,
    grid: Union[DirectionGrid, Callable[[np.ndarray], DirectionGrid]],
    cfg: DescentConfig = DescentConfig(),
    mode=GradientMode.EXACT,
    kind=LossKind.DATA,
    beta_kappa: Optional[float] = None,
) -> MeasureReport:
    """Dispersion, skewness, kurtosis and asymmetry measures of a sample.

    ``grid`` is either a grid already anchored at the sample median or a
    callable building one from the median.  ``beta_kappa`` selects the
    level in the kurtosis denominators; by default it is ``beta``.
    """
    beta, beta_prime = float(beta), float(beta_prime)
    if not 0.0 < beta < 1.0 or not beta <= beta_prime < 1.0:
        raise ContractViolation("need 0 < beta <= beta_prime < 1")
    if beta_kappa is not None and not 0.0 < beta_kappa < 1.0:
        raise ContractViolation("beta_kappa must lie in (0, 1)")
    data = np.asarray(data, dtype=float)
    cfg = cfg.resolve(M, data[canonical_order(data)])
    m = sample_median(M, data, cfg).point
    if callable(grid) and not isinstance(grid, DirectionGrid):
        grid = grid(m)
    if float(M.dist(grid.anchor, m)) > 10.0 * cfg.tol:
        raise ContractViolation("direction grid must be anchored at the sample median")
    K = len(grid)

    cache = {}

    def level(b):
        if b not in cache:
            Q = _solve_grid(M, data, b, grid, cfg, mode, kind, m)
            cache[b] = (Q,) + _separations(M, m, Q, grid.pairing)
        return cache[b]

    Q, lq, lp, diff = level(beta)
    d1, d2 = float(np.max(diff)), float(np.mean(diff))
    if d2 <= DEGENERATE_TOL:
        raise DegenerateSampleError(f"quantile separation vanishes at beta={beta}")
    gamma1 = float(np.max(M.norm(m, lq + lp))) / d1
    gamma2 = float(M.norm(m, np.mean(lq, axis=0))) / d2

    if beta_prime == beta and beta_kappa is None:
        k1 = k2 = 1.0
    else:
        bk = beta if beta_kappa is None else float(beta_kappa)
        num = level(beta_prime)[3]
        den = level(bk)[3]
        n1, n2 = float(np.max(num)), float(np.mean(num))
        e1, e2 = float(np.max(den)), float(np.mean(den))
        if e2 <= DEGENERATE_TOL:
            raise DegenerateSampleError(f"quantile separation vanishes at beta={bk}")
        k1, k2 = n1 / e1, n2 / e2

    r = M.dist(m, Q)
    if float(np.min(r)) <= DEGENERATE_TOL:
        raise DegenerateSampleError("a quantile coincides with the median")
    alpha = float(np.log(np.max(r) / np.min(r)))
    return MeasureReport(
        delta1=d1,
        delta2=d2,
        gamma1=gamma1,
        gamma2_norm=gamma2,
        kappa1=k1,
        kappa2=k2,
        alpha=alpha,
        beta=beta,
        beta_prime=beta_prime,
        K=K,
        seed=grid.seed,
        beta_kappa=beta_kappa,
    )


# -- two-sample permutation test ----------------------------------------------
@dataclass(frozen=True)
class PermTestResult:
    T0: float
    T1: float
    p0: float
    p1: float
    n_perm: int
    seed: int

    def to_dict(self):
        return dict(self.__dict__)


def _two_sample_stats(M, A, B, indices, cfg, mode, starts):
    """(T0, T1): median distance and summed quantile distances."""

    def solve(X, q, start):
        c = cfg.resolve(M, X[canonical_order(X)])
        return descent(M, X, q, replace(c, init=start), mode, LossKind.DATA).point

    med_q = QuantileIndex(0.0, indices[0].xi)
    T0 = float(M.dist(solve(A, med_q, starts[0]), solve(B, med_q, starts[0])))
    T1 = 0.0
    for q, s in zip(indices, starts[1:]):
        T1 += float(M.dist(solve(A, q, s), solve(B, q, s)))
    return T0, T1


def _replica(args):
    M, pooled, nA, indices, k, seed, cfg, mode, starts = args
    perm = uniform_stream(seed, k).permutation(len(pooled))
    X = pooled[perm]
    return _two_sample_stats(M, X[:nA], X[nA:], indices, cfg, mode, starts)


def perm_test(
    M: Manifold,
    data_a,
    data_b,
    indices: Sequence[QuantileIndex],
    n_perm: int = 500,
    seed: int = 0,
    cfg: DescentConfig = DescentConfig(),
    mode=GradientMode.EXACT,
    n_jobs: int = 1,
) -> PermTestResult:
    """Permutation test of equal distributions using medians and quantiles.

    ``T0 = d(m_A, m_B)`` and ``T1 = sum_k d(q_A(beta_k, xi_k), q_B(beta_k, xi_k))``.
    Replica ``k`` shuffles the pooled sample with the stream ``(seed, k)``,
    so p-values do not depend on ``n_jobs``.  All solves start from the
    pooled sample's estimate for the same index.
    """
    A = np.asarray(data_a, dtype=float)
    B = np.asarray(data_b, dtype=float)
    nd = len(M.point_shape)
    if A.ndim == nd or B.ndim == nd or len(A) == 0 or len(B) == 0:
        raise ContractViolation("both samples must be non-empty batches")
    if int(n_perm) < 1:
        raise ContractViolation("n_perm must be at least 1")
    indices = list(indices)
    if not indices:
        raise ContractViolation("need at least one quantile index")
    n_perm = int(n_perm)
    pooled = np.concatenate([A, B])
    pooled = pooled[canonical_order(pooled)]
    pc = cfg.resolve(M, pooled)
    med_q = QuantileIndex(0.0, indices[0].xi)
    starts = [descent(M, pooled, q, pc, mode).point for q in [med_q] + indices]

    T0, T1 = _two_sample_stats(M, A, B, indices, cfg, mode, starts)
    jobs = [(M, pooled, len(A), indices, k, seed, cfg, mode, starts) for k in range(1, n_perm + 1)]
    n_jobs = (os.cpu_count() or 1) if n_jobs is None else int(n_jobs)
    if n_jobs > 1:
        with ProcessPoolExecutor(n_jobs) as ex:
            stats = list(ex.map(_replica, jobs, chunksize=max(1, n_perm // (4 * n_jobs))))
    else:
        stats = [_replica(j) for j in jobs]
    s0 = np.array([s[0] for s in stats])
    s1 = np.array([s[1] for s in stats])
    p0 = (1 + int(np.sum(s0 >= T0))) / (1 + n_perm)
    p1 = (1 + int(np.sum(s1 >= T1))) / (1 + n_perm)
    return PermTestResult(T0=T0, T1=T1, p0=p0, p1=p1, n_perm=n_perm, seed=int(seed))


# -- breakdown ----------------------------------------------------------------
def breakdown_probe(
    M: Manifold,
    data,
    q: QuantileIndex,
    j: int,
    magnitudes: Sequence[float],
    cfg: DescentConfig = DescentConfig(),
    mode=GradientMode.EXACT,
    kind=LossKind.DATA,
):
    """Displacements of the sample quantile when ``j`` points are moved far out.

    The first ``j`` points are all replaced by ``exp_q(t * beta * xi_q)``
    (``exp_q(t * xi_q)`` when beta = 0), where ``q`` is the uncorrupted
    estimate.  Returns ``d(q, q_t)`` for each magnitude ``t``.
    """
    data = np.array(data, dtype=float)
    N = data.shape[0]
    if not 1 <= int(j) <= N:
        raise ContractViolation(f"j must lie in [1, {N}]")
    j = int(j)
    base = descent(M, data, q, cfg, mode, kind).point
    v = M.radial(q.xi, base)
    scale = q.beta if q.beta > 0 else 1.0
    out = []
    for t in magnitudes:
        Z = M.exp(base, (float(t) * scale) * v)
        corrupted = data.copy()
        corrupted[:j] = Z
        res = descent(M, corrupted, q, cfg, mode, kind)
        out.append(float(M.dist(base, res.point)))
    return out
