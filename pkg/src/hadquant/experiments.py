"""Simulation studies: hyperbolic-plane datasets, gradient approximation
error tables, isoquantile contours and a synthetic SPD(3) study."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ContractViolation, HadquantError
from .geometry import SPD, Hyperboloid, Manifold
from .geometry.spd import expm
from .quantile import GradientMode, LossKind
from .rng import box_muller, uniform_stream
from .solver import DescentConfig, canonical_order, quantile_field, sample_median
from .stats import MeasureReport, directions_circle, directions_random_antipodal, measures

BETA_GRID = (0.2, 0.4, 0.6, 0.8, 0.98)


# -- datasets ---------------------------------------------------------------
@dataclass(frozen=True)
class SimulationSpec:
    """Truncated isotropic Gaussian in the Poincare disk."""

    n_points: int = 100
    sigma: float = float(np.sqrt(0.3))
    seed: int = 0
    #: divide the second coordinate by this after truncation
    compress_y: Optional[float] = None

    def __post_init__(self):
        if self.n_points < 1:
            raise ContractViolation("n_points must be positive")
        if not self.sigma > 0:
            raise ContractViolation("sigma must be positive")
        if self.compress_y is not None and not self.compress_y > 0:
            raise ContractViolation("compress_y must be positive")


def simulate_poincare_disk(spec: SimulationSpec):
    """Disk coordinates, shape (n_points, 2).

    Candidates are consecutive Box-Muller pairs from the Philox stream
    ``spec.seed``; those with norm >= 1 are dropped.
    """
    gen = uniform_stream(spec.seed)
    pts = []
    while len(pts) < spec.n_points:
        z = box_muller(gen, 2 * spec.n_points).reshape(-1, 2) * spec.sigma
        for u in z[np.einsum("ij,ij->i", z, z) < 1.0]:
            pts.append(u)
    u = np.array(pts[: spec.n_points])
    if spec.compress_y is not None:
        u[:, 1] /= spec.compress_y
    return u


def simulate_poincare_dataset(spec: SimulationSpec, manifold: Optional[Hyperboloid] = None):
    """The disk sample lifted to the hyperboloid (curvature -1 by default)."""
    M = Hyperboloid(2) if manifold is None else manifold
    return M.from_poincare(simulate_poincare_disk(spec))


# -- approximation error tables ---------------------------------------------
ROWS = (
    (LossKind.PARAM, GradientMode.TRANSPORT),
    (LossKind.PARAM, GradientMode.RADIAL),
    (LossKind.DATA, GradientMode.TRANSPORT),
    (LossKind.DATA, GradientMode.RADIAL),
)
REFERENCE = {LossKind.DATA: GradientMode.EXACT, LossKind.PARAM: GradientMode.FD}


@dataclass
class ErrorTable:
    """Mean over directions of d(reference quantile, approximate quantile)."""

    betas: tuple
    rows: tuple
    cells: np.ndarray
    per_direction: np.ndarray
    L: int
    failures: list = field(default_factory=list)

    def cell(self, kind, mode, beta):
        i = self.rows.index((LossKind(kind), GradientMode(mode)))
        return float(self.cells[i, list(self.betas).index(beta)])

    def row(self, kind, mode):
        return self.cells[self.rows.index((LossKind(kind), GradientMode(mode)))]

    def to_dict(self):
        return {
            "betas": list(self.betas),
            "L": self.L,
            "rows": [
                {
                    "loss": k.value,
                    "grad": m.value,
                    "reference": "exact" if k is LossKind.DATA else "FD-reference",
                    "cells": [None if not np.isfinite(c) else float(c) for c in self.cells[i]],
                }
                for i, (k, m) in enumerate(self.rows)
            ],
            "failures": list(self.failures),
        }


def _field_or_record(M, data, betas, grid, cfg, mode, kind, median, failures, label):
    """Quantile field with per-direction failures recorded instead of raised."""
    out = [[None] * len(grid.dirs) for _ in betas]
    for j, xi in enumerate(grid.dirs):
        try:
            col = quantile_field(M, data, betas, [xi], cfg, mode, kind, median=median)
        except (HadquantError, ArithmeticError, np.linalg.LinAlgError) as exc:
            failures.append({"field": label, "direction": j, "error": f"{type(exc).__name__}: {exc}"})
            continue
        for i in range(len(betas)):
            out[i][j] = col[i][0].point
    return out


def approximation_error_table(
    M: Manifold,
    data,
    betas=BETA_GRID,
    L: int = 64,
    cfg: DescentConfig = DescentConfig(),
    anchor=None,
) -> ErrorTable:
    """Errors of the two gradient approximations for both loss kinds.

    Directions are the circle grid of size ``L`` at ``anchor`` (the model
    origin by default).  Every quantile field starts from the sample median
    and warm-starts along the beta grid.
    """
    betas = tuple(float(b) for b in betas)
    if any(b <= 0 for b in betas):
        raise ContractViolation("all gradients coincide at beta = 0; use positive levels")
    data = np.asarray(data, dtype=float)
    cfg = cfg.resolve(M, data[canonical_order(data)])
    anchor = getattr(M, "origin") if anchor is None else anchor
    grid = directions_circle(M, anchor, L)
    median = sample_median(M, data, cfg)
    failures = []
    fields = {}
    for kind, mode in ROWS:
        for key in ((kind, REFERENCE[kind]), (kind, mode)):
            if key not in fields:
                label = f"{key[0].value}/{key[1].value}"
                fields[key] = _field_or_record(M, data, betas, grid, cfg, key[1], key[0], median, failures, label)

    per = np.full((len(ROWS), len(betas), L), np.nan)
    for r, (kind, mode) in enumerate(ROWS):
        ref, app = fields[(kind, REFERENCE[kind])], fields[(kind, mode)]
        for i in range(len(betas)):
            for j in range(L):
                if ref[i][j] is not None and app[i][j] is not None:
                    per[r, i, j] = float(M.dist(ref[i][j], app[i][j]))
    with np.errstate(invalid="ignore"):
        cells = np.array(
            [[np.mean(v[np.isfinite(v)]) if np.any(np.isfinite(v)) else np.nan for v in row] for row in per]
        )
    return ErrorTable(betas=betas, rows=ROWS, cells=cells, per_direction=per, L=int(L), failures=failures)


# -- isoquantile contours ---------------------------------------------------
def isoquantile_contours(
    M: Hyperboloid,
    data,
    betas=BETA_GRID,
    L: int = 64,
    cfg: DescentConfig = DescentConfig(),
    mode=GradientMode.EXACT,
    kind=LossKind.DATA,
    anchor=None,
):
    """Closed polylines, one per beta, in Poincare-disk coordinates.

    Returns a dict mapping beta to an ``(L + 1, 2)`` array whose last row
    repeats the first.
    """
    if not isinstance(M, Hyperboloid) or M.dim != 2:
        raise ContractViolation("contours need the 2-dimensional hyperboloid")
    anchor = M.origin if anchor is None else anchor
    grid = directions_circle(M, anchor, L)
    res = quantile_field(M, data, betas, list(grid.dirs), cfg, mode, kind)
    out = {}
    for i, b in enumerate(betas):
        pts = M.to_poincare(np.stack([r.point for r in res[i]]))
        out[float(b)] = np.vstack([pts, pts[:1]])
    return out


def _segments_cross(p1, p2, q1, q2):
    def orient(a, b, c):
        return np.sign((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))

    return orient(p1, p2, q1) * orient(p1, p2, q2) < 0 and orient(q1, q2, p1) * orient(q1, q2, p2) < 0


def is_simple_polygon(poly) -> bool:
    """True when no two non-adjacent edges of a closed polyline cross."""
    poly = np.asarray(poly, dtype=float)
    n = len(poly) - 1
    for a in range(n):
        for b in range(a + 2, n):
            if a == 0 and b == n - 1:
                continue
            if _segments_cross(poly[a], poly[a + 1], poly[b], poly[b + 1]):
                return False
    return True


def point_in_polygon(pt, poly) -> bool:
    """Even-odd ray casting."""
    x, y = pt
    inside = False
    for (x1, y1), (x2, y2) in zip(poly[:-1], poly[1:]):
        if (y1 > y) != (y2 > y) and x < x1 + (y - y1) * (x2 - x1) / (y2 - y1):
            inside = not inside
    return inside


# -- synthetic SPD study ----------------------------------------------------
SPD_BETAS = (0.0, 0.2, 0.4, 0.6, 0.8, 0.98)


def spd_fan_vectors():
    """Four orthonormal tangents at the identity of SPD(3) (trace metric)."""
    s2, s3, s6 = np.sqrt(2.0), np.sqrt(3.0), np.sqrt(6.0)
    return np.stack(
        [
            np.eye(3) / s3,
            np.diag([1.0, -1.0, 0.0]) / s2,
            np.diag([1.0, 1.0, -2.0]) / s6,
            np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]) / s2,
        ]
    )


def simulate_spd_sample(n: int, seed: int, scale: float = 0.3, inflate: float = 1.0):
    """Log-Gaussian SPD(3) sample at the identity.

    Coordinates in the orthonormal symmetric basis are i.i.d. N(0, scale^2);
    the first coordinate (the E11 direction) is multiplied by ``inflate``.
    """
    M = SPD(3)
    c = box_muller(uniform_stream(seed), n * M.dim).reshape(n, M.dim) * scale
    c[:, 0] *= inflate
    return expm(np.tensordot(c, M._sym_basis, axes=1))


@dataclass
class SPDStudyArm:
    data: np.ndarray
    median: np.ndarray
    fan: list
    moderate: MeasureReport
    extreme: MeasureReport


@dataclass
class SPDStudy:
    isotropic: SPDStudyArm
    anisotropic: SPDStudyArm

    def to_dict(self):
        def arm(a):
            return {
                "median": a.median.tolist(),
                "moderate": a.moderate.to_dict(),
                "extreme": a.extreme.to_dict(),
            }

        return {"isotropic": arm(self.isotropic), "anisotropic": arm(self.anisotropic)}


def _spd_arm(data, seed, cfg, mode, half_K):
    M = SPD(3)
    med = sample_median(M, data, cfg)
    m = med.point
    I = np.eye(3)
    fan = [M.transport(I, m, v) for v in spd_fan_vectors()]
    dirs = [M.boundary_direction(m, v) for v in fan]
    dirs += [d.antipode() for d in dirs]
    field_ = quantile_field(M, data, SPD_BETAS, dirs, cfg, mode, LossKind.DATA, median=med)

    def grid(anchor):
        return directions_random_antipodal(M, anchor, half_K, seed)

    moderate = measures(M, data, 0.5, 0.8, grid, cfg, mode, beta_kappa=0.2)
    extreme = measures(M, data, 0.98, 0.98, grid, cfg, mode, beta_kappa=0.2)
    return SPDStudyArm(data=data, median=m, fan=field_, moderate=moderate, extreme=extreme)


def synthetic_spd_study(
    n: int = 100,
    seed: int = 0,
    cfg: DescentConfig = DescentConfig(),
    mode=GradientMode.TRANSPORT,
    half_K: int = 96,
    inflate: float = 3.0,
) -> SPDStudy:
    """Measures for an isotropic and an anisotropic synthetic SPD(3) sample.

    Both arms report (beta, beta') = (0.5, 0.8) and (0.98, 0.98), with
    kurtosis denominators taken at beta = 0.2.
    """
    if n < 10:
        raise ContractViolation("need at least 10 matrices")
    iso = simulate_spd_sample(n, seed)
    aniso = simulate_spd_sample(n, seed, inflate=inflate)
    return SPDStudy(
        isotropic=_spd_arm(iso, seed, cfg, mode, half_K),
        anisotropic=_spd_arm(aniso, seed, cfg, mode, half_K),
    )
