"""Hadamard manifolds: flat space, hyperbolic space and SPD matrices."""

from .base import (
    BoundaryDirection,
    Manifold,
    adapted_basis,
    curvature_operator_matrix,
    gram_schmidt,
    metric_inner,
    numerical_gradient,
    orthonormal_basis,
    radial_field_numeric,
    radial_limit,
)
from .euclidean import Euclidean
from .hyperboloid import Hyperboloid, lorentz_boost, minkowski, spatial_rotation
from .spd import SPD, congruence

__all__ = [
    "BoundaryDirection",
    "Manifold",
    "Euclidean",
    "Hyperboloid",
    "SPD",
    "adapted_basis",
    "congruence",
    "curvature_operator_matrix",
    "gram_schmidt",
    "lorentz_boost",
    "metric_inner",
    "minkowski",
    "numerical_gradient",
    "orthonormal_basis",
    "radial_field_numeric",
    "radial_limit",
    "spatial_rotation",
]
