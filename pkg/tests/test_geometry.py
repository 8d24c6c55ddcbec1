import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hadquant.errors import ContractViolation, ConvergenceError
from hadquant.geometry import (
    SPD,
    BoundaryDirection,
    Euclidean,
    Hyperboloid,
    adapted_basis,
    congruence,
    curvature_operator_matrix,
    lorentz_boost,
    metric_inner,
    minkowski,
    numerical_gradient,
    orthonormal_basis,
    radial_field_numeric,
    radial_limit,
)

E11 = np.diag([1.0, 0.0, 0.0])


def _pair(M, rng, scale=0.8):
    x = M.random_point(rng, scale)
    v = M.random_tangent(rng, x, scale)
    return x, v


# -- metric -----------------------------------------------------------------
def test_metric_examples():
    S = SPD(3)
    assert metric_inner(S, np.eye(3), E11, E11) == pytest.approx(1.0, abs=1e-15)
    assert metric_inner(S, np.diag([2.0, 1.0, 1.0]), E11, E11) == pytest.approx(0.25, abs=1e-15)
    assert metric_inner(Euclidean(2), np.zeros(2), [1.0, 0.0], [0.0, 1.0]) == 0.0


def test_metric_rejects_foreign_tangent():
    H = Hyperboloid(2)
    with pytest.raises(ContractViolation):
        metric_inner(H, H.origin, np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]))
    with pytest.raises(ContractViolation):
        metric_inner(SPD(2), np.eye(2), np.array([[0.0, 1.0], [0.0, 0.0]]), np.eye(2))


def test_metric_symmetric_positive(manifold, rng):
    for _ in range(20):
        x, u = _pair(manifold, rng)
        v = manifold.random_tangent(rng, x)
        assert manifold.inner(x, u, v) == pytest.approx(manifold.inner(x, v, u), rel=1e-12, abs=1e-14)
        assert manifold.inner(x, u, u) > 0


# -- distance, exp, log -----------------------------------------------------
def test_distance_examples():
    assert SPD(3).dist(np.eye(3), np.diag([np.e, 1.0, 1.0])) == pytest.approx(1.0, abs=1e-14)
    H = Hyperboloid(2)
    y = np.array([np.cosh(1.0), np.sinh(1.0), 0.0])
    assert H.dist(H.origin, y) == pytest.approx(1.0, abs=1e-14)
    assert Euclidean(2).dist(np.zeros(2), np.array([3.0, 4.0])) == 5.0


def test_exp_log_examples():
    H = Hyperboloid(2)
    y = H.exp(H.origin, np.array([0.0, 1.0, 0.0]))
    np.testing.assert_allclose(y, [np.cosh(1.0), np.sinh(1.0), 0.0], atol=1e-14)
    S = SPD(3)
    np.testing.assert_allclose(S.exp(np.eye(3), E11), np.diag([np.e, 1.0, 1.0]), atol=1e-14)
    np.testing.assert_allclose(S.log(np.eye(3), np.diag([np.e**2, 1.0, 1.0])), 2 * E11, atol=1e-14)


def test_zero_vector_and_self_log(manifold, rng):
    x = manifold.random_point(rng)
    np.testing.assert_allclose(manifold.exp(x, manifold.zero_tangent(x)), x, atol=1e-13)
    assert float(manifold.norm(x, manifold.log(x, x))) < 1e-7
    assert float(manifold.dist(x, x)) < 1e-7


def test_exp_log_inverse(manifold, rng):
    x = manifold.random_point(rng, 0.8, size=500)
    v = manifold.random_tangent(rng, x, 0.8)
    back = manifold.log(x, manifold.exp(x, v))
    err = manifold.norm(x, back - v) / np.maximum(1.0, manifold.norm(x, v))
    assert np.max(err) < 1e-8


def test_log_norm_is_distance(manifold, rng):
    x = manifold.random_point(rng, size=100)
    y = manifold.random_point(rng, size=100)
    np.testing.assert_allclose(manifold.norm(x, manifold.log(x, y)), manifold.dist(x, y), rtol=1e-9)


def test_geodesic_additivity(manifold, rng):
    for _ in range(50):
        x, u = _pair(manifold, rng)
        u = u / manifold.norm(x, u)
        s, t = rng.uniform(0, 2, size=2)
        p = manifold.exp(x, (s + t) * u)
        assert float(manifold.dist(x, p)) == pytest.approx(s + t, abs=1e-8)
        # the midpoint lies on the segment
        m = manifold.exp(x, s * u)
        assert float(manifold.dist(x, m) + manifold.dist(m, p)) == pytest.approx(s + t, abs=1e-8)


def test_distance_triangle_inequality(manifold, rng):
    x, y, z = (manifold.random_point(rng, size=200) for _ in range(3))
    assert np.all(manifold.dist(x, z) <= manifold.dist(x, y) + manifold.dist(y, z) + 1e-10)


def test_hyperboloid_far_points():
    H = Hyperboloid(2)
    for t in (5.0, 20.0, 50.0, 300.0):
        y = H.exp(H.origin, np.array([0.0, t, 0.0]))
        assert float(H.dist(H.origin, y)) == pytest.approx(t, rel=1e-12)


def test_poincare_lift_matches_disk_metric(rng):
    H = Hyperboloid(2)
    for _ in range(200):
        u, v = rng.uniform(-0.7, 0.7, size=(2, 2))
        oracle = np.arccosh(1 + 2 * np.sum((u - v) ** 2) / ((1 - u @ u) * (1 - v @ v)))
        d = float(H.dist(H.from_poincare(u), H.from_poincare(v)))
        assert d == pytest.approx(oracle, rel=1e-8, abs=1e-12)
        np.testing.assert_allclose(H.to_poincare(H.from_poincare(u)), u, atol=1e-14)


def test_curvature_scaling_of_hyperboloid(rng):
    # radius R scales every distance by R
    H1, H4 = Hyperboloid(2), Hyperboloid(2, kappa=-0.25)
    u, v = rng.uniform(-0.6, 0.6, size=(2, 2))
    d1 = H1.dist(H1.from_poincare(u), H1.from_poincare(v))
    d4 = H4.dist(H4.from_poincare(u), H4.from_poincare(v))
    assert float(d4) == pytest.approx(2 * float(d1), rel=1e-12)


# -- parallel transport -----------------------------------------------------
def test_transport_identity_at_same_point(manifold, rng):
    x, v = _pair(manifold, rng)
    np.testing.assert_allclose(manifold.transport(x, x, v), v, atol=1e-12)


def test_transport_isometry(manifold, rng):
    x = manifold.random_point(rng, size=200)
    y = manifold.random_point(rng, size=200)
    u = manifold.random_tangent(rng, x)
    v = manifold.random_tangent(rng, x)
    Tu, Tv = manifold.transport(x, y, u), manifold.transport(x, y, v)
    scale = manifold.norm(x, u) * manifold.norm(x, v)
    assert np.max(np.abs(manifold.inner(y, Tu, Tv) - manifold.inner(x, u, v)) / scale) < 1e-9
    n0, n1 = manifold.norm(x, u), manifold.norm(y, Tu)
    assert np.max(np.abs(n1 - n0) / n0) < 1e-9
    back = manifold.transport(y, x, Tu)
    assert np.max(manifold.norm(x, back - u) / n0) < 1e-9


def test_transport_of_geodesic_velocity(manifold, rng):
    x = manifold.random_point(rng, size=50)
    y = manifold.random_point(rng, size=50)
    lhs = manifold.transport(x, y, manifold.log(x, y))
    rhs = -manifold.log(y, x)
    assert np.max(manifold.norm(y, lhs - rhs)) < 1e-8


def test_spd_transport_closed_form(rng):
    S = SPD(3)
    x, y = S.random_point(rng), S.random_point(rng)
    v = S.random_tangent(rng, x)
    w, U = np.linalg.eig(y @ np.linalg.inv(x))
    E = np.real((U * np.sqrt(w)) @ np.linalg.inv(U))
    np.testing.assert_allclose(S.transport(x, y, v), E @ v @ E.T, atol=1e-10)


# -- radial field -----------------------------------------------------------
def test_radial_euclidean_constant(rng):
    E = Euclidean(3)
    xi = E.boundary_direction(np.zeros(3), [1.0, 2.0, 2.0])
    x = rng.normal(size=(5, 3))
    np.testing.assert_array_equal(E.radial(xi, x), np.tile([1 / 3, 2 / 3, 2 / 3], (5, 1)))


def test_radial_at_anchor_is_unit_dir(manifold, rng):
    a, v = _pair(manifold, rng)
    xi = manifold.boundary_direction(a, v)
    np.testing.assert_allclose(manifold.radial(xi, a), xi.unit_dir, atol=1e-12)


def test_radial_is_unit(manifold, rng):
    a, v = _pair(manifold, rng)
    xi = manifold.boundary_direction(a, v)
    x = manifold.random_point(rng, size=100)
    r = manifold.radial(xi, x)
    np.testing.assert_allclose(manifold.norm(x, r), 1.0, atol=1e-10)
    manifold.check_tangent(x, r)


def test_radial_hyperboloid_closed_form_vs_limit():
    H = Hyperboloid(2)
    xi = BoundaryDirection(H.origin, np.array([0.0, 1.0, 0.0]))
    x = np.array([np.cosh(1.0), 0.0, np.sinh(1.0)])
    b = H.origin + xi.unit_dir
    closed = -b / minkowski(x, b) - x
    np.testing.assert_allclose(H.radial(xi, x), closed, atol=1e-14)
    np.testing.assert_allclose(radial_limit(H, xi, x, 50.0), closed, atol=1e-6)
    np.testing.assert_allclose(radial_field_numeric(H, xi, x, t=64.0), closed, atol=1e-8)


@pytest.mark.parametrize("kappa", [-1.0, -0.25, -4.0])
def test_radial_hyperboloid_limit_residual(kappa, rng):
    H = Hyperboloid(2, kappa)
    for _ in range(10):
        a, v = _pair(H, rng)
        xi = H.boundary_direction(a, v)
        x = H.random_point(rng)
        r50, r100 = radial_limit(H, xi, x, 50.0 * H.radius), radial_limit(H, xi, x, 100.0 * H.radius)
        assert float(H.norm(x, r100 - r50)) < 1e-6
        assert float(H.norm(x, r100 - H.radial(xi, x))) < 1e-6


def test_radial_hyperboloid_asymptotic(rng):
    H = Hyperboloid(2)
    a, v = _pair(H, rng)
    xi = H.boundary_direction(a, v)
    x = H.random_point(rng)
    r = H.radial(xi, x)
    d = [float(H.dist(H.exp(x, t * r), H.exp(a, t * xi.unit_dir))) for t in (1.0, 10.0, 50.0)]
    # convex and bounded along asymptotic rays, so non-increasing
    assert d[0] >= d[1] - 1e-9 and d[1] >= d[2] - 1e-6
    assert d[0] <= float(H.dist(x, a)) + 1e-9


def test_radial_spd_asymptotic(rng):
    # t is kept small enough that exp(t * lam) stays well conditioned
    S = SPD(3)
    for _ in range(5):
        a, v = _pair(S, rng, 0.5)
        xi = S.boundary_direction(a, v)
        x = S.random_point(rng, 0.5)
        r = S.radial(xi, x)
        ts = (1.0, 5.0, 10.0, 20.0)
        d = [float(S.dist(S.exp(x, t * r), S.exp(a, t * xi.unit_dir))) for t in ts]
        assert all(d1 >= d2 - 1e-7 for d1, d2 in zip(d, d[1:]))
        assert d[0] <= float(S.dist(x, a)) + 1e-9
        # a tilted ray drifts away linearly
        w = S.random_tangent(rng, x)
        w = w - S.inner(x, w, r) * r
        tilt = r + 0.2 * w / S.norm(x, w)
        tilt = tilt / S.norm(x, tilt)
        assert float(S.dist(S.exp(x, 20.0 * tilt), S.exp(a, 20.0 * xi.unit_dir))) > d[-1] + 1.0


def test_radial_spd_commuting_case():
    S = SPD(3)
    lam = np.diag([2.0, -1.0, 0.5]) / np.sqrt(5.25)
    xi = BoundaryDirection(np.eye(3), lam)
    x = np.diag([3.0, 0.5, 1.7])
    s = np.sqrt(x)
    np.testing.assert_allclose(S.radial(xi, x), s @ lam @ s, atol=1e-13)


def test_radial_spd_limit_is_first_order(rng):
    # the ray limit only converges like 1/t on SPD (flat directions)
    S = SPD(3)
    a, v = _pair(S, rng, 0.5)
    xi = S.boundary_direction(a, v)
    x = S.random_point(rng, 0.5)
    r = S.radial(xi, x)
    e = [float(S.norm(x, radial_limit(S, xi, x, t) - r)) for t in (5.0, 10.0, 20.0)]
    assert e[0] > e[1] > e[2]
    assert e[1] / e[2] == pytest.approx(2.0, rel=0.2)
    with pytest.raises(ConvergenceError) as info:
        radial_field_numeric(S, xi, x, t=20.0)
    assert info.value.residual > 1e-8


def test_equivalent_directions_share_field(rng):
    H = Hyperboloid(2)
    a, v = _pair(H, rng)
    xi = H.boundary_direction(a, v)
    # another anchor on the same ray names the same boundary point
    a2 = H.exp(a, 1.7 * xi.unit_dir)
    xi2 = BoundaryDirection(a2, H.radial(xi, a2))
    x = H.random_point(rng, size=20)
    np.testing.assert_allclose(H.radial(xi2, x), H.radial(xi, x), atol=1e-10)


# -- bases ------------------------------------------------------------------
def test_basis_orthonormal(manifold, rng):
    x = manifold.random_point(rng)
    B = np.stack(orthonormal_basis(manifold, x))
    assert len(B) == manifold.dim
    G = manifold.inner(x, B[:, None], B[None, :])
    np.testing.assert_allclose(G, np.eye(manifold.dim), atol=1e-10)


def test_basis_examples():
    np.testing.assert_array_equal(Euclidean(3).basis(np.ones(3)), np.eye(3))
    H = Hyperboloid(3)
    np.testing.assert_allclose(H.basis(H.origin), np.eye(4)[1:], atol=1e-15)


def test_spd_basis_formula(rng):
    S = SPD(3)
    x = S.random_point(rng)
    w, U = np.linalg.eigh(x)
    s = (U * np.sqrt(w)) @ U.T
    frob = np.stack(
        [
            np.outer(np.eye(3)[i], np.eye(3)[j]) * (1.0 if i == j else 1 / np.sqrt(2))
            + (np.outer(np.eye(3)[j], np.eye(3)[i]) / np.sqrt(2) if i != j else 0)
            for i in range(3)
            for j in range(i, 3)
        ]
    )
    np.testing.assert_allclose(S.basis(x), s @ frob @ s, atol=1e-12)


def test_adapted_basis_leads_with_e1(manifold, rng):
    x, v = _pair(manifold, rng)
    e1 = v / manifold.norm(x, v)
    B = adapted_basis(manifold, x, e1)
    np.testing.assert_allclose(B[0], e1, atol=1e-12)


# -- numerical gradient -----------------------------------------------------
def test_numerical_gradient_half_squared_distance(manifold, rng):
    p, x = manifold.random_point(rng), manifold.random_point(rng)
    g = numerical_gradient(manifold, lambda z: 0.5 * float(manifold.dist(z, x)) ** 2, p)
    expected = -manifold.log(p, x)
    assert float(manifold.norm(p, g - expected)) < 1e-6 * max(1.0, float(manifold.norm(p, expected)))


def test_numerical_gradient_constant(manifold, rng):
    p = manifold.random_point(rng)
    g = numerical_gradient(manifold, lambda z: 3.0, p)
    assert float(manifold.norm(p, g)) == 0.0


def test_numerical_gradient_rejects_nonfinite():
    E = Euclidean(2)
    with pytest.raises(FloatingPointError):
        numerical_gradient(E, lambda z: np.inf, np.zeros(2))
    with pytest.raises(ValueError):
        numerical_gradient(E, lambda z: 0.0, np.zeros(2), h=0.0)


# -- curvature operator -----------------------------------------------------
def test_curvature_euclidean_zero(rng):
    E = Euclidean(3)
    e1 = np.array([0.0, 0.6, 0.8])
    np.testing.assert_array_equal(curvature_operator_matrix(E, np.zeros(3), e1), np.zeros((3, 3)))


@pytest.mark.parametrize("kappa", [-1.0, -0.25])
def test_curvature_hyperboloid_constant(kappa, rng):
    H = Hyperboloid(3, kappa)
    p, v = _pair(H, rng)
    e1 = v / H.norm(p, v)
    A = curvature_operator_matrix(H, p, e1)
    np.testing.assert_allclose(A, np.diag([0.0, kappa, kappa]), atol=1e-12)


def _spd_brute_curvature(p, e1, basis):
    # <R(u, e1) e1, w> at p, pulled back to the identity where
    # R(X, Y) Z = -[[X, Y], Z] / 4 in the trace metric (sign chosen so
    # that sectional curvatures are <R(u, e1) e1, u>)
    w, U = np.linalg.eigh(p)
    si = (U / np.sqrt(w)) @ U.T
    pull = lambda v: si @ v @ si  # noqa: E731
    X = pull(e1)
    out = np.zeros((len(basis), len(basis)))
    for k, bk in enumerate(basis):
        for l, bl in enumerate(basis):
            Y, W = pull(bk), pull(bl)
            c = Y @ X - X @ Y
            R = -(c @ X - X @ c) / 4
            out[k, l] = np.trace(R @ W)
    return out


def test_curvature_spd_hand_values():
    S = SPD(3)
    e1 = np.diag([1.0, -1.0, 0.0]) / np.sqrt(2)
    A = curvature_operator_matrix(S, np.eye(3), e1)
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(A)), [-0.5, -0.125, -0.125, 0, 0, 0], atol=1e-14)
    B = adapted_basis(S, np.eye(3), e1)
    np.testing.assert_allclose(A, _spd_brute_curvature(np.eye(3), e1, B), atol=1e-14)


def test_curvature_spd_random(rng):
    S = SPD(3)
    for _ in range(20):
        p, v = _pair(S, rng)
        e1 = v / S.norm(p, v)
        A = curvature_operator_matrix(S, p, e1)
        B = adapted_basis(S, p, e1)
        assert np.max(np.abs(A - A.T)) < 1e-10
        np.testing.assert_allclose(A[0], 0.0, atol=1e-10)
        ev = np.linalg.eigvalsh(A)
        assert ev.min() >= -0.5 - 1e-10 and ev.max() <= 1e-10
        np.testing.assert_allclose(A, _spd_brute_curvature(p, e1, B), atol=1e-9)


def test_curvature_rejects_non_unit():
    with pytest.raises(ContractViolation):
        curvature_operator_matrix(Hyperboloid(2), Hyperboloid(2).origin, np.array([0.0, 2.0, 0.0]))


# -- validation -------------------------------------------------------------
def test_hyperboloid_check_point():
    H = Hyperboloid(2)
    x = np.array([np.cosh(1.0), np.sinh(1.0), 0.0])
    np.testing.assert_allclose(H.check_point(x * (1 + 1e-8)), H.renormalize(x * (1 + 1e-8)))
    assert abs(minkowski(H.check_point(x * (1 + 1e-8)), H.check_point(x)) + 1) < 1e-6
    with pytest.raises(ContractViolation):
        H.check_point(x * 1.01)
    with pytest.raises(ContractViolation):
        H.check_point(-x)


def test_spd_check_point():
    S = SPD(2)
    with pytest.raises(ContractViolation):
        S.check_point(np.array([[1.0, 0.0], [0.0, -0.1]]))
    with pytest.raises(ContractViolation):
        S.check_point(np.array([[1.0, 0.5], [0.0, 1.0]]))
    y = S.check_point(np.array([[1.0, 0.2 + 1e-13], [0.2, 1.0]]))
    np.testing.assert_array_equal(y, y.T)


def test_exp_renormalizes(rng):
    H = Hyperboloid(2)
    x = H.random_point(rng)
    for _ in range(200):
        v = H.random_tangent(rng, x)
        x = H.exp(x, 0.5 * v / H.norm(x, v))
    assert abs(minkowski(x, x) + 1.0) < 1e-9 * x[0] ** 2


# -- isometries -------------------------------------------------------------
def test_lorentz_boost_is_isometry(rng):
    H = Hyperboloid(2)
    g = lorentz_boost(2, 0.7)
    x, y = H.random_point(rng, size=20), H.random_point(rng, size=20)
    np.testing.assert_allclose(H.dist(x @ g.T, y @ g.T), H.dist(x, y), rtol=1e-10)


def test_congruence_is_isometry(rng):
    S = SPD(3)
    A = rng.normal(size=(3, 3))
    x, y = S.random_point(rng), S.random_point(rng)
    assert float(S.dist(congruence(A, x), congruence(A, y))) == pytest.approx(float(S.dist(x, y)), rel=1e-9)


@given(
    st.lists(st.floats(-2.0, 2.0), min_size=2, max_size=2),
    st.lists(st.floats(-3.0, 3.0), min_size=2, max_size=2),
)
def test_hyperboloid_roundtrip_property(a, v):
    H = Hyperboloid(2)
    x = H.exp(H.origin, np.array([0.0, *a]))
    w = np.array([0.0, *v])
    w = H.transport(H.origin, x, w)
    y = H.exp(x, w)
    assert float(H.norm(x, H.log(x, y) - w)) < 1e-8 * max(1.0, float(H.norm(x, w)))
    assert float(H.dist(x, y)) == pytest.approx(float(H.norm(x, w)), rel=1e-9, abs=1e-12)


@given(st.lists(st.floats(-1.5, 1.5), min_size=6, max_size=6), st.lists(st.floats(-1.5, 1.5), min_size=6, max_size=6))
def test_spd_roundtrip_property(a, v):
    S = SPD(3)
    x = S.exp(np.eye(3), S.from_coords(np.eye(3), np.array(a)))
    w = S.from_coords(x, np.array(v))
    assert float(S.norm(x, S.log(x, S.exp(x, w)) - w)) < 1e-8 * max(1.0, float(S.norm(x, w)))
