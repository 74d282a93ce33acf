"""Surface catalog: jet partials vs finite differences, curvature, orientation."""
import numpy as np
import pytest

from sweepkit.errors import DegenerateSurfaceError, DomainError, SceneValidationError
from sweepkit.surface import (
    Cylinder,
    Ellipsoid,
    Plane,
    Sphere,
    SplinePatch,
    Torus,
    eval_jet,
    shape_operator,
)

RNG = np.random.default_rng(20260815)


def spline_patch(rng, collapse=False):
    """Clamped bicubic patch: bilinear base plus a bounded height perturbation."""
    nu_c, nv_c = 6, 7
    gx, gy = np.meshgrid(np.linspace(0, 2, nu_c), np.linspace(-1, 1, nv_c), indexing="ij")
    P = np.stack([gx, gy, 0.3 * rng.standard_normal((nu_c, nv_c))], axis=-1)
    if collapse:
        P = np.stack([gx + gy, np.zeros_like(gx), np.zeros_like(gx)], axis=-1)
    tu = np.concatenate([[0] * 4, [0.35, 0.65], [1] * 4])
    tv = np.concatenate([[0] * 4, [0.25, 0.5, 0.75], [1] * 4])
    return SplinePatch(tu, tv, P)


def catalog(rng):
    return [
        Plane(origin=(0.3, -0.2, 0.5), e1=(1, 0.2, 0), e2=(-0.1, 1, 0.4),
              u_domain=(-1, 2), v_domain=(0, 3)),
        Sphere(center=(0.5, -1, 2), radius=1.7, pole_axis=(0.3, 0.4, -0.5)),
        Sphere(radius=1.0, pole_axis=(1, 0, 0)),
        Ellipsoid((-3.0, 1.0, 1.0), u_domain=(-1.55, 1.55)),
        Cylinder(radius=2.0, axis_scale=2.0, u_domain=(-0.625, 0.625)),
        Torus(3.0, 1.0, center=(0.2, 0.3, -0.1)),
        spline_patch(rng),
    ]


SURFACES = catalog(RNG)
IDS = [type(s).__name__ + str(i) for i, s in enumerate(SURFACES)]


def interior_points(surface, rng, n=60):
    (u0, u1), (v0, v1) = surface.u_domain, surface.v_domain
    mu = 0.0 if surface.u_periodic else 0.02 * (u1 - u0)
    mv = 0.0 if surface.v_periodic else 0.02 * (v1 - v0)
    u = rng.uniform(u0 + mu, u1 - mu, size=n)
    v = rng.uniform(v0 + mv, v1 - mv, size=n)
    return u, v


def close(a, b, tol=1e-6):
    a, b = np.asarray(a), np.asarray(b)
    return np.all(np.abs(a - b) <= tol * (1.0 + np.abs(b)))


@pytest.mark.parametrize("surface", SURFACES, ids=IDS)
def test_first_partials_match_finite_differences(surface):
    rng = np.random.default_rng(11)
    u, v = interior_points(surface, rng)
    jet = eval_jet(surface, u, v)
    h = 1e-6 * max(1.0, surface.domain_diagonal)
    for dfield, du, dv in (("du", h, 0.0), ("dv", 0.0, h)):
        plus = eval_jet(surface, u + du, v + dv, check_domain=False)
        minus = eval_jet(surface, u - du, v - dv, check_domain=False)
        fd = (plus.point - minus.point) / (2 * h)
        assert close(getattr(jet, dfield), fd, 5e-6)


@pytest.mark.parametrize("surface", SURFACES, ids=IDS)
def test_second_partials_match_finite_differences(surface):
    rng = np.random.default_rng(12)
    u, v = interior_points(surface, rng)
    jet = eval_jet(surface, u, v)
    h = 1e-6 * max(1.0, surface.domain_diagonal)
    up = eval_jet(surface, u + h, v, check_domain=False)
    um = eval_jet(surface, u - h, v, check_domain=False)
    vp = eval_jet(surface, u, v + h, check_domain=False)
    vm = eval_jet(surface, u, v - h, check_domain=False)
    assert close(jet.duu, (up.du - um.du) / (2 * h), 5e-6)
    assert close(jet.dvv, (vp.dv - vm.dv) / (2 * h), 5e-6)
    assert close(jet.duv, (vp.du - vm.du) / (2 * h), 5e-6)
    # mixed partial from the other side agrees
    assert close(jet.duv, (up.dv - um.dv) / (2 * h), 5e-6)


@pytest.mark.parametrize("surface", SURFACES, ids=IDS)
def test_normal_derivatives_match_finite_differences(surface):
    rng = np.random.default_rng(13)
    u, v = interior_points(surface, rng)
    jet = eval_jet(surface, u, v)
    assert close(np.linalg.norm(jet.normal, axis=-1), 1.0, 1e-12)
    # derivative of a unit field is tangent to the sphere of directions
    assert np.all(np.abs(np.sum(jet.normal * jet.normal_du, axis=-1)) < 1e-9)
    assert np.all(np.abs(np.sum(jet.normal * jet.normal_dv, axis=-1)) < 1e-9)
    h = 1e-6 * max(1.0, surface.domain_diagonal)
    up = eval_jet(surface, u + h, v, check_domain=False)
    um = eval_jet(surface, u - h, v, check_domain=False)
    vp = eval_jet(surface, u, v + h, check_domain=False)
    vm = eval_jet(surface, u, v - h, check_domain=False)
    assert close(jet.normal_du, (up.normal - um.normal) / (2 * h), 5e-6)
    assert close(jet.normal_dv, (vp.normal - vm.normal) / (2 * h), 5e-6)


@pytest.mark.parametrize("surface", SURFACES, ids=IDS)
def test_jet_broadcasts_like_pointwise_loop(surface):
    rng = np.random.default_rng(14)
    (u0, u1), (v0, v1) = surface.u_domain, surface.v_domain
    U = rng.uniform(u0, u1, size=(5, 4))
    V = rng.uniform(v0, v1, size=(5, 4))
    grid = eval_jet(surface, U, V)
    assert grid.point.shape == (5, 4, 3)
    for i in range(5):
        for j in range(4):
            single = eval_jet(surface, U[i, j], V[i, j])
            assert np.allclose(grid.point[i, j], single.point)
            assert np.allclose(grid.normal[i, j], single.normal)
            assert np.allclose(grid.duv[i, j], single.duv)


def test_sphere_shape_operator_is_identity_over_radius():
    sph = Sphere(center=(1, 2, 3), radius=2.5, pole_axis=(0.1, 1, 0.3))
    u, v = interior_points(sph, np.random.default_rng(15), n=40)
    W = shape_operator(eval_jet(sph, u, v))
    assert np.allclose(W, np.eye(2) / 2.5, atol=1e-10)
    inward = Sphere(center=(1, 2, 3), radius=2.5, pole_axis=(0.1, 1, 0.3), orientation="inward")
    Wi = shape_operator(eval_jet(inward, u, v))
    assert np.allclose(Wi, -np.eye(2) / 2.5, atol=1e-10)


def test_cylinder_shape_operator():
    cyl = Cylinder(radius=2.0, axis_scale=2.0, u_domain=(-0.625, 0.625))
    u, v = interior_points(cyl, np.random.default_rng(16), n=40)
    W = shape_operator(eval_jet(cyl, u, v))
    expect = np.array([[0.0, 0.0], [0.0, 0.5]])
    assert np.allclose(W, expect, atol=1e-10)
    assert np.allclose(np.linalg.det(W), 0.0, atol=1e-12)


def test_torus_gaussian_curvature():
    R, r = 3.0, 1.0
    torus = Torus(R, r, axis=(0.2, -0.3, 1.0))
    u, v = interior_points(torus, np.random.default_rng(17), n=40)
    K = np.linalg.det(shape_operator(eval_jet(torus, u, v)))
    assert close(K, np.cos(u) / (r * (R + r * np.cos(u))), 1e-9)
    # orientation flip leaves det unchanged
    Ki = np.linalg.det(shape_operator(eval_jet(
        Torus(R, r, axis=(0.2, -0.3, 1.0), orientation="inward"), u, v)))
    assert close(Ki, K, 1e-12)


def test_example_charts_have_inward_raw_normals():
    # both charts wind so that du x dv points into the solid
    cyl = Cylinder(radius=2.0, axis_scale=2.0, u_domain=(-0.625, 0.625), orientation="cross")
    jet = eval_jet(cyl, 0.1, 0.2)
    radial = jet.point - (jet.point @ cyl.axis) * cyl.axis
    assert jet.normal @ radial < 0
    assert Cylinder(radius=2.0, axis_scale=2.0, u_domain=(-0.625, 0.625)).normal_sign == -1.0

    ell = Ellipsoid((-3.0, 1.0, 1.0), u_domain=(-1.55, 1.55), orientation="cross")
    jet = eval_jet(ell, 0.1, 0.2)
    assert jet.normal @ (jet.point / ell.semiaxes**2) < 0
    assert Ellipsoid((-3.0, 1.0, 1.0), u_domain=(-1.55, 1.55)).normal_sign == -1.0


def test_outward_orientation_points_away_from_solid():
    for surface in SURFACES[1:6]:
        u, v = interior_points(surface, np.random.default_rng(18), n=25)
        jet = eval_jet(surface, u, v)
        probe = surface._outward_probe(jet.point, jet.u, jet.v)
        assert np.all(np.sum(jet.normal * probe, axis=-1) > 0)


def test_sphere_pole_frame_is_deterministic():
    sph = Sphere(radius=1.0, pole_axis=(1, 0, 0))
    assert np.allclose(eval_jet(sph, 0.0, 0.0).point, [0, 1, 0], atol=1e-15)
    # the u = 0 circle is the great circle perpendicular to the pole axis
    v = np.linspace(-3, 3, 11)
    assert np.allclose(eval_jet(sph, np.zeros_like(v), v).point[:, 0], 0.0, atol=1e-15)


def test_domain_checks_and_periodic_wrap():
    cyl = Cylinder(radius=1.0, u_domain=(-1, 1))
    with pytest.raises(DomainError):
        eval_jet(cyl, 1.5, 0.0)
    eval_jet(cyl, 1.5, 0.0, check_domain=False)
    eval_jet(cyl, 0.5, 40.0)  # periodic direction never raises
    u, v = cyl.wrap(0.5, 7.0)
    assert np.allclose([u, v], [0.5, 7.0 - 2 * np.pi])
    torus = Torus(3.0, 1.0)
    u, v = torus.wrap(7.0, -4.0)
    assert np.allclose([u, v], [7.0 - 2 * np.pi, -4.0 + 2 * np.pi])
    assert bool(np.all(torus.contains([100.0, -50.0], [3.0, 9.0])))


def test_degenerate_patch_is_rejected_at_evaluation():
    flat = spline_patch(np.random.default_rng(19), collapse=True)
    with pytest.raises(DegenerateSurfaceError):
        eval_jet(flat, 0.4, 0.6)


@pytest.mark.parametrize(
    "build",
    [
        lambda: Sphere(radius=0.0),
        lambda: Sphere(radius=1.0, u_domain=(-2.0, 1.0)),
        lambda: Ellipsoid((1.0, 0.0, 1.0)),
        lambda: Cylinder(radius=1.0, axis_scale=0.0),
        lambda: Cylinder(radius=1.0, e1=(1, 0, 0), e2=(1, 1, 0)),
        lambda: Torus(1.0, 1.0),
        lambda: Plane(e1=(1, 0, 0), e2=(2, 0, 0)),
        lambda: Plane(orientation="outward"),
        lambda: Plane(orientation="sideways"),
        lambda: Plane(u_domain=(1, 1)),
    ],
)
def test_invalid_constructions_are_rejected(build):
    with pytest.raises(SceneValidationError):
        build()


def test_spline_patch_reproduces_its_bilinear_base():
    nu_c, nv_c = 4, 4
    gx, gy = np.meshgrid(np.linspace(0, 1, nu_c), np.linspace(0, 1, nv_c), indexing="ij")
    P = np.stack([2 * gx, gy, np.zeros_like(gx)], axis=-1)
    t = np.concatenate([[0], np.linspace(0, 1, nu_c), [1]])
    patch = SplinePatch(t, t, P, degree_u=1, degree_v=1)
    jet = eval_jet(patch, 0.37, 0.81)
    assert np.allclose(jet.point, [0.74, 0.81, 0.0], atol=1e-14)
    assert np.allclose(jet.du, [2, 0, 0], atol=1e-14)
    assert np.allclose(jet.dv, [0, 1, 0], atol=1e-14)
    with pytest.raises(SceneValidationError):
        SplinePatch(t, t[:-1], P, degree_u=1, degree_v=1)
