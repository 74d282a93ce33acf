"""Parametric surface catalog with second-order jets and normal derivatives.

Every surface evaluates a :class:`SurfaceJet`: position, the first and second
parameter partials, and the oriented unit normal with its parameter
derivatives.  Evaluation broadcasts over numpy arrays of (u, v) pairs, so the
same code path serves scalar Newton iterations and dense grid sampling.

Orientation is a per-surface choice made at construction.  Closed catalog
surfaces (sphere, ellipsoid, cylinder, torus) can resolve "outward"/"inward"
against their own enclosed side; open surfaces only accept the raw
cross-product normal or its negation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import NdBSpline

from .errors import DegenerateSurfaceError, DomainError, SceneValidationError

_DOMAIN_SLACK = 1e-12


def _unit(v, name="vector"):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise SceneValidationError(f"{name} must be nonzero")
    return v / n


def _stack(x, y, z):
    return np.stack(np.broadcast_arrays(x, y, z), axis=-1)


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def _cross(a, b):
    # component arithmetic; np.cross pays heavy per-call overhead on jets
    out = np.empty(np.broadcast_shapes(a.shape, b.shape), dtype=float)
    out[..., 0] = a[..., 1] * b[..., 2] - a[..., 2] * b[..., 1]
    out[..., 1] = a[..., 2] * b[..., 0] - a[..., 0] * b[..., 2]
    out[..., 2] = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    return out


@dataclass(frozen=True)
class SurfaceJet:
    """Second-order jet of a surface at (u, v), with oriented normal data.

    All point-valued fields have shape (..., 3); ``u``/``v``/``cross_norm``
    share the leading shape.  ``normal`` is the oriented unit normal;
    ``normal_du``/``normal_dv`` are its parameter derivatives (tangent
    vectors, since the normal has constant length).
    """

    u: np.ndarray
    v: np.ndarray
    point: np.ndarray
    du: np.ndarray
    dv: np.ndarray
    duu: np.ndarray
    duv: np.ndarray
    dvv: np.ndarray
    normal: np.ndarray
    normal_du: np.ndarray
    normal_dv: np.ndarray
    cross_norm: np.ndarray


class ParametricSurface:
    """Base class: domain handling, jet assembly, orientation resolution."""

    #: subclasses may flip these; period equals the domain width.
    u_periodic = False
    v_periodic = False
    #: closed surfaces can resolve outward/inward orientation themselves.
    _closed = False

    def __init__(self, u_domain, v_domain, orientation="cross"):
        self.u_domain = (float(u_domain[0]), float(u_domain[1]))
        self.v_domain = (float(v_domain[0]), float(v_domain[1]))
        if not (self.u_domain[0] < self.u_domain[1] and self.v_domain[0] < self.v_domain[1]):
            raise SceneValidationError("empty parameter domain")
        self.orientation = orientation
        self.normal_sign = 1.0
        self._resolve_orientation(orientation)

    # -- geometry hooks -----------------------------------------------------

    def _raw_jet(self, u, v):
        """Return (S, Su, Sv, Suu, Suv, Svv) as (..., 3) arrays."""
        raise NotImplementedError

    def _outward_probe(self, point, u, v):
        """Direction pointing out of the enclosed solid at ``point`` (closed surfaces)."""
        raise NotImplementedError

    # -- domain -------------------------------------------------------------

    @property
    def domain_diagonal(self) -> float:
        du = self.u_domain[1] - self.u_domain[0]
        dv = self.v_domain[1] - self.v_domain[0]
        return float(np.hypot(du, dv))

    def contains(self, u, v) -> np.ndarray:
        """Domain membership; periodic directions always qualify."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        ok = np.ones(np.broadcast(u, v).shape, dtype=bool)
        slack = _DOMAIN_SLACK * max(1.0, self.domain_diagonal)
        if not self.u_periodic:
            ok &= (u >= self.u_domain[0] - slack) & (u <= self.u_domain[1] + slack)
        if not self.v_periodic:
            ok &= (v >= self.v_domain[0] - slack) & (v <= self.v_domain[1] + slack)
        return ok

    def wrap(self, u, v):
        """Map (u, v) into the fundamental domain along periodic directions."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if self.u_periodic:
            lo, hi = self.u_domain
            u = lo + np.mod(u - lo, hi - lo)
        if self.v_periodic:
            lo, hi = self.v_domain
            v = lo + np.mod(v - lo, hi - lo)
        return u, v

    # -- evaluation ---------------------------------------------------------

    def jet(self, u, v, check_domain=True) -> SurfaceJet:
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if check_domain and not bool(np.all(self.contains(u, v))):
            raise DomainError(
                f"(u, v) outside domain u in {self.u_domain}, v in {self.v_domain}"
            )
        S, Su, Sv, Suu, Suv, Svv = self._raw_jet(u, v)
        n = _cross(Su, Sv)
        cross_norm = np.linalg.norm(n, axis=-1)
        reg_floor = 1e-9 * self.domain_diagonal
        if np.any(cross_norm <= reg_floor):
            raise DegenerateSurfaceError(
                "surface partials are (near) linearly dependent inside the domain"
            )
        nhat = n / cross_norm[..., None]
        nu = _cross(Suu, Sv) + _cross(Su, Suv)
        nv = _cross(Suv, Sv) + _cross(Su, Svv)
        s = self.normal_sign
        # d/du (n/|n|) projected update; the sign rides along unchanged.
        Ndu = s * (nu - nhat * _dot(nhat, nu)[..., None]) / cross_norm[..., None]
        Ndv = s * (nv - nhat * _dot(nhat, nv)[..., None]) / cross_norm[..., None]
        return SurfaceJet(
            u=u, v=v, point=S, du=Su, dv=Sv, duu=Suu, duv=Suv, dvv=Svv,
            normal=s * nhat, normal_du=Ndu, normal_dv=Ndv, cross_norm=cross_norm,
        )

    # -- orientation --------------------------------------------------------

    def _resolve_orientation(self, orientation):
        if orientation in ("cross", "anticross"):
            self.normal_sign = 1.0 if orientation == "cross" else -1.0
            return
        if orientation not in ("outward", "inward"):
            raise SceneValidationError(f"unknown orientation {orientation!r}")
        if not self._closed:
            raise SceneValidationError(
                f"orientation {orientation!r} needs a closed surface; use cross/anticross"
            )
        us = np.linspace(*self.u_domain, 5)[1:-1]
        vs = np.linspace(*self.v_domain, 7)[1:-1]
        U, V = np.meshgrid(us, vs, indexing="ij")
        S, Su, Sv, *_ = self._raw_jet(U, V)
        n = _cross(Su, Sv)
        probe = self._outward_probe(S, U, V)
        agree = _dot(n, probe)
        if not (np.all(agree > 0.0) or np.all(agree < 0.0)):
            raise SceneValidationError("could not resolve outward orientation consistently")
        sign = 1.0 if agree.flat[0] > 0.0 else -1.0
        self.normal_sign = sign if orientation == "outward" else -sign


class Plane(ParametricSurface):
    """Flat patch origin + u e1 + v e2."""

    def __init__(self, origin=(0, 0, 0), e1=(1, 0, 0), e2=(0, 1, 0),
                 u_domain=(-1.0, 1.0), v_domain=(-1.0, 1.0), orientation="cross"):
        self.origin = np.asarray(origin, dtype=float)
        self.e1 = np.asarray(e1, dtype=float)
        self.e2 = np.asarray(e2, dtype=float)
        if np.linalg.norm(_cross(self.e1, self.e2)) < 1e-12:
            raise SceneValidationError("plane frame vectors are parallel")
        super().__init__(u_domain, v_domain, orientation)

    def _raw_jet(self, u, v):
        u, v = np.broadcast_arrays(u, v)
        S = self.origin + u[..., None] * self.e1 + v[..., None] * self.e2
        zeros = np.zeros_like(S)
        Su = np.broadcast_to(self.e1, S.shape)
        Sv = np.broadcast_to(self.e2, S.shape)
        return S, Su, Sv, zeros, zeros, zeros


class Sphere(ParametricSurface):
    """Sphere of radius r; chart (cos u cos v, sin u, cos u sin v) in a pole-aligned frame.

    ``pole_axis`` is the world direction of the chart poles (u = +/- pi/2).
    The u domain must stay strictly inside (-pi/2, pi/2); v is periodic.
    """

    v_periodic = True
    _closed = True

    def __init__(self, center=(0, 0, 0), radius=1.0, pole_axis=(0, 1, 0),
                 u_domain=(-1.37, 1.37), v_domain=(-np.pi, np.pi), orientation="outward"):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        if self.radius <= 0.0:
            raise SceneValidationError("sphere radius must be positive")
        pole = _unit(pole_axis, "pole_axis")
        helper = np.array([1.0, 0.0, 0.0]) if abs(pole[0]) < 0.9 else np.array([0.0, 0.0, 1.0])
        ex = _unit(_cross(helper, pole))
        ez = _cross(ex, pole)
        # columns: images of the local x, y (pole), z axes
        self._frame = np.stack([ex, pole, ez], axis=1)
        if not (-np.pi / 2 < u_domain[0] < u_domain[1] < np.pi / 2):
            raise SceneValidationError("sphere u domain must avoid the chart poles")
        super().__init__(u_domain, v_domain, orientation)

    def _raw_jet(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        cu, su, cv, sv = np.cos(u), np.sin(u), np.cos(v), np.sin(v)
        r = self.radius
        loc = _stack(cu * cv, su, cu * sv)
        loc_u = _stack(-su * cv, cu, -su * sv)
        loc_v = _stack(-cu * sv, np.zeros_like(u), cu * cv)
        loc_uu = -loc
        loc_uv = _stack(su * sv, np.zeros_like(u), -su * cv)
        loc_vv = _stack(-cu * cv, np.zeros_like(u), -cu * sv)
        F = self._frame.T
        out = [self.center + r * (loc @ F)] + [r * (g @ F) for g in (loc_u, loc_v, loc_uu, loc_uv, loc_vv)]
        return tuple(out)

    def _outward_probe(self, point, u, v):
        return point - self.center


class Ellipsoid(ParametricSurface):
    """Axis-aligned ellipsoid chart (a cos u cos v, b sin u, c cos u sin v) + center.

    Semi-axes may be negative, which mirrors the chart (the surface is the
    same point set with a different parameter orientation).
    """

    v_periodic = True
    _closed = True

    def __init__(self, semiaxes, center=(0, 0, 0),
                 u_domain=(-1.45, 1.45), v_domain=(-np.pi, np.pi), orientation="outward"):
        ax = np.asarray(semiaxes, dtype=float)
        if ax.shape != (3,) or np.any(ax == 0.0):
            raise SceneValidationError("ellipsoid needs three nonzero semi-axes")
        self.semiaxes = ax
        self.center = np.asarray(center, dtype=float)
        if not (-np.pi / 2 < u_domain[0] < u_domain[1] < np.pi / 2):
            raise SceneValidationError("ellipsoid u domain must avoid the chart poles")
        super().__init__(u_domain, v_domain, orientation)

    def _raw_jet(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        cu, su, cv, sv = np.cos(u), np.sin(u), np.cos(v), np.sin(v)
        a, b, c = self.semiaxes
        zero = np.zeros_like(u)
        S = self.center + _stack(a * cu * cv, b * su, c * cu * sv)
        Su = _stack(-a * su * cv, b * cu, -c * su * sv)
        Sv = _stack(-a * cu * sv, zero, c * cu * cv)
        Suu = _stack(-a * cu * cv, -b * su, -c * cu * sv)
        Suv = _stack(a * su * sv, zero, -c * su * cv)
        Svv = _stack(-a * cu * cv, zero, -c * cu * sv)
        return S, Su, Sv, Suu, Suv, Svv

    def _outward_probe(self, point, u, v):
        # gradient of the implicit form sum ((x_i - c_i)/a_i)^2
        return (point - self.center) / self.semiaxes**2


class Cylinder(ParametricSurface):
    """Circular cylinder S = center + (axis_scale u) axis + r (cos v e1 - sin v e2).

    ``axis_scale`` sets the axial length covered per unit of u, which matters
    to chart-dependent quantities (it rescales the u partial).
    """

    v_periodic = True
    _closed = True

    def __init__(self, radius, center=(0, 0, 0), axis=(0, 1, 0), e1=(1, 0, 0), e2=(0, 0, 1),
                 axis_scale=1.0, u_domain=(-1.0, 1.0), v_domain=(-np.pi, np.pi),
                 orientation="outward"):
        self.radius = float(radius)
        if self.radius <= 0.0:
            raise SceneValidationError("cylinder radius must be positive")
        self.center = np.asarray(center, dtype=float)
        self.axis = _unit(axis, "cylinder axis")
        self.e1 = _unit(e1, "cylinder e1")
        self.e2 = _unit(e2, "cylinder e2")
        self.axis_scale = float(axis_scale)
        if self.axis_scale == 0.0:
            raise SceneValidationError("axis_scale must be nonzero")
        for a, b in ((self.e1, self.e2), (self.e1, self.axis), (self.e2, self.axis)):
            if abs(a @ b) > 1e-12:
                raise SceneValidationError("cylinder frame must be orthogonal")
        super().__init__(u_domain, v_domain, orientation)

    def _raw_jet(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        cv, sv = np.cos(v), np.sin(v)
        r, k = self.radius, self.axis_scale
        radial = cv[..., None] * self.e1 - sv[..., None] * self.e2
        dradial = -sv[..., None] * self.e1 - cv[..., None] * self.e2
        S = self.center + k * u[..., None] * self.axis + r * radial
        Su = np.broadcast_to(k * self.axis, S.shape)
        Sv = r * dradial
        zeros = np.zeros_like(S)
        return S, Su, Sv, zeros, zeros, -r * radial

    def _outward_probe(self, point, u, v):
        d = point - self.center
        return d - (d @ self.axis)[..., None] * self.axis


class Torus(ParametricSurface):
    """Torus around ``axis``: ring radius R, tube radius r; both directions periodic."""

    u_periodic = True
    v_periodic = True
    _closed = True

    def __init__(self, major_radius, minor_radius, center=(0, 0, 0), axis=(0, 0, 1),
                 u_domain=(-np.pi, np.pi), v_domain=(-np.pi, np.pi), orientation="outward"):
        self.major_radius = float(major_radius)
        self.minor_radius = float(minor_radius)
        if not (self.major_radius > self.minor_radius > 0.0):
            raise SceneValidationError("torus needs R > r > 0")
        self.center = np.asarray(center, dtype=float)
        a = _unit(axis, "torus axis")
        helper = np.array([1.0, 0.0, 0.0]) if abs(a[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        e1 = _unit(_cross(helper, a))
        e2 = _cross(a, e1)
        self.axis, self.e1, self.e2 = a, e1, e2
        super().__init__(u_domain, v_domain, orientation)

    def _raw_jet(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        cu, su, cv, sv = np.cos(u), np.sin(u), np.cos(v), np.sin(v)
        R, r = self.major_radius, self.minor_radius
        ring = cv[..., None] * self.e1 + sv[..., None] * self.e2
        dring = -sv[..., None] * self.e1 + cv[..., None] * self.e2
        S = self.center + (R + r * cu)[..., None] * ring + (r * su)[..., None] * self.axis
        Su = (-r * su)[..., None] * ring + (r * cu)[..., None] * self.axis
        Sv = (R + r * cu)[..., None] * dring
        Suu = (-r * cu)[..., None] * ring + (-r * su)[..., None] * self.axis
        Suv = (-r * su)[..., None] * dring
        Svv = -((R + r * cu)[..., None]) * ring
        return S, Su, Sv, Suu, Suv, Svv

    def _outward_probe(self, point, u, v):
        d = point - self.center
        planar = d - (d @ self.axis)[..., None] * self.axis
        nrm = np.linalg.norm(planar, axis=-1, keepdims=True)
        ring = self.major_radius * planar / np.where(nrm == 0.0, 1.0, nrm)
        return d - ring


class SplinePatch(ParametricSurface):
    """Tensor-product B-spline patch defined by knots, degrees and a control net."""

    def __init__(self, u_knots, v_knots, control_points, degree_u=3, degree_v=3,
                 orientation="cross"):
        tu = np.asarray(u_knots, dtype=float)
        tv = np.asarray(v_knots, dtype=float)
        P = np.asarray(control_points, dtype=float)
        ku, kv = int(degree_u), int(degree_v)
        if P.ndim != 3 or P.shape[2] != 3:
            raise SceneValidationError("control net must have shape (nu, nv, 3)")
        if len(tu) != P.shape[0] + ku + 1 or len(tv) != P.shape[1] + kv + 1:
            raise SceneValidationError("knot counts must equal control count + degree + 1")
        self._spline = NdBSpline((tu, tv), P, k=(ku, kv))
        super().__init__(
            (tu[ku], tu[len(tu) - ku - 1]), (tv[kv], tv[len(tv) - kv - 1]), orientation
        )

    def _raw_jet(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        pts = np.stack([u, v], axis=-1)
        vals = [self._spline(pts, nu=orders) for orders in
                ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))]
        return tuple(np.asarray(x) for x in vals)


def eval_jet(surface: ParametricSurface, u, v, check_domain=True) -> SurfaceJet:
    """Evaluate the second-order jet; broadcasts over (u, v) arrays."""
    return surface.jet(u, v, check_domain=check_domain)


def shape_operator(jet: SurfaceJet) -> np.ndarray:
    """Weingarten matrix W in the tangent basis, convention [N_u N_v] = [S_u S_v] W.

    With this convention the outward-oriented unit sphere has W = I / r and
    the value <W d, d> for tangent coordinates d is the (sign-carrying)
    second fundamental form along d.
    """
    g11 = _dot(jet.du, jet.du)
    g12 = _dot(jet.du, jet.dv)
    g22 = _dot(jet.dv, jet.dv)
    G = np.stack(
        [np.stack([g11, g12], axis=-1), np.stack([g12, g22], axis=-1)], axis=-2
    )
    b11 = _dot(jet.du, jet.normal_du)
    b12 = _dot(jet.du, jet.normal_dv)
    b21 = _dot(jet.dv, jet.normal_du)
    b22 = _dot(jet.dv, jet.normal_dv)
    B = np.stack(
        [np.stack([b11, b12], axis=-1), np.stack([b21, b22], axis=-1)], axis=-2
    )
    return np.linalg.solve(G, B)
