"""Rigid-motion trajectories and their time jets.

A trajectory assigns to each time t in [0, 1] a rigid motion (A(t), b(t)),
acting on points as x -> A(t) x + b(t), with A(t) a rotation matrix and
A(0) = I, b(0) = 0.  Every catalog trajectory is twice continuously
differentiable in t; sampling one yields a :class:`MotionJet` carrying
(A, b) together with first and second time derivatives, which is exactly
what the downstream contact computations consume.

The catalog covers axis rotations with polynomial angle profiles, straight
and circular-arc translations, cubic-spline translations through waypoints,
screws, quaternion-spline keyframe motions, and products of any of these.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import SceneValidationError

# Orthogonality / skewness residuals larger than this fail validation.
_ROT_TOL = 1e-9


def _hat(w: np.ndarray) -> np.ndarray:
    """Skew-symmetric cross-product matrix of a 3-vector."""
    wx, wy, wz = w
    return np.array([[0.0, -wz, wy], [wz, 0.0, -wx], [-wy, wx, 0.0]])


def _unit(v, name="vector"):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise SceneValidationError(f"{name} must be nonzero")
    return v / n


@dataclass(frozen=True)
class MotionJet:
    """Second-order time jet of a rigid motion at a fixed time.

    Attributes
    ----------
    t : float
        Sample time.
    rot, trans : ndarray
        Rotation matrix A(t) (3x3) and translation b(t) (3,).
    rot_dt, trans_dt : ndarray
        First time derivatives A'(t), b'(t).
    rot_dtt, trans_dtt : ndarray
        Second time derivatives A''(t), b''(t).
    """

    t: float
    rot: np.ndarray
    trans: np.ndarray
    rot_dt: np.ndarray
    trans_dt: np.ndarray
    rot_dtt: np.ndarray
    trans_dtt: np.ndarray

    def transform(self, x: np.ndarray) -> np.ndarray:
        """Image A x + b of a point (or (..., 3) stack of points)."""
        x = np.asarray(x, dtype=float)
        return x @ self.rot.T + self.trans

    def velocity(self, x: np.ndarray) -> np.ndarray:
        """Velocity A' x + b' of the material point currently at body position x."""
        x = np.asarray(x, dtype=float)
        return x @ self.rot_dt.T + self.trans_dt

    def acceleration(self, x: np.ndarray) -> np.ndarray:
        """Acceleration A'' x + b'' of the material point at body position x."""
        x = np.asarray(x, dtype=float)
        return x @ self.rot_dtt.T + self.trans_dtt

    def spin(self) -> np.ndarray:
        """Instantaneous spin tensor A' A^T (skew-symmetric)."""
        return self.rot_dt @ self.rot.T

    def orthogonality_residual(self) -> float:
        """max(|A^T A - I|, |skew defect of A' A^T|), for validation."""
        sk = self.spin()
        return max(
            float(np.abs(self.rot.T @ self.rot - np.eye(3)).max()),
            float(np.abs(sk + sk.T).max()),
        )


class Trajectory:
    """Base class for rigid-motion trajectories on t in [0, 1]."""

    #: True when A(t) = I for all t (pure translation).
    is_translation = False

    def _parts(self, t: float):
        """Return (A, b, dA, db, ddA, ddb) at time t."""
        raise NotImplementedError

    def jet(self, t: float) -> MotionJet:
        A, b, dA, db, ddA, ddb = self._parts(float(t))
        return MotionJet(float(t), A, b, dA, db, ddA, ddb)

    def validate(self, times=(0.0, 0.31, 0.5, 0.77, 1.0)) -> None:
        """Check A(0) = I, b(0) = 0 and the rotation-group residuals at sample times."""
        j0 = self.jet(0.0)
        if np.abs(j0.rot - np.eye(3)).max() > _ROT_TOL or np.abs(j0.trans).max() > _ROT_TOL:
            raise SceneValidationError("trajectory must start at the identity motion")
        for t in times:
            j = self.jet(t)
            if j.orthogonality_residual() > 1e-6:
                raise SceneValidationError(f"trajectory leaves the rigid-motion group at t={t}")
            if np.linalg.det(j.rot) < 0.0:
                raise SceneValidationError(f"orientation-reversing motion at t={t}")


class Identity(Trajectory):
    """The motionless trajectory; useful as a degenerate-sweep probe."""

    is_translation = True

    def _parts(self, t):
        z3 = np.zeros(3)
        zm = np.zeros((3, 3))
        return np.eye(3), z3, zm, z3, zm, z3


def _poly_val_d1_d2(coeffs, t):
    """Value/first/second derivative of sum_k c_k t^k with c_0 = 0 implied."""
    p = np.polynomial.Polynomial([0.0, *coeffs])
    return float(p(t)), float(p.deriv(1)(t)), float(p.deriv(2)(t))


class AxisRotation(Trajectory):
    """Rotation about a fixed axis line with a polynomial angle profile.

    Parameters
    ----------
    axis : (3,) array_like
        Axis direction (normalized internally).
    angle : float
        Total angle reached at t = 1 when ``angle_poly`` is not given
        (linear profile angle * t).
    point : (3,) array_like, optional
        A point on the axis line; default passes through the origin.
    angle_poly : sequence of float, optional
        Coefficients (c1, c2, ...) of angle(t) = sum c_k t^k; overrides ``angle``.
    """

    def __init__(self, axis, angle=None, point=(0.0, 0.0, 0.0), angle_poly=None):
        self.axis = _unit(axis, "rotation axis")
        if angle_poly is None:
            if angle is None:
                raise SceneValidationError("rotation needs an angle or an angle_poly")
            angle_poly = [float(angle)]
        self.angle_poly = [float(c) for c in angle_poly]
        self.point = np.asarray(point, dtype=float)
        self._K = _hat(self.axis)

    def _parts(self, t):
        phi, dphi, ddphi = _poly_val_d1_d2(self.angle_poly, t)
        K = self._K
        A = np.eye(3) + np.sin(phi) * K + (1.0 - np.cos(phi)) * (K @ K)
        # K commutes with A, so the chain rule stays this tidy.
        dA = dphi * K @ A
        ddA = ddphi * K @ A + dphi * dphi * K @ K @ A
        p = self.point
        b = p - A @ p
        db = -dA @ p
        ddb = -ddA @ p
        return A, b, dA, db, ddA, ddb


class LineTranslation(Trajectory):
    """Straight-line translation b(t) = s(t) * direction, s a polynomial with s(0) = 0."""

    is_translation = True

    def __init__(self, velocity=None, direction=None, profile_poly=None):
        if velocity is not None:
            v = np.asarray(velocity, dtype=float)
            self.direction = _unit(v, "translation velocity")
            self.profile_poly = [float(np.linalg.norm(v))]
        else:
            self.direction = _unit(direction, "translation direction")
            self.profile_poly = [float(c) for c in (profile_poly or [1.0])]

    def _parts(self, t):
        s, ds, dds = _poly_val_d1_d2(self.profile_poly, t)
        zm = np.zeros((3, 3))
        d = self.direction
        return np.eye(3), s * d, zm, ds * d, zm, dds * d


class ArcTranslation(Trajectory):
    """Translation along a circular arc, starting at the origin with zero phase shift.

    b(t) = radius * [(cos(phase + angle*t) - cos(phase)) e1
                     + (sin(phase + angle*t) - sin(phase)) e2]
    """

    is_translation = True

    def __init__(self, radius, angle, phase=0.0, e1=(1.0, 0.0, 0.0), e2=(0.0, 1.0, 0.0)):
        self.radius = float(radius)
        self.angle = float(angle)
        self.phase = float(phase)
        self.e1 = _unit(e1, "arc axis e1")
        self.e2 = _unit(e2, "arc axis e2")
        if abs(self.e1 @ self.e2) > 1e-12:
            raise SceneValidationError("arc frame vectors must be orthogonal")

    def _parts(self, t):
        R, w = self.radius, self.angle
        a = self.phase + w * t
        zm = np.zeros((3, 3))
        b = R * ((np.cos(a) - np.cos(self.phase)) * self.e1 + (np.sin(a) - np.sin(self.phase)) * self.e2)
        db = R * w * (-np.sin(a) * self.e1 + np.cos(a) * self.e2)
        ddb = R * w * w * (-np.cos(a) * self.e1 - np.sin(a) * self.e2)
        return np.eye(3), b, zm, db, zm, ddb


class SplineTranslation(Trajectory):
    """Translation along a C2 cubic spline through waypoints; the first waypoint must be 0."""

    is_translation = True

    def __init__(self, waypoints, times=None):
        pts = np.asarray(waypoints, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) < 2:
            raise SceneValidationError("spline path needs at least two 3d waypoints")
        if np.abs(pts[0]).max() > 0.0:
            raise SceneValidationError("spline path must start at the origin (b(0) = 0)")
        if times is None:
            times = np.linspace(0.0, 1.0, len(pts))
        times = np.asarray(times, dtype=float)
        self._sp = CubicSpline(times, pts, axis=0, bc_type="natural")
        self._d1 = self._sp.derivative(1)
        self._d2 = self._sp.derivative(2)

    def _parts(self, t):
        zm = np.zeros((3, 3))
        return np.eye(3), self._sp(t), zm, self._d1(t), zm, self._d2(t)


class Screw(Trajectory):
    """Rotation about an axis line combined with translation along it.

    ``pitch`` is the axial advance per full turn.
    """

    def __init__(self, axis, angle, pitch, point=(0.0, 0.0, 0.0), angle_poly=None):
        self._rot = AxisRotation(axis, angle, point, angle_poly)
        self.pitch = float(pitch)

    def _parts(self, t):
        A, b, dA, db, ddA, ddb = self._rot._parts(t)
        phi, dphi, ddphi = _poly_val_d1_d2(self._rot.angle_poly, t)
        k = self.pitch / (2.0 * np.pi) * self._rot.axis
        return A, b + phi * k, dA, db + dphi * k, ddA, ddb + ddphi * k


def _quat_pair_matrix(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Symmetric bilinear form B(p, q) with B(q, q) the rotation matrix of a unit quaternion q.

    Obtained by polarizing each (homogeneous quadratic) entry of the standard
    quaternion rotation matrix, so exact derivatives of R(q(t)) reduce to
    B evaluated on derivative pairs: R' = 2 B(q, q'), R'' = 2 B(q', q') + 2 B(q, q'').
    """
    pw, px, py, pz = p
    qw, qx, qy, qz = q

    def s(a, b, c, d):  # polarization of the monomial a*b
        return 0.5 * (a * d + b * c)

    ww, xx, yy, zz = pw * qw, px * qx, py * qy, pz * qz
    xy = s(px, py, qx, qy)
    xz = s(px, pz, qx, qz)
    yz = s(py, pz, qy, qz)
    wx = s(pw, px, qw, qx)
    wy = s(pw, py, qw, qy)
    wz = s(pw, pz, qw, qz)
    return np.array(
        [
            [ww + xx - yy - zz, 2.0 * (xy - wz), 2.0 * (xz + wy)],
            [2.0 * (xy + wz), ww - xx + yy - zz, 2.0 * (yz - wx)],
            [2.0 * (xz - wy), 2.0 * (yz + wx), ww - xx - yy + zz],
        ]
    )


class KeyframeTrajectory(Trajectory):
    """C2 motion through orientation/position keyframes.

    Orientations are given as quaternions (w, x, y, z); components are
    interpolated with a cubic spline, renormalized to the unit sphere at
    evaluation time (which keeps A(t) exactly orthogonal), and the
    renormalization is differentiated exactly so the jet derivatives are the
    true derivatives of the orthogonal path.  Positions use an independent
    cubic spline.  The first keyframe must be the identity motion.
    """

    def __init__(self, quaternions, translations, times=None):
        Q = np.asarray(quaternions, dtype=float)
        T = np.asarray(translations, dtype=float)
        if Q.ndim != 2 or Q.shape[1] != 4 or len(Q) < 2:
            raise SceneValidationError("need at least two quaternion keyframes (w, x, y, z)")
        if T.shape != (len(Q), 3):
            raise SceneValidationError("translation keyframes must match quaternion count")
        norms = np.linalg.norm(Q, axis=1)
        if np.any(norms < 1e-12):
            raise SceneValidationError("zero quaternion keyframe")
        Q = Q / norms[:, None]
        # Keep the spline on one hemisphere: flip signs for shortest-path continuity.
        for i in range(1, len(Q)):
            if Q[i] @ Q[i - 1] < 0.0:
                Q[i] = -Q[i]
        ident = np.array([1.0, 0.0, 0.0, 0.0])
        if min(np.abs(Q[0] - ident).max(), np.abs(Q[0] + ident).max()) > 1e-9 or np.abs(T[0]).max() > 1e-9:
            raise SceneValidationError("keyframe trajectory must start at the identity motion")
        if times is None:
            times = np.linspace(0.0, 1.0, len(Q))
        times = np.asarray(times, dtype=float)
        self._q = CubicSpline(times, Q, axis=0, bc_type="natural")
        self._dq = self._q.derivative(1)
        self._ddq = self._q.derivative(2)
        self._b = CubicSpline(times, T, axis=0, bc_type="natural")
        self._db = self._b.derivative(1)
        self._ddb = self._b.derivative(2)

    def _parts(self, t):
        q, dq, ddq = self._q(t), self._dq(t), self._ddq(t)
        n = np.linalg.norm(q)
        u = q / n
        qdq = q @ dq
        du = dq / n - q * (qdq / n**3)
        ddu = (
            ddq / n
            - (2.0 * dq * qdq + q * (dq @ dq + q @ ddq)) / n**3
            + 3.0 * q * (qdq * qdq) / n**5
        )
        A = _quat_pair_matrix(u, u)
        dA = 2.0 * _quat_pair_matrix(u, du)
        ddA = 2.0 * (_quat_pair_matrix(du, du) + _quat_pair_matrix(u, ddu))
        return A, self._b(t), dA, self._db(t), ddA, self._ddb(t)


class Compose(Trajectory):
    """Product of trajectories, applied right to left (the last part acts first)."""

    def __init__(self, parts):
        parts = list(parts)
        if not parts:
            raise SceneValidationError("compose needs at least one part")
        self.trajectories = parts

    @property
    def is_translation(self):
        return all(p.is_translation for p in self.trajectories)

    def _parts(self, t):
        A, b, dA, db, ddA, ddb = self.trajectories[-1]._parts(t)
        for outer in reversed(self.trajectories[:-1]):
            A1, b1, dA1, db1, ddA1, ddb1 = outer._parts(t)
            ddA_n = ddA1 @ A + 2.0 * dA1 @ dA + A1 @ ddA
            ddb_n = ddA1 @ b + 2.0 * dA1 @ db + A1 @ ddb + ddb1
            dA_n = dA1 @ A + A1 @ dA
            db_n = dA1 @ b + A1 @ db + db1
            A, b = A1 @ A + 0.0, A1 @ b + b1
            dA, db, ddA, ddb = dA_n, db_n, ddA_n, ddb_n
        return A, b, dA, db, ddA, ddb


# ---------------------------------------------------------------------------
# Operations


def sample_motion(trajectory: Trajectory, t: float) -> MotionJet:
    """Jet of the motion at time t."""
    return trajectory.jet(t)


def inverse_motion(trajectory: Trajectory, t: float) -> MotionJet:
    """Jet of the inverse motion h(t)^-1 = (A^T, -A^T b), differentiated in t."""
    j = trajectory.jet(t)
    A, b, dA, db, ddA, ddb = j.rot, j.trans, j.rot_dt, j.trans_dt, j.rot_dtt, j.trans_dtt
    return MotionJet(
        j.t,
        A.T,
        -A.T @ b,
        dA.T,
        -dA.T @ b - A.T @ db,
        ddA.T,
        -ddA.T @ b - 2.0 * dA.T @ db - A.T @ ddb,
    )


def point_trajectory(trajectory: Trajectory, x, t: float):
    """Position, velocity and acceleration of body point x at time t."""
    j = trajectory.jet(t)
    x = np.asarray(x, dtype=float)
    return j.transform(x), j.velocity(x), j.acceleration(x)


def rebased_jet(trajectory: Trajectory, t0: float, t: float) -> MotionJet:
    """Jet at time t of the trajectory re-based to be the identity at t0.

    The re-based motion is g(t) = h(t) h(t0)^-1; it moves the time-t0
    placement of the solid exactly as the original sweep does.
    """
    j0 = trajectory.jet(t0)
    R0 = j0.rot.T
    c0 = -j0.rot.T @ j0.trans
    j = trajectory.jet(t)
    return MotionJet(
        j.t,
        j.rot @ R0,
        j.rot @ c0 + j.trans,
        j.rot_dt @ R0,
        j.rot_dt @ c0 + j.trans_dt,
        j.rot_dtt @ R0,
        j.rot_dtt @ c0 + j.trans_dtt,
    )


def inverse_point_trajectory(trajectory: Trajectory, x, t0: float, t: float):
    """Inverse trajectory of space point x in the frame re-based at t0.

    Returns (y, dy, ddy) of y(t) = G(t)^T (x - g(t)) for the re-based motion
    (G, g); y(t) is where the material that will sit at x at time t currently
    is.  At t = t0 the identities dy = -d(forward), ddy = -dd(forward)
    + 2 G'(t0) d(forward) hold.
    """
    g = rebased_jet(trajectory, t0, t)
    x = np.asarray(x, dtype=float)
    d = x - g.trans
    y = g.rot.T @ d
    dy = g.rot_dt.T @ d - g.rot.T @ g.trans_dt
    ddy = g.rot_dtt.T @ d - 2.0 * g.rot_dt.T @ g.trans_dt - g.rot.T @ g.trans_dtt
    return y, dy, ddy
