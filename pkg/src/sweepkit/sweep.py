"""Sweep evaluation: a surface carried along a rigid trajectory.

Combines the surface jet with the trajectory jet into the data every
downstream computation needs: the moving point with its parameter and time
partials, the transported normal and its derivatives, the tangency value
f = <velocity, normal> with analytic partials, and the coordinates of the
velocity in the moving tangent basis.  The zero set of f in (u, v, t) is the
funnel: the preimage of the contact set.

Motion quantities are computed once per distinct time value, so fixed-time
grids pay for a single trajectory jet.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError
from .kinematics import Trajectory
from .surface import ParametricSurface

_TIME_SLACK = 1e-12


def _dot(a, b):
    return np.sum(a * b, axis=-1)


class SweepScene:
    """A surface swept along a trajectory over the unit time interval."""

    def __init__(self, surface: ParametricSurface, trajectory: Trajectory, name: str = ""):
        self.surface = surface
        self.trajectory = trajectory
        self.name = name or type(surface).__name__.lower() + "-sweep"
        self.time_domain = (0.0, 1.0)
        trajectory.validate()

    def _coarse_sample(self):
        (u0, u1), (v0, v1) = self.surface.u_domain, self.surface.v_domain
        U, V = np.meshgrid(np.linspace(u0, u1, 9), np.linspace(v0, v1, 9), indexing="ij")
        T = np.linspace(*self.time_domain, 9)[:, None]
        return evaluate(self, U.ravel(), V.ravel(), T)

    @cached_property
    def diameter(self) -> float:
        """Bounding-box diagonal of a coarse sample of the moving boundary."""
        pts = self._coarse_sample().point.reshape(-1, 3)
        return float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))

    @cached_property
    def velocity_scale(self) -> float:
        """Largest sampled speed, floored so stationary sweeps keep a scale."""
        speed = float(np.linalg.norm(self._coarse_sample().dt, axis=-1).max())
        return max(speed, 1e-3 * self.diameter)

    @property
    def funnel_tol(self) -> float:
        """Membership tolerance for refined funnel points."""
        return 1e-10 * self.velocity_scale

    @property
    def clearance_tol(self) -> float:
        """Signed-distance tolerance separating grazing contact from penetration."""
        return 1e-8 * self.diameter

    @property
    def trace_step(self) -> float:
        """Default marching step for contact-curve tracing."""
        return 0.01 * self.surface.domain_diagonal

    def contains_time(self, t) -> bool:
        t = np.asarray(t, dtype=float)
        t0, t1 = self.time_domain
        return bool(np.all((t >= t0 - _TIME_SLACK) & (t <= t1 + _TIME_SLACK)))


@dataclass(frozen=True)
class SweepEval:
    """Pointwise sweep data; every field broadcasts over the leading shape.

    ``funnel`` is f = <velocity, normal>, zero exactly where the moving
    surface is tangent to its own motion.  ``slide_u``/``slide_v`` are the
    coordinates of the velocity in the (du, dv) tangent basis from the
    least-squares Gram solve; the leftover component is funnel * normal
    exactly, so on the funnel the velocity is purely tangential.
    ``spin_vel`` is the angular-velocity matrix (rot_dt rot^T) applied to the
    velocity; ``normal_dt`` is the same matrix applied to the normal.
    """

    u: np.ndarray
    v: np.ndarray
    t: np.ndarray
    point: np.ndarray
    du: np.ndarray
    dv: np.ndarray
    dt: np.ndarray
    duu: np.ndarray
    duv: np.ndarray
    dvv: np.ndarray
    dut: np.ndarray
    dvt: np.ndarray
    dtt: np.ndarray
    normal: np.ndarray
    normal_du: np.ndarray
    normal_dv: np.ndarray
    normal_dt: np.ndarray
    spin_vel: np.ndarray
    funnel: np.ndarray
    funnel_du: np.ndarray
    funnel_dv: np.ndarray
    funnel_dt: np.ndarray
    slide_u: np.ndarray
    slide_v: np.ndarray
    cross_norm: np.ndarray

    @property
    def gradient(self) -> np.ndarray:
        """Gradient of the funnel value in (u, v, t), shape (..., 3)."""
        return np.stack([self.funnel_du, self.funnel_dv, self.funnel_dt], axis=-1)

    @property
    def sliding_velocity(self) -> np.ndarray:
        """Tangential part of the velocity, slide_u * du + slide_v * dv."""
        return self.slide_u[..., None] * self.du + self.slide_v[..., None] * self.dv


_VEC_FIELDS = (
    "point", "du", "dv", "dt", "duu", "duv", "dvv", "dut", "dvt", "dtt",
    "normal", "normal_du", "normal_dv", "normal_dt", "spin_vel",
)


def evaluate(scene: SweepScene, u, v, t, check_domain: bool = True) -> SweepEval:
    """Full sweep evaluation at broadcastable (u, v, t)."""
    u, v, t = np.broadcast_arrays(
        np.asarray(u, dtype=float), np.asarray(v, dtype=float), np.asarray(t, dtype=float)
    )
    if check_domain and not scene.contains_time(t):
        raise DomainError(f"time outside {scene.time_domain}")
    jet = scene.surface.jet(u, v, check_domain=check_domain)

    shape = t.shape
    n = int(t.size) if t.size else 0
    if n == 0:
        raise DomainError("empty evaluation request")

    def flat(x):
        return np.ascontiguousarray(np.broadcast_to(x, shape + (3,))).reshape(n, 3)

    S, Su, Sv = flat(jet.point), flat(jet.du), flat(jet.dv)
    Suu, Suv, Svv = flat(jet.duu), flat(jet.duv), flat(jet.dvv)
    N, Nu, Nv = flat(jet.normal), flat(jet.normal_du), flat(jet.normal_dv)

    out = {name: np.empty((n, 3)) for name in _VEC_FIELDS}
    tf = t.reshape(n)
    for tk in np.unique(tf):
        m = tf == tk
        mj = scene.trajectory.jet(float(tk))
        A, dA, ddA = mj.rot, mj.rot_dt, mj.rot_dtt
        spin = dA @ A.T
        out["point"][m] = S[m] @ A.T + mj.trans
        out["du"][m] = Su[m] @ A.T
        out["dv"][m] = Sv[m] @ A.T
        out["dt"][m] = S[m] @ dA.T + mj.trans_dt
        out["duu"][m] = Suu[m] @ A.T
        out["duv"][m] = Suv[m] @ A.T
        out["dvv"][m] = Svv[m] @ A.T
        out["dut"][m] = Su[m] @ dA.T
        out["dvt"][m] = Sv[m] @ dA.T
        out["dtt"][m] = S[m] @ ddA.T + mj.trans_dtt
        out["normal"][m] = N[m] @ A.T
        out["normal_du"][m] = Nu[m] @ A.T
        out["normal_dv"][m] = Nv[m] @ A.T
        out["normal_dt"][m] = out["normal"][m] @ spin.T
        out["spin_vel"][m] = out["dt"][m] @ spin.T

    f = _dot(out["dt"], out["normal"])
    f_u = _dot(out["dut"], out["normal"]) + _dot(out["dt"], out["normal_du"])
    f_v = _dot(out["dvt"], out["normal"]) + _dot(out["dt"], out["normal_dv"])
    f_t = _dot(out["dtt"], out["normal"]) + _dot(out["dt"], out["normal_dt"])

    # velocity coordinates in the tangent basis: 2x2 Gram solve in closed form
    g11 = _dot(out["du"], out["du"])
    g12 = _dot(out["du"], out["dv"])
    g22 = _dot(out["dv"], out["dv"])
    r1 = _dot(out["du"], out["dt"])
    r2 = _dot(out["dv"], out["dt"])
    det = g11 * g22 - g12 * g12  # equals cross_norm^2 > 0 by surface regularity
    slide_u = (g22 * r1 - g12 * r2) / det
    slide_v = (g11 * r2 - g12 * r1) / det

    def shaped(x):
        return x.reshape(shape + (3,)) if x.ndim == 2 else x.reshape(shape)

    return SweepEval(
        u=u, v=v, t=t,
        **{name: shaped(out[name]) for name in _VEC_FIELDS},
        funnel=shaped(f), funnel_du=shaped(f_u), funnel_dv=shaped(f_v), funnel_dt=shaped(f_t),
        slide_u=shaped(slide_u), slide_v=shaped(slide_v),
        cross_norm=np.broadcast_to(jet.cross_norm, shape).copy(),
    )


def sweep_map(scene: SweepScene, u, v, t, check_domain: bool = True) -> np.ndarray:
    """Position of surface point (u, v) at time t, shape (..., 3)."""
    u, v, t = np.broadcast_arrays(
        np.asarray(u, dtype=float), np.asarray(v, dtype=float), np.asarray(t, dtype=float)
    )
    if check_domain and not scene.contains_time(t):
        raise DomainError(f"time outside {scene.time_domain}")
    jet = scene.surface.jet(u, v, check_domain=check_domain)
    shape = t.shape
    n = int(t.size)
    S = np.ascontiguousarray(np.broadcast_to(jet.point, shape + (3,))).reshape(n, 3)
    out = np.empty((n, 3))
    tf = t.reshape(n)
    for tk in np.unique(tf):
        m = tf == tk
        mj = scene.trajectory.jet(float(tk))
        out[m] = S[m] @ mj.rot.T + mj.trans
    return out.reshape(shape + (3,))


def extended_sweep(scene: SweepScene, u, v, t, check_domain: bool = True) -> np.ndarray:
    """Graph-space image (position, t), shape (..., 4)."""
    u, v, t = np.broadcast_arrays(
        np.asarray(u, dtype=float), np.asarray(v, dtype=float), np.asarray(t, dtype=float)
    )
    pos = sweep_map(scene, u, v, t, check_domain=check_domain)
    return np.concatenate([pos, t[..., None]], axis=-1)


def jacobian(scene: SweepScene, u, v, t, check_domain: bool = True) -> np.ndarray:
    """Matrix with columns (du, dv, dt), shape (..., 3, 3).

    Its determinant equals normal_sign * cross_norm * funnel, so it drops
    rank exactly on the funnel.
    """
    ev = evaluate(scene, u, v, t, check_domain=check_domain)
    return np.stack([ev.du, ev.dv, ev.dt], axis=-1)
