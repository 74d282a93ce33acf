"""Procedural envelope faces: seed spline plus Newton-exact evaluation.

A face of the contact set is parametrized in two stages.  A coarse seed
spline gamma(p, t) = (ubar, vbar) is fitted through traced contact curves,
with p the normalized arclength along each fixed-time curve and slice starts
aligned by nearest-point continuation.  An exact evaluation then solves, by
damped Newton iteration seeded at gamma(p, t),

    f(u, v, t) = 0
    <sigma(u, v, t) - sigma(gamma(p, t), t), d sigma(gamma)/dp> = 0

so the returned point lies on the true contact set while the plane condition
pins it to the normal plane of the seed's iso-t curve.  The seed only has to
be good enough to start Newton; evaluation accuracy does not depend on it.

The p chart is rebuilt from a dense fixed-size resampling of the traced
curve (two rounds, each re-projected onto the funnel), which makes the chart
a property of the curve rather than of the tracing step or the knot count.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .errors import (
    ConvergenceError,
    CurvatureDegeneracyError,
    DomainError,
    SeedNotFoundError,
    TopologyChangeError,
)
from .funnel import FunnelPoint, trace_components
from .surface import shape_operator
from .sweep import SweepScene, evaluate

_DENSE = 512          # reference resolution of the arclength chart
_DOMAIN_SLACK = 1e-9


@dataclass(frozen=True)
class SeedSurface:
    """Spline map (p, t) -> (ubar, vbar) through refitted contact curves."""

    spline_u: object
    spline_v: object
    p_knots: np.ndarray
    t_knots: np.ndarray
    closed: bool
    residual_max: float
    residual_rms: float

    def eval(self, p, t, dp: int = 0, dt: int = 0):
        """Chart values or partial derivatives at scalar (p, t)."""
        return (
            float(self.spline_u.ev(p, t, dx=dp, dy=dt)),
            float(self.spline_v.ev(p, t, dx=dp, dy=dt)),
        )


@dataclass(frozen=True)
class ProceduralEnvelope:
    """A seeded face with the Newton settings used to evaluate it exactly."""

    scene: SweepScene
    seed: SeedSurface
    tol_factor: float = 1e-12
    max_iter: int = 50

    @property
    def p_domain(self):
        return float(self.seed.p_knots[0]), float(self.seed.p_knots[-1])

    @property
    def t_domain(self):
        return float(self.seed.t_knots[0]), float(self.seed.t_knots[-1])


@dataclass(frozen=True)
class EnvelopeJet:
    """One converged envelope evaluation; derivatives filled on request."""

    p: float
    t: float
    u: float
    v: float
    point: np.ndarray
    normal: np.ndarray
    residual_f: float
    residual_plane: float
    iterations: int
    d_p: np.ndarray | None = None
    d_t: np.ndarray | None = None


@dataclass(frozen=True)
class AssumptionReport:
    """Crossing counts of seed normal planes with traced contact curves."""

    checked: int
    violations: tuple


def _batch_refine(scene, us, vs, t, max_iter: int = 12):
    """Project arrays of (u, v) onto the fixed-t funnel slice by Newton."""
    us = np.array(us, dtype=float)
    vs = np.array(vs, dtype=float)
    for _ in range(max_iter):
        ev = evaluate(scene, us, vs, t, check_domain=False)
        f = np.asarray(ev.funnel)
        if np.all(np.abs(f) <= scene.funnel_tol):
            return us, vs
        fu = np.asarray(ev.funnel_du)
        fv = np.asarray(ev.funnel_dv)
        g2 = fu * fu + fv * fv
        step = np.where(g2 > 0.0, f / np.where(g2 > 0.0, g2, 1.0), 0.0)
        us = us - step * fu
        vs = vs - step * fv
    raise ConvergenceError(
        f"could not project resampled curve onto the funnel at t={float(t):.6g}"
    )


def _arc_resample(scene, params, t, n_out):
    """Resample a funnel polyline to n_out points uniform in space arclength."""
    ev = evaluate(scene, params[:, 0], params[:, 1], t, check_domain=False)
    img = np.asarray(ev.point)
    seg = np.linalg.norm(np.diff(img, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    targets = np.linspace(0.0, float(s[-1]), n_out)
    u = np.interp(targets, s, params[:, 0])
    v = np.interp(targets, s, params[:, 1])
    u, v = _batch_refine(scene, u, v, t)
    return np.column_stack([u, v])


def _closure_shift(surf, params):
    """Period vector carrying the end of a closed param polyline to its start."""
    shift = np.zeros(2)
    for axis, (periodic, dom) in enumerate(
        ((surf.u_periodic, surf.u_domain), (surf.v_periodic, surf.v_domain))
    ):
        if periodic:
            period = dom[1] - dom[0]
            shift[axis] = period * np.round((params[-1, axis] - params[0, axis]) / period)
    return shift


def _images(scene, params, t):
    ev = evaluate(scene, params[:, 0], params[:, 1], t, check_domain=False)
    return np.asarray(ev.point)


def _pick_component(curves, component, prev_images):
    if prev_images is None:
        if component >= len(curves):
            raise ValueError(
                f"scene slice has {len(curves)} component(s); index {component} requested"
            )
        return curves[component]
    best, best_d = None, np.inf
    probe = prev_images[:: max(1, len(prev_images) // 16)]
    for c in curves:
        img = c.image[:: max(1, len(c) // 16)]
        d = np.linalg.norm(img[:, None, :] - probe[None, :, :], axis=-1).min()
        if d < best_d:
            best, best_d = c, d
    return best


def _canonical_slice(scene, curve, per_slice, prev_params, prev_images):
    """Dense arclength chart of one slice, aligned to the previous slice.

    Returns (knot_params, knot_images) with per_slice rows for open curves
    and per_slice + 1 for closed ones (the seam repeated one period over).
    """
    surf = scene.surface
    t = curve.t
    pts = curve.params
    if curve.closed:
        pts = np.vstack([pts, pts[0] + _closure_shift(surf, pts)])
    dense = _arc_resample(scene, pts, t, _DENSE + 1)
    dense = _arc_resample(scene, dense, t, _DENSE + 1)
    img = _images(scene, dense, t)

    if prev_images is not None:
        anchor = prev_images[0]
        if curve.closed:
            core, icore = dense[:-1], img[:-1]
            seam = _closure_shift(surf, dense)
            k = int(np.argmin(np.linalg.norm(icore - anchor, axis=1)))
            dense = np.vstack([core[k:], core[:k] + seam])
            img = np.vstack([icore[k:], icore[:k]])
            dense = np.vstack([dense, dense[0] + seam])
            img = np.vstack([img, img[0]])
            fwd = img[1] - img[0]
            prev_fwd = prev_images[1] - prev_images[0]
            if float(np.dot(fwd, prev_fwd)) < 0.0:
                dense, img = dense[::-1], img[::-1]
        else:
            if np.linalg.norm(img[0] - anchor) > np.linalg.norm(img[-1] - anchor):
                dense, img = dense[::-1], img[::-1]

    n_knots = per_slice + 1 if curve.closed else per_slice
    knots = _arc_resample(scene, dense, t, n_knots)
    if curve.closed:
        knots[-1] = knots[0] + _closure_shift(surf, knots)

    if prev_params is not None:
        for axis, (periodic, dom) in enumerate(
            ((surf.u_periodic, surf.u_domain), (surf.v_periodic, surf.v_domain))
        ):
            if periodic:
                period = dom[1] - dom[0]
                knots[:, axis] += period * np.round(
                    (prev_params[0, axis] - knots[0, axis]) / period
                )
    return knots, _images(scene, knots, t)


def build_seed(scene: SweepScene, nt: int = 8, per_slice: int = 32,
               component: int = 0, t_range=None) -> SeedSurface:
    """Fit the seed spline through nt traced slices of per_slice points each.

    ``t_range`` restricts the face to a time window, which is how a face
    between two singular slices of the sweep is parametrized.  A change in
    the number of traced components across slices raises TopologyChangeError;
    faces only exist where the slice topology is stable.
    """
    if nt < 2:
        raise ValueError("seed needs at least 2 time slices")
    if per_slice < 4:
        raise ValueError("seed needs at least 4 points per slice")
    t0, t1 = t_range if t_range is not None else scene.time_domain
    ts = np.linspace(float(t0), float(t1), nt)
    rows = []
    images = None
    params = None
    closed = None
    count = None
    for t in ts:
        curves = trace_components(scene, float(t))
        if not curves:
            raise SeedNotFoundError(f"no contact curves at t={float(t):.6g}")
        if count is None:
            count = len(curves)
        elif len(curves) != count:
            raise TopologyChangeError(
                f"component count changed from {count} to {len(curves)} at t={float(t):.6g}"
            )
        curve = _pick_component(curves, component, images)
        if closed is None:
            closed = curve.closed
        elif curve.closed != closed:
            raise TopologyChangeError(
                f"contact curve changed between closed and open at t={float(t):.6g}"
            )
        params, images = _canonical_slice(scene, curve, per_slice, params, images)
        rows.append(params)
    grid = np.stack(rows)                      # (nt, n_knots, 2)
    n_knots = grid.shape[1]
    p_knots = np.linspace(0.0, 1.0, n_knots)
    kx = min(3, n_knots - 1)
    ky = min(3, nt - 1)
    spline_u = RectBivariateSpline(p_knots, ts, grid[:, :, 0].T, kx=kx, ky=ky, s=0)
    spline_v = RectBivariateSpline(p_knots, ts, grid[:, :, 1].T, kx=kx, ky=ky, s=0)
    res = np.abs(_knot_residuals(scene, spline_u, spline_v, p_knots, ts))
    return SeedSurface(
        spline_u=spline_u,
        spline_v=spline_v,
        p_knots=p_knots,
        t_knots=ts,
        closed=bool(closed),
        residual_max=float(res.max()),
        residual_rms=float(np.sqrt(np.mean(res ** 2))),
    )


def _knot_residuals(scene, spline_u, spline_v, p_knots, ts):
    out = []
    for t in ts:
        u = spline_u.ev(p_knots, np.full_like(p_knots, t))
        v = spline_v.ev(p_knots, np.full_like(p_knots, t))
        out.append(np.asarray(evaluate(scene, u, v, float(t), check_domain=False).funnel))
    return np.concatenate(out)


def build_envelope(scene: SweepScene, nt: int = 8, per_slice: int = 32,
                   component: int = 0, t_range=None) -> ProceduralEnvelope:
    """Convenience: seed the scene and wrap it with default Newton settings."""
    return ProceduralEnvelope(scene=scene, seed=build_seed(
        scene, nt=nt, per_slice=per_slice, component=component, t_range=t_range))


def _check_domain(env, p, t):
    (p0, p1), (t0, t1) = env.p_domain, env.t_domain
    sp = _DOMAIN_SLACK * (p1 - p0)
    st = _DOMAIN_SLACK * max(t1 - t0, 1.0)
    if not (p0 - sp <= p <= p1 + sp) or not (t0 - st <= t <= t1 + st):
        raise DomainError(
            f"(p, t) = ({p:.6g}, {t:.6g}) outside seed domain "
            f"[{p0:.6g}, {p1:.6g}] x [{t0:.6g}, {t1:.6g}]"
        )


def eval_envelope(env: ProceduralEnvelope, p, t) -> EnvelopeJet:
    """Exact envelope point at (p, t) by damped Newton from the seed."""
    p, t = float(p), float(t)
    _check_domain(env, p, t)
    scene = env.scene
    ub, vb = env.seed.eval(p, t)
    ub_p, vb_p = env.seed.eval(p, t, dp=1)
    base = evaluate(scene, ub, vb, t, check_domain=False)
    w = ub_p * np.asarray(base.du) + vb_p * np.asarray(base.dv)
    wn = float(np.linalg.norm(w))
    if wn == 0.0:
        raise ConvergenceError(f"seed tangent vanishes at (p, t) = ({p:.6g}, {t:.6g})")
    what = w / wn
    pbar = np.asarray(base.point)
    ftol = env.tol_factor * scene.velocity_scale
    ptol = env.tol_factor * scene.diameter

    def merit(ev):
        r1 = float(ev.funnel)
        r2 = float(np.dot(np.asarray(ev.point) - pbar, what))
        return r1, r2, np.hypot(r1 / scene.velocity_scale, r2 / scene.diameter)

    u, v = float(ub), float(vb)
    ev = base
    r1, r2, m = merit(ev)
    iterations = 0
    for _ in range(env.max_iter):
        if abs(r1) <= ftol and abs(r2) <= ptol:
            return EnvelopeJet(p=p, t=t, u=u, v=v, point=np.asarray(ev.point),
                               normal=np.asarray(ev.normal), residual_f=abs(r1),
                               residual_plane=abs(r2), iterations=iterations)
        jac = np.array([
            [float(ev.funnel_du), float(ev.funnel_dv)],
            [float(np.dot(ev.du, what)), float(np.dot(ev.dv, what))],
        ])
        try:
            step = np.linalg.solve(jac, [-r1, -r2])
        except np.linalg.LinAlgError:
            err = ConvergenceError(
                f"normal plane tangent to the contact curve at (p, t) = ({p:.6g}, {t:.6g})"
            )
            err.last = (u, v)
            raise err
        scale = 1.0
        for _ in range(8):
            cu, cv = u + scale * float(step[0]), v + scale * float(step[1])
            cev = evaluate(scene, cu, cv, t, check_domain=False)
            c1, c2, cm = merit(cev)
            if cm < m:
                break
            scale *= 0.5
        u, v, ev, (r1, r2, m) = cu, cv, cev, (c1, c2, cm)
        iterations += 1
    if abs(r1) <= ftol and abs(r2) <= ptol:
        return EnvelopeJet(p=p, t=t, u=u, v=v, point=np.asarray(ev.point),
                           normal=np.asarray(ev.normal), residual_f=abs(r1),
                           residual_plane=abs(r2), iterations=iterations)
    err = ConvergenceError(
        f"envelope evaluation did not converge at (p, t) = ({p:.6g}, {t:.6g})"
    )
    err.last = (u, v)
    raise err


def eval_envelope_derivative(env: ProceduralEnvelope, p, t, which: str) -> np.ndarray:
    """First derivative of the envelope map, from the implicit system.

    Differentiating both defining equations with respect to p (or t) gives a
    2x2 linear system for the chart sensitivities (u_p, v_p); the space
    derivative follows by the chain rule.  ``which`` selects "p" or "t".
    """
    if which not in ("p", "t"):
        raise ValueError("which must be 'p' or 't'")
    p, t = float(p), float(t)
    jet = eval_envelope(env, p, t)
    scene = env.scene
    ev = evaluate(scene, jet.u, jet.v, t, check_domain=False)
    ub, vb = env.seed.eval(p, t)
    ub_p, vb_p = env.seed.eval(p, t, dp=1)
    base = evaluate(scene, ub, vb, t, check_domain=False)
    du_b, dv_b = np.asarray(base.du), np.asarray(base.dv)
    w = ub_p * du_b + vb_p * dv_b
    d = np.asarray(ev.point) - np.asarray(base.point)
    jac = np.array([
        [float(ev.funnel_du), float(ev.funnel_dv)],
        [float(np.dot(ev.du, w)), float(np.dot(ev.dv, w))],
    ])
    if which == "p":
        ub_pp, vb_pp = env.seed.eval(p, t, dp=2)
        w_p = (ub_pp * du_b + vb_pp * dv_b
               + ub_p * ub_p * np.asarray(base.duu)
               + 2.0 * ub_p * vb_p * np.asarray(base.duv)
               + vb_p * vb_p * np.asarray(base.dvv))
        rhs = np.array([0.0, float(np.dot(w, w)) - float(np.dot(d, w_p))])
    else:
        ub_t, vb_t = env.seed.eval(p, t, dt=1)
        ub_pt, vb_pt = env.seed.eval(p, t, dp=1, dt=1)
        base_t = (ub_t * du_b + vb_t * dv_b + np.asarray(base.dt))
        w_t = (ub_pt * du_b + vb_pt * dv_b
               + ub_p * (ub_t * np.asarray(base.duu) + vb_t * np.asarray(base.duv)
                         + np.asarray(base.dut))
               + vb_p * (ub_t * np.asarray(base.duv) + vb_t * np.asarray(base.dvv)
                         + np.asarray(base.dvt)))
        rhs = -np.array([
            float(ev.funnel_dt),
            float(np.dot(np.asarray(ev.dt) - base_t, w)) + float(np.dot(d, w_t)),
        ])
    try:
        sens = np.linalg.solve(jac, rhs)
    except np.linalg.LinAlgError:
        raise ConvergenceError(
            f"degenerate tangency: chart sensitivities undefined at ({p:.6g}, {t:.6g})"
        ) from None
    out = float(sens[0]) * np.asarray(ev.du) + float(sens[1]) * np.asarray(ev.dv)
    if which == "t":
        out = out + np.asarray(ev.dt)
    return out


def envelope_jet(env: ProceduralEnvelope, p, t) -> EnvelopeJet:
    """Envelope evaluation with both first derivatives filled in."""
    jet = eval_envelope(env, p, t)
    return replace(
        jet,
        d_p=eval_envelope_derivative(env, p, t, "p"),
        d_t=eval_envelope_derivative(env, p, t, "t"),
    )


def validate_assumption(env: ProceduralEnvelope, samples: int = 25) -> AssumptionReport:
    """Count crossings of seed normal planes with traced contact curves.

    The evaluation is well-posed only if each normal plane meets its iso-t
    contact curve in a single point near the seed.  A closed curve always
    re-crosses the plane once on its far side, so the expected transversal
    crossing count is 2 for closed matched curves and 1 for open ones; every
    sampled (p, t) with a different count is reported.
    """
    scene = env.scene
    (p0, p1), (t0, t1) = env.p_domain, env.t_domain
    mp = max(2, int(round(np.sqrt(samples))))
    mt = max(2, samples // mp)
    ps = np.linspace(p0 + 0.02 * (p1 - p0), p1 - 0.02 * (p1 - p0), mp)
    ts = np.linspace(t0, t1, mt)
    violations = []
    checked = 0
    for t in ts:
        curves = trace_components(scene, float(t))
        if not curves:
            for p in ps:
                violations.append((float(p), float(t), 0))
                checked += 1
            continue
        mid_u, mid_v = env.seed.eval(0.5 * (p0 + p1), t)
        probe = np.asarray(evaluate(scene, mid_u, mid_v, float(t), check_domain=False).point)
        curve = min(curves, key=lambda c: float(
            np.linalg.norm(c.image - probe, axis=1).min()))
        img = curve.image
        if curve.closed:
            img = np.vstack([img, img[:1]])
        expected = 2 if curve.closed else 1
        for p in ps:
            ub, vb = env.seed.eval(p, t)
            ub_p, vb_p = env.seed.eval(p, t, dp=1)
            base = evaluate(scene, ub, vb, float(t), check_domain=False)
            w = ub_p * np.asarray(base.du) + vb_p * np.asarray(base.dv)
            g = (img - np.asarray(base.point)) @ w
            crossings = int(np.sum(g[:-1] * g[1:] < 0.0))
            checked += 1
            if crossings != expected:
                violations.append((float(p), float(t), crossings))
    return AssumptionReport(checked=checked, violations=tuple(violations))


def gaussian_curvature_translational(scene: SweepScene, fp: FunnelPoint) -> float:
    """Gaussian curvature of the contact set for a purely translational sweep.

    The ratio of normal acceleration to its bending-corrected value rescales
    the surface's own curvature: K = <N, at> / (<N, at> - <W(V), V>) * det W
    with at the translational acceleration.
    """
    for tt in np.linspace(*scene.time_domain, 5):
        j = scene.trajectory.jet(float(tt))
        if (np.max(np.abs(j.rot - np.eye(3))) > 1e-12
                or np.max(np.abs(j.rot_dt)) > 1e-12
                or np.max(np.abs(j.rot_dtt)) > 1e-12):
            raise ValueError("trajectory is not a pure translation")
    ev = fp.data
    normal = np.asarray(ev.normal, dtype=float)
    num = float(np.dot(normal, ev.dtt))
    b11 = float(np.dot(ev.du, ev.normal_du))
    b12 = float(np.dot(ev.du, ev.normal_dv))
    b21 = float(np.dot(ev.dv, ev.normal_du))
    b22 = float(np.dot(ev.dv, ev.normal_dv))
    l, m = float(ev.slide_u), float(ev.slide_v)
    bend = l * l * b11 + l * m * (b12 + b21) + m * m * b22
    den = num - bend
    if abs(den) <= 1e-14 * max(abs(num), abs(bend), 1e-300):
        raise CurvatureDegeneracyError(
            "normal acceleration balances surface bending; curvature undefined"
        )
    jet = scene.surface.jet(fp.u, fp.v)
    det_w = float(np.linalg.det(shape_operator(jet)))
    return num / den * det_w
