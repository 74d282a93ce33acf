"""Contact-set diagnostics: the tangency invariant and point classification.

On the funnel the velocity is purely tangential, V = l*su + m*sv, and the
scalar

    theta = l*fu + m*fv - ft

decides the local fate of a contact point: positive means the curves of
contact advance cleanly, zero means the contact set is singular there, and
negative means nearby placements of the solid swallow the point (a local
self-intersection).  The same number is the second time derivative of the
signed clearance between the inverse trajectory of the contact point and the
rest surface, so it can be cross-checked two independent ways: through the
explicit frame-transform determinant, and by differencing a sampled
clearance profile.

Two flavours of local self-intersection are reported.  Type 1 is the
parameter-space condition theta <= 0 itself; type 2 is the measurable event
that the inverse trajectory dips inside the solid.  Strictly negative theta
implies both; the grazing case theta ~ 0 is settled by the clearance
profile.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DegenerateSurfaceError, FrameDegeneracyError
from .funnel import _FRAME_REL, ContactCurve, FunnelPoint, funnel_point, refine_to_funnel, sample_funnel
from .kinematics import inverse_motion
from .sweep import SweepScene

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ThetaSample:
    """Every pointwise invariant evaluated at one funnel point."""

    fp: FunnelPoint
    slide_u: float
    slide_v: float
    theta: float
    frame_det: float
    lambda_ddot: float


@dataclass(frozen=True)
class ClearanceProfile:
    """Signed clearance of a contact point's inverse trajectory over a time window.

    ``lambdas[i]`` is the signed distance of the pulled-back point at
    ``ts[i]`` to the rest surface, negative inside the solid.  ``ok`` flags
    samples whose closest-point projection converged inside the chart.
    """

    fp: FunnelPoint
    ts: np.ndarray
    lambdas: np.ndarray
    ok: np.ndarray

    @property
    def min_lambda(self) -> float:
        good = self.lambdas[self.ok]
        return float(good.min()) if good.size else float("nan")


@dataclass(frozen=True)
class LsiReport:
    """Scene-level verdict from sampling theta over the traced funnel.

    ``excised_count`` and ``excised_bbox`` summarize the samples with
    theta <= 0, the region a downstream trimmer would cut out of the
    contact set; the bbox is ((u, v, t) mins, (u, v, t) maxs).
    """

    scene: str
    samples: tuple
    min_theta: float
    max_theta: float
    verdict: str
    excised_count: int
    excised_bbox: tuple | None


def _theta_of(ev) -> float:
    return float(ev.slide_u * ev.funnel_du + ev.slide_v * ev.funnel_dv - ev.funnel_dt)


def theta(scene: SweepScene, fp: FunnelPoint) -> float:
    """Tangency invariant l*fu + m*fv - ft at a funnel point."""
    return _theta_of(fp.data)


def det_frame_transform(scene: SweepScene, fp: FunnelPoint) -> float:
    """Determinant of the frame-transform matrix, built entry by entry.

    Equals (fu^2 + fv^2) * theta, but is computed from the explicit 2x2
    matrix so the identity stays an independent check.
    """
    ev = fp.data
    fu, fv, ft = float(ev.funnel_du), float(ev.funnel_dv), float(ev.funnel_dt)
    grad2 = fu * fu + fv * fv
    if grad2 <= (_FRAME_REL * scene.velocity_scale) ** 2:
        raise FrameDegeneracyError(
            f"in-slice funnel gradient vanishes at (u={fp.u:.6g}, v={fp.v:.6g}, t={fp.t:.6g})"
        )
    l, m = float(ev.slide_u), float(ev.slide_v)
    d = np.array([
        [-ft * fu + l * grad2, -fv],
        [-ft * fv + m * grad2, fu],
    ])
    return float(np.linalg.det(d))


def lambda_ddot(scene: SweepScene, fp: FunnelPoint) -> float:
    """Second time derivative of the clearance profile, in closed form.

    The acceleration of the pulled-back point contributes
    <-stt + 2*spin*V, N>; the curvature of the rest surface contributes the
    second fundamental form applied to the tangential velocity, expressed
    through the sliding coefficients.
    """
    ev = fp.data
    normal = np.asarray(ev.normal, dtype=float)
    accel = float(np.dot(2.0 * np.asarray(ev.spin_vel) - np.asarray(ev.dtt), normal))
    b11 = float(np.dot(ev.du, ev.normal_du))
    b12 = float(np.dot(ev.du, ev.normal_dv))
    b21 = float(np.dot(ev.dv, ev.normal_du))
    b22 = float(np.dot(ev.dv, ev.normal_dv))
    l, m = float(ev.slide_u), float(ev.slide_v)
    bend = l * l * b11 + l * m * (b12 + b21) + m * m * b22
    return accel + bend


def theta_sample(scene: SweepScene, fp: FunnelPoint) -> ThetaSample:
    """Evaluate theta, the frame determinant and the clearance curvature at fp."""
    ev = fp.data
    return ThetaSample(
        fp=fp,
        slide_u=float(ev.slide_u),
        slide_v=float(ev.slide_v),
        theta=_theta_of(ev),
        frame_det=det_frame_transform(scene, fp),
        lambda_ddot=lambda_ddot(scene, fp),
    )


def _project_to_surface(surf, y, u0, v0, max_iter: int = 50):
    """Closest-point parameters of y on the rest surface, Newton from (u0, v0).

    Returns (u, v, converged); charts are evaluated without domain checks so
    the iteration may roam, and a landing spot outside the chart counts as
    failure.
    """
    u, v = float(u0), float(v0)
    step_tol = 1e-13 * max(1.0, surf.domain_diagonal)
    for _ in range(max_iter):
        jet = surf.jet(u, v, check_domain=False)
        r = np.asarray(y, dtype=float) - jet.point
        g = np.array([np.dot(r, jet.du), np.dot(r, jet.dv)])
        h = np.array([
            [np.dot(r, jet.duu) - np.dot(jet.du, jet.du),
             np.dot(r, jet.duv) - np.dot(jet.du, jet.dv)],
            [np.dot(r, jet.duv) - np.dot(jet.du, jet.dv),
             np.dot(r, jet.dvv) - np.dot(jet.dv, jet.dv)],
        ])
        try:
            delta = np.linalg.solve(h, -g)
        except np.linalg.LinAlgError:
            return u, v, False
        if not np.all(np.isfinite(delta)):
            return u, v, False
        u += float(delta[0])
        v += float(delta[1])
        u, v = surf.wrap(u, v)
        if float(np.hypot(delta[0], delta[1])) <= step_tol:
            return u, v, bool(surf.contains(u, v))
    return u, v, False


def clearance_profile(scene: SweepScene, fp: FunnelPoint, halfwidth: float = 0.05,
                      n: int = 21) -> ClearanceProfile:
    """Signed distance of the contact point's inverse trajectory to the rest surface.

    Samples n times in [t0 - halfwidth, t0 + halfwidth].  Each sample pulls
    the contact point back to body coordinates, projects it onto the rest
    surface (Newton, warm-started outward from t0), and signs the residual
    by the outward normal at the foot point.
    """
    surf = scene.surface
    x = fp.position
    ts = np.linspace(fp.t - halfwidth, fp.t + halfwidth, n)
    lambdas = np.empty(n)
    ok = np.zeros(n, dtype=bool)
    center = int(np.argmin(np.abs(ts - fp.t)))
    halves = (range(center, n), range(center - 1, -1, -1))
    for order in halves:
        u, v = fp.u, fp.v
        for i in order:
            y = inverse_motion(scene.trajectory, float(ts[i])).transform(x)
            u, v, converged = _project_to_surface(surf, y, u, v)
            jet = surf.jet(u, v, check_domain=False)
            lambdas[i] = float(np.dot(y - jet.point, jet.normal))
            ok[i] = converged
            if not converged:
                u, v = fp.u, fp.v
    return ClearanceProfile(fp=fp, ts=ts, lambdas=lambdas, ok=ok)


def classify_point(scene: SweepScene, fp: FunnelPoint, eps_theta=None,
                   halfwidth: float = 0.05, n: int = 21) -> str:
    """Classify one funnel point: clean, type1+type2, type2, or singular-boundary.

    Strictly negative theta implies both kinds of local self-intersection;
    strictly positive is clean.  In the grazing band |theta| <= eps_theta the
    clearance profile decides: measurable penetration means type 2, otherwise
    the point is a singularity of the contact set without overlap.
    """
    th = _theta_of(fp.data)
    if eps_theta is None:
        eps_theta = 1e-6 * (1.0 + abs(th))
    if th > eps_theta:
        return "clean"
    if th < -eps_theta:
        return "type1+type2"
    prof = clearance_profile(scene, fp, halfwidth=halfwidth, n=n)
    good = prof.lambdas[prof.ok]
    if good.size and float(good.min()) < -scene.clearance_tol:
        return "type2"
    return "singular-boundary"


def refine_theta_min(scene: SweepScene, curve: ContactCurve, iters: int = 60):
    """Minimum of theta along one traced curve, sharpened past the sampling.

    Golden-section between the neighbors of the sampled argmin, with every
    candidate first projected back onto the funnel.  Returns (theta, point)
    where point is None if the minimizer's frame is degenerate (a grazing
    touch); falls back to the sampled minimum if refinement cannot improve.
    """
    pts = curve.points
    if len(pts) < 3:
        if not pts:
            return None
        i = int(np.argmin([_theta_of(p.data) for p in pts]))
        return _theta_of(pts[i].data), pts[i]
    values = [_theta_of(p.data) for p in pts]
    i = int(np.argmin(values))
    n = len(pts)
    if curve.closed:
        a = pts[(i - 1) % n].params
        b = pts[(i + 1) % n].params
    else:
        a = pts[max(i - 1, 0)].params
        b = pts[min(i + 1, n - 1)].params
    period_v = scene.surface.v_domain[1] - scene.surface.v_domain[0]
    if scene.surface.v_periodic:
        b = b.copy()
        b[1] = a[1] + (b[1] - a[1]) - period_v * np.round((b[1] - a[1]) / period_v)
    t = curve.t

    def value(s):
        q = (1.0 - s) * a + s * b
        try:
            ev = refine_to_funnel(scene, q[0], q[1], t)
        except (ConvergenceError, DegenerateSurfaceError):
            return np.inf, None
        return _theta_of(ev), ev

    lo, hi = 0.0, 1.0
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc, fd = value(c), value(d)
    for _ in range(iters):
        if fc[0] <= fd[0]:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = value(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = value(d)
    best_theta, best_ev = min(fc, fd, key=lambda pair: pair[0])
    if best_ev is None or values[i] <= best_theta:
        return values[i], pts[i]
    try:
        return best_theta, funnel_point(scene, best_ev)
    except (ConvergenceError, FrameDegeneracyError):
        return best_theta, None


def detect_singularity(scene: SweepScene, nt: int = 11, step=None, grid: int = 64,
                       halfwidth: float = 0.05, window_samples: int = 21) -> LsiReport:
    """Sample theta over the traced funnel and give a scene-level verdict.

    Traces nt fixed-time slices, evaluates every invariant at each traced
    point, and sharpens each curve's theta minimum so grazing contact is not
    missed between samples.  Verdicts: clean (theta bounded away from zero
    from above), type1-lsi (theta goes negative), type2-lsi (theta only
    grazes zero but the clearance profile shows penetration), singular
    (grazing without penetration), degenerate (no funnel to sample).
    """
    curves = sample_funnel(scene, nt=nt, step=step, grid=grid)
    samples = tuple(theta_sample(scene, p) for c in curves for p in c.points)
    if not samples:
        return LsiReport(scene=scene.name, samples=(), min_theta=float("nan"),
                         max_theta=float("nan"), verdict="degenerate",
                         excised_count=0, excised_bbox=None)
    thetas = np.array([s.theta for s in samples])
    eps = 1e-6 * float(np.median(np.abs(thetas)))
    min_theta = float(thetas.min())
    max_theta = float(thetas.max())
    refined = [r for r in (refine_theta_min(scene, c) for c in curves) if r is not None]
    if refined:
        min_theta = min(min_theta, min(th for th, _ in refined))
    if min_theta > eps:
        verdict = "clean"
    elif min_theta < -eps:
        verdict = "type1-lsi"
    else:
        verdict = "singular"
        checks = [fp for th, fp in refined if th <= eps and fp is not None]
        if not checks:
            order = np.argsort(thetas)
            checks = [samples[int(j)].fp for j in order[:3]]
        for fp in checks:
            prof = clearance_profile(scene, fp, halfwidth=halfwidth, n=window_samples)
            good = prof.lambdas[prof.ok]
            if good.size and float(good.min()) < -scene.clearance_tol:
                verdict = "type2-lsi"
                break
    mask = thetas <= 0.0
    count = int(mask.sum())
    if count:
        pts = np.array([[samples[j].fp.u, samples[j].fp.v, samples[j].fp.t]
                        for j in np.flatnonzero(mask)])
        bbox = (tuple(map(float, pts.min(axis=0))), tuple(map(float, pts.max(axis=0))))
    else:
        bbox = None
    return LsiReport(scene=scene.name, samples=samples, min_theta=min_theta,
                     max_theta=max_theta, verdict=verdict,
                     excised_count=count, excised_bbox=bbox)
