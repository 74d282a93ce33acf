"""Contact curves on the funnel: seeding, Newton refinement, marching.

A fixed-time slice of the funnel is a curve in the (u, v) chart; its image
under the sweep map is the curve along which the moving surface touches the
envelope at that instant.  This module finds such curves by grid scanning
plus bisection, refines points onto the funnel with Newton steps, and traces
whole curves with a predictor-corrector march.  Re-seeding on unclaimed
sign-change cells picks up multiple components per slice.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceError,
    DegenerateSweepError,
    FrameDegeneracyError,
    SeedNotFoundError,
    TraceError,
)
from .sweep import SweepEval, SweepScene, evaluate

_DEGENERATE_REL = 1e-9   # grid max |f| below this times velocity scale: no isolated contact
_FRAME_REL = 1e-10       # |(fu, fv)| below this times velocity scale: frame undefined


@dataclass(frozen=True)
class FunnelPoint:
    """A refined funnel point with its marching frame.

    ``beta`` is tangent to the fixed-time slice through the point; ``alpha``
    is transversal to it within the funnel, tipped forward in time.  Both
    live in (u, v, t) parameter space.
    """

    data: SweepEval
    alpha: np.ndarray
    beta: np.ndarray

    @property
    def u(self) -> float:
        return float(self.data.u)

    @property
    def v(self) -> float:
        return float(self.data.v)

    @property
    def t(self) -> float:
        return float(self.data.t)

    @property
    def params(self) -> np.ndarray:
        return np.array([self.u, self.v])

    @property
    def position(self) -> np.ndarray:
        return np.asarray(self.data.point)


@dataclass(frozen=True)
class ContactCurve:
    """One traced component of a fixed-time funnel slice."""

    t: float
    points: tuple
    closed: bool

    @property
    def params(self) -> np.ndarray:
        """(n, 2) array of (u, v) along the curve, unwrapped."""
        return np.array([[p.u, p.v] for p in self.points])

    @property
    def image(self) -> np.ndarray:
        """(n, 3) polyline of the curve in space."""
        return np.array([p.position for p in self.points])

    def __len__(self) -> int:
        return len(self.points)


def frame(scene: SweepScene, ev: SweepEval):
    """Marching frame (alpha, beta) at a scalar funnel evaluation."""
    fu, fv, ft = float(ev.funnel_du), float(ev.funnel_dv), float(ev.funnel_dt)
    if np.hypot(fu, fv) <= _FRAME_REL * scene.velocity_scale:
        raise FrameDegeneracyError(
            f"in-slice funnel gradient vanishes at (u={float(ev.u):.6g}, "
            f"v={float(ev.v):.6g}, t={float(ev.t):.6g})"
        )
    beta = np.array([-fv, fu, 0.0])
    alpha = np.array([-fu * ft, -fv * ft, fu * fu + fv * fv])
    return alpha, beta


def funnel_point(scene: SweepScene, ev: SweepEval) -> FunnelPoint:
    """Wrap a scalar evaluation as a FunnelPoint, checking membership."""
    if abs(float(ev.funnel)) > scene.funnel_tol:
        raise ConvergenceError(
            f"|f| = {abs(float(ev.funnel)):.3e} exceeds the funnel tolerance "
            f"{scene.funnel_tol:.3e}"
        )
    alpha, beta = frame(scene, ev)
    return FunnelPoint(data=ev, alpha=alpha, beta=beta)


def refine_to_funnel(scene: SweepScene, u, v, t, max_iter: int = 25) -> SweepEval:
    """Newton along the in-slice gradient, holding t fixed."""
    u, v, t = float(u), float(v), float(t)
    tol = scene.funnel_tol
    f = np.inf
    for _ in range(max_iter):
        ev = evaluate(scene, u, v, t, check_domain=False)
        f = float(ev.funnel)
        if abs(f) <= tol:
            return ev
        fu, fv = float(ev.funnel_du), float(ev.funnel_dv)
        g2 = fu * fu + fv * fv
        if g2 <= (_FRAME_REL * scene.velocity_scale) ** 2:
            raise FrameDegeneracyError("in-slice gradient vanished during refinement")
        u -= f * fu / g2
        v -= f * fv / g2
    raise ConvergenceError(f"funnel refinement stalled at |f| = {abs(f):.3e}")


def _refine_on_edge(scene, axis, u, v, t, max_iter: int = 30) -> SweepEval:
    # Newton in the free coordinate while the other sits on its domain bound
    tol = scene.funnel_tol
    f = np.inf
    for _ in range(max_iter):
        ev = evaluate(scene, u, v, t, check_domain=False)
        f = float(ev.funnel)
        if abs(f) <= tol:
            return ev
        d = float(ev.funnel_dv) if axis == 0 else float(ev.funnel_du)
        if abs(d) <= _FRAME_REL * scene.velocity_scale:
            raise FrameDegeneracyError("funnel runs tangent to the domain edge")
        if axis == 0:
            v -= f / d
        else:
            u -= f / d
    raise ConvergenceError(f"edge refinement stalled at |f| = {abs(f):.3e}")


def _param_delta(surf, a, b):
    """Difference a - b in the chart, shortest way around periodic directions."""
    du, dv = a[0] - b[0], a[1] - b[1]
    if surf.u_periodic:
        period = surf.u_domain[1] - surf.u_domain[0]
        du -= period * np.round(du / period)
    if surf.v_periodic:
        period = surf.v_domain[1] - surf.v_domain[0]
        dv -= period * np.round(dv / period)
    return du, dv


def _param_dist(surf, a, b) -> float:
    return float(np.hypot(*_param_delta(surf, a, b)))


def find_seed(scene: SweepScene, t, grid: int = 64) -> FunnelPoint:
    """One funnel point at time t, from a grid scan plus bisection."""
    surf = scene.surface
    t = float(t)
    u = np.linspace(*surf.u_domain, grid + 1)
    v = np.linspace(*surf.v_domain, grid + 1)
    U, V = np.meshgrid(u, v, indexing="ij")
    f = evaluate(scene, U, V, t).funnel
    if float(np.abs(f).max()) < _DEGENERATE_REL * scene.velocity_scale:
        raise DegenerateSweepError(
            "funnel value vanishes over the whole chart: the sweep has no "
            "isolated contact set"
        )
    i, j = np.unravel_index(int(np.argmin(np.abs(f))), f.shape)
    if abs(f[i, j]) <= scene.funnel_tol:
        return funnel_point(scene, evaluate(scene, u[i], v[j], t))
    # bisect the first sign-change edge, sweeping along v first
    for axis, mask in ((1, f[:, :-1] * f[:, 1:] < 0.0), (0, f[:-1, :] * f[1:, :] < 0.0)):
        hits = np.argwhere(mask)
        if len(hits):
            i, j = map(int, hits[0])
            if axis == 1:
                lo, hi = (u[i], v[j]), (u[i], v[j + 1])
            else:
                lo, hi = (u[i], v[j]), (u[i + 1], v[j])
            ev = _bisect_segment(scene, t, lo, hi, float(f[i, j]))
            return funnel_point(scene, ev)
    raise SeedNotFoundError(
        f"no funnel sign change on a {grid}x{grid} grid at t = {t:g}"
    )


def _bisect_segment(scene, t, lo, hi, f_lo) -> SweepEval:
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        fm = float(evaluate(scene, mid[0], mid[1], t).funnel)
        if abs(fm) <= scene.funnel_tol:
            break
        if (fm > 0.0) == (f_lo > 0.0):
            lo = mid
        else:
            hi = mid
    mid = 0.5 * (lo + hi)
    return refine_to_funnel(scene, mid[0], mid[1], t)


def _clip_step(surf, u, v, du, dv):
    """Fraction of the displacement (du, dv) staying in the chart.

    Returns (fraction, axis, bound); axis -1 means the full step fits.  A
    start exactly on a bound does not count as a crossing.
    """
    frac, axis, bound = 1.0, -1, 0.0
    if not surf.u_periodic and du != 0.0:
        for b in surf.u_domain:
            s = (b - u) / du
            if 1e-9 < s < frac:
                frac, axis, bound = s, 0, b
    if not surf.v_periodic and dv != 0.0:
        for b in surf.v_domain:
            s = (b - v) / dv
            if 1e-9 < s < frac:
                frac, axis, bound = s, 1, b
    return frac, axis, bound


def _out_of_domain_axis(surf, u, v):
    if not surf.u_periodic and not (surf.u_domain[0] <= u <= surf.u_domain[1]):
        return 0
    if not surf.v_periodic and not (surf.v_domain[0] <= v <= surf.v_domain[1]):
        return 1
    return -1


def _march(scene, t, seed, step, direction, max_points):
    """March from the seed in one direction; returns (points, closed)."""
    surf = scene.surface
    start = (seed.u, seed.v)
    ev = seed.data
    u, v = start
    out = []
    emitted = 1  # the seed counts toward the closure minimum
    prev = None

    def fail(msg):
        raise TraceError(msg + f" at (u={u:.6g}, v={v:.6g}, t={t:g})", partial=out)

    for _ in range(max_points):
        fu, fv = float(ev.funnel_du), float(ev.funnel_dv)
        norm = np.hypot(fu, fv)
        du, dv = -fv / norm, fu / norm
        # orient by continuity: the raw tangent field may reverse across
        # funnel self-crossings, where (fu, fv) passes through zero
        if prev is None:
            du, dv = direction * du, direction * dv
        elif du * prev[0] + dv * prev[1] < 0.0:
            du, dv = -du, -dv
        frac, axis, bound = _clip_step(surf, u, v, step * du, step * dv)
        if axis >= 0:
            # the predictor leaves the chart: finish on the boundary
            if axis == 0:
                eu, ev_ = bound, v + frac * step * dv
            else:
                eu, ev_ = u + frac * step * du, bound
            try:
                edge = _refine_on_edge(scene, axis, eu, ev_, t)
                hop = _param_dist(surf, (float(edge.u), float(edge.v)), (u, v))
                if 1e-12 < hop <= 1.5 * step:
                    out.append(funnel_point(scene, edge))
            except (ConvergenceError, FrameDegeneracyError):
                pass  # drop the boundary point rather than abort the curve
            return out, False

        nxt = None
        h = step
        for _ in range(4):  # halve the predictor a few times if the corrector balks
            try:
                cand = refine_to_funnel(scene, u + h * du, v + h * dv, t)
            except (ConvergenceError, FrameDegeneracyError):
                h *= 0.5
                continue
            cu, cv = float(cand.u), float(cand.v)
            off_axis = _out_of_domain_axis(surf, cu, cv)
            if off_axis >= 0:
                # corrected point slid out: finish on the violated bound
                b = surf.u_domain if off_axis == 0 else surf.v_domain
                bv = b[0] if (cu if off_axis == 0 else cv) < b[0] else b[1]
                eu, ev_ = (bv, cv) if off_axis == 0 else (cu, bv)
                try:
                    edge = _refine_on_edge(scene, off_axis, eu, ev_, t)
                    hop = _param_dist(surf, (float(edge.u), float(edge.v)), (u, v))
                    if 1e-12 < hop <= 1.5 * step:
                        out.append(funnel_point(scene, edge))
                except (ConvergenceError, FrameDegeneracyError):
                    pass
                return out, False
            nxt = cand
            break
        if nxt is None:
            fail("corrector failed to converge")

        u, v, ev, prev = float(nxt.u), float(nxt.v), nxt, (du, dv)
        emitted += 1
        if emitted > 10 and _param_dist(surf, (u, v), start) < 0.5 * step:
            return out, True
        out.append(funnel_point(scene, ev))
    fail("maximum point count reached")


def trace_pcurve(scene: SweepScene, t, seed: FunnelPoint, step=None,
                 max_points: int = 20000) -> ContactCurve:
    """Trace the whole contact curve through the seed at fixed time t."""
    t = float(t)
    step = scene.trace_step if step is None else float(step)
    try:
        forward, closed = _march(scene, t, seed, step, +1.0, max_points)
    except TraceError as err:
        err.partial = ContactCurve(t=t, points=(seed, *err.partial), closed=False)
        raise
    if closed:
        points = (seed, *forward)
    else:
        try:
            backward, _ = _march(scene, t, seed, step, -1.0, max_points)
        except TraceError as err:
            err.partial = ContactCurve(
                t=t, points=(*reversed(err.partial), seed, *forward), closed=False
            )
            raise
        points = (*reversed(backward), seed, *forward)
    return ContactCurve(t=t, points=points, closed=closed)


def trace_components(scene: SweepScene, t, step=None, grid: int = 64):
    """All contact curves of one time slice, by exhaustive re-seeding."""
    surf = scene.surface
    t = float(t)
    step = scene.trace_step if step is None else float(step)
    u = np.linspace(*surf.u_domain, grid + 1)
    v = np.linspace(*surf.v_domain, grid + 1)
    U, V = np.meshgrid(u, v, indexing="ij")
    f = evaluate(scene, U, V, t).funnel
    if float(np.abs(f).max()) < _DEGENERATE_REL * scene.velocity_scale:
        raise DegenerateSweepError(
            "funnel value vanishes over the whole chart: the sweep has no "
            "isolated contact set"
        )

    cw_u = (surf.u_domain[1] - surf.u_domain[0]) / grid
    cw_v = (surf.v_domain[1] - surf.v_domain[0]) / grid
    claimed = np.zeros((grid, grid), dtype=bool)
    curves = []

    def cell_of(uu, vv):
        uu, vv = surf.wrap(uu, vv)
        ci = min(max(int((uu - surf.u_domain[0]) / cw_u), 0), grid - 1)
        cj = min(max(int((vv - surf.v_domain[0]) / cw_v), 0), grid - 1)
        return ci, cj

    def claim_around(ci, cj, radius=2):
        for a in range(ci - radius, ci + radius + 1):
            for b in range(cj - radius, cj + radius + 1):
                ia = a % grid if surf.u_periodic else min(max(a, 0), grid - 1)
                ib = b % grid if surf.v_periodic else min(max(b, 0), grid - 1)
                claimed[ia, ib] = True

    def near_existing(uu, vv):
        for c in curves:
            for p in c.points:
                if _param_dist(surf, (uu, vv), (p.u, p.v)) < 1.5 * step:
                    return True
        return False

    # seed candidates: exact node zeros first (funnels that ride grid lines
    # produce no strict sign change), then v-direction and u-direction edges
    candidates = []
    for i, j in np.argwhere(np.abs(f) <= scene.funnel_tol):
        candidates.append((2, int(i), int(j)))
    for i, j in np.argwhere(f[:, :-1] * f[:, 1:] < 0.0):
        candidates.append((1, int(i), int(j)))
    for i, j in np.argwhere(f[:-1, :] * f[1:, :] < 0.0):
        candidates.append((0, int(i), int(j)))

    for axis, i, j in candidates:
        if axis == 2:
            cells = [(i - 1, j - 1), (i - 1, j), (i, j - 1), (i, j)]
        elif axis == 1:
            cells = [(i - 1, j), (i, j)]
        else:
            cells = [(i, j - 1), (i, j)]
        cells = [
            (a % grid if surf.u_periodic else min(max(a, 0), grid - 1),
             b % grid if surf.v_periodic else min(max(b, 0), grid - 1))
            for a, b in cells
        ]
        if all(claimed[a, b] for a, b in cells):
            continue
        try:
            if axis == 2:
                ev = refine_to_funnel(scene, u[i], v[j], t)
            elif axis == 1:
                ev = _bisect_segment(scene, t, (u[i], v[j]), (u[i], v[j + 1]), float(f[i, j]))
            else:
                ev = _bisect_segment(scene, t, (u[i], v[j]), (u[i + 1], v[j]), float(f[i, j]))
            uu, vv = float(ev.u), float(ev.v)
            if near_existing(uu, vv):
                claim_around(*cell_of(uu, vv), radius=1)
                continue
            fp = funnel_point(scene, ev)
        except (ConvergenceError, FrameDegeneracyError) as err:
            # e.g. the exact crossing point of a self-intersecting slice
            claim_around(*cells[0], radius=0)
            if axis != 2:
                warnings.warn(f"seed refinement failed at t={t:g}: {err}", RuntimeWarning)
            continue
        try:
            curve = trace_pcurve(scene, t, fp, step=step)
        except TraceError as err:
            warnings.warn(f"trace aborted at t={t:g}: {err}", RuntimeWarning)
            curve = err.partial if isinstance(err.partial, ContactCurve) else None
            if curve is None or len(curve) < 2:
                claim_around(*cell_of(uu, vv), radius=1)
                continue
        curves.append(curve)
        for p in curve.points:
            claim_around(*cell_of(p.u, p.v))
    return curves


def sample_funnel(scene: SweepScene, nt: int = 11, step=None, grid: int = 64):
    """Contact curves at nt uniform times; decoupled failures per slice."""
    nt = int(nt)
    if nt < 2:
        raise ValueError("need at least two time samples")
    curves = []
    degenerate = 0
    for t in np.linspace(*scene.time_domain, nt):
        try:
            curves.extend(trace_components(scene, float(t), step=step, grid=grid))
        except DegenerateSweepError:
            degenerate += 1
    if degenerate == nt:
        warnings.warn(
            "every time slice is degenerate: the sweep has no isolated contact set",
            RuntimeWarning,
        )
    return curves
