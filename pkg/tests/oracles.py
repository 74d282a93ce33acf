"""Implementation-independent oracles used by the test suite.

Everything here works from raw evaluations only (no tracing, no frames), so
it can stand as a second route against the library's own algorithms.
"""
import numpy as np

from sweepkit.sweep import evaluate


def grid_zero_crossings(scene, t, n=400):
    """Funnel zero-set crossings on the edges of a dense (u, v) grid.

    Sign changes along grid edges located by linear interpolation, plus any
    node where the funnel vanishes to rounding noise.  Returns an (m, 2)
    array of (u, v) points.
    """
    surf = scene.surface
    u = np.linspace(*surf.u_domain, n + 1)
    v = np.linspace(*surf.v_domain, n + 1)
    U, V = np.meshgrid(u, v, indexing="ij")
    f = evaluate(scene, U, V, float(t)).funnel
    pts = []
    for i, j in np.argwhere(f[:, :-1] * f[:, 1:] < 0.0):
        s = f[i, j] / (f[i, j] - f[i, j + 1])
        pts.append((u[i], v[j] + s * (v[j + 1] - v[j])))
    for i, j in np.argwhere(f[:-1, :] * f[1:, :] < 0.0):
        s = f[i, j] / (f[i, j] - f[i + 1, j])
        pts.append((u[i] + s * (u[i + 1] - u[i]), v[j]))
    for i, j in np.argwhere(np.abs(f) <= 1e-12 * np.abs(f).max()):
        pts.append((u[i], v[j]))
    return np.array(pts).reshape(-1, 2)


def param_hausdorff(surf, a, b):
    """Symmetric Hausdorff distance between two chart point sets.

    Periodic directions are measured the short way around.
    """
    a = np.asarray(a, dtype=float).reshape(-1, 2)
    b = np.asarray(b, dtype=float).reshape(-1, 2)
    du = a[:, None, 0] - b[None, :, 0]
    dv = a[:, None, 1] - b[None, :, 1]
    if surf.u_periodic:
        period = surf.u_domain[1] - surf.u_domain[0]
        du -= period * np.round(du / period)
    if surf.v_periodic:
        period = surf.v_domain[1] - surf.v_domain[0]
        dv -= period * np.round(dv / period)
    d = np.hypot(du, dv)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def second_derivative_stencil(values, h):
    """Five-point second derivative at the center of an odd-length window."""
    values = np.asarray(values, dtype=float)
    c = len(values) // 2
    return (
        -values[c - 2] + 16 * values[c - 1] - 30 * values[c]
        + 16 * values[c + 1] - values[c + 2]
    ) / (12.0 * h * h)
