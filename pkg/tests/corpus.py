"""Scene corpus shared across the suite; built once and cached.

The same six scenes ship as bundled configs; test_config checks the two
constructions agree.
"""
from functools import lru_cache

import numpy as np

from sweepkit.kinematics import ArcTranslation, AxisRotation, Compose, LineTranslation
from sweepkit.surface import Cylinder, Ellipsoid, Sphere, SplinePatch
from sweepkit.sweep import SweepScene

SCENE_NAMES = [
    "cylinder_example1",
    "ellipsoid_example2",
    "translating_sphere",
    "circling_sphere",
    "tangent_rotating_sphere",
    "spline_bump",
]


def _quarter_arc():
    # b(t) = (3 cos(pi t / 2) - 3, 3 sin(pi t / 2), 0)
    return ArcTranslation(radius=3.0, angle=np.pi / 2)


def _bump_patch():
    # ridge profile: single interior derivative sign change, so the crest
    # line u = 0.5 is the only slope-zero locus
    ridge = np.array([0.0, 0.35, 0.75, 0.95, 0.75, 0.35, 0.0])
    across = 0.5 * np.array([0.55, 0.75, 0.9, 1.0, 0.85, 0.7, 0.6])
    gx = np.linspace(-1.0, 1.0, 7)
    X, Y = np.meshgrid(gx, gx, indexing="ij")
    P = np.stack([X, Y, np.outer(ridge, across)], axis=-1)
    t = np.concatenate([[0.0] * 4, [0.25, 0.5, 0.75], [1.0] * 4])
    return SplinePatch(t, t, P)


@lru_cache(maxsize=None)
def build(name: str) -> SweepScene:
    if name == "cylinder_example1":
        surf = Cylinder(
            radius=2.0, axis=(0, 1, 0), e1=(1, 0, 0), e2=(0, 0, 1), axis_scale=2.0,
            u_domain=(-0.625, 0.625), orientation="outward",
        )
        traj = Compose([_quarter_arc(), AxisRotation((1, 0, 0), angle=0.1 * np.pi)])
    elif name == "ellipsoid_example2":
        surf = Ellipsoid((-3.0, 1.0, 1.0), u_domain=(-1.55, 1.55), orientation="outward")
        traj = _quarter_arc()
    elif name == "translating_sphere":
        surf = Sphere(radius=1.0, pole_axis=(1, 0, 0), u_domain=(-1.35, 1.35))
        traj = LineTranslation(velocity=(1, 0, 0))
    elif name == "circling_sphere":
        # pole tilted so the moving great-circle funnel stays off the chart poles
        surf = Sphere(radius=1.0, pole_axis=(1, -1, 0), u_domain=(-1.35, 1.35))
        traj = _quarter_arc()
    elif name == "tangent_rotating_sphere":
        surf = Sphere(center=(0, 0, 1), radius=1.0, pole_axis=(0, -1, 0), u_domain=(-1.35, 1.35))
        traj = AxisRotation((1, 0, 0), angle=np.pi)
    elif name == "spline_bump":
        surf = _bump_patch()
        traj = LineTranslation(velocity=(1, 0, 0))
    else:
        raise KeyError(name)
    return SweepScene(surf, traj, name=name)


def all_scenes():
    return [build(name) for name in SCENE_NAMES]
