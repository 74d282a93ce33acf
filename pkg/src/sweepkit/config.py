"""Scene configuration: TOML schema, construction catalogs, bundled corpus.

A scene file has a ``name``, a ``[surface]`` block and a ``[trajectory]``
block, each selected by ``kind`` from the catalogs below, plus optional
``[analysis]`` and ``[output]`` blocks.  Parsing is strict: unknown keys
anywhere are rejected, so a typo fails loudly instead of silently running
with a default.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .errors import SceneValidationError
from .kinematics import (
    ArcTranslation,
    AxisRotation,
    Compose,
    Identity,
    KeyframeTrajectory,
    LineTranslation,
    Screw,
    SplineTranslation,
)
from .surface import Cylinder, Ellipsoid, Plane, Sphere, SplinePatch, Torus
from .sweep import SweepScene

_SURFACES = {
    "plane": (Plane, {"origin", "e1", "e2", "u_domain", "v_domain", "orientation"}),
    "sphere": (Sphere, {"center", "radius", "pole_axis", "u_domain", "v_domain", "orientation"}),
    "ellipsoid": (Ellipsoid, {"semiaxes", "center", "u_domain", "v_domain", "orientation"}),
    "cylinder": (Cylinder, {"radius", "center", "axis", "e1", "e2", "axis_scale",
                            "u_domain", "v_domain", "orientation"}),
    "torus": (Torus, {"major_radius", "minor_radius", "center", "axis",
                      "u_domain", "v_domain", "orientation"}),
    "spline_patch": (SplinePatch, {"u_knots", "v_knots", "control_points",
                                   "degree_u", "degree_v", "orientation"}),
}

_TRAJECTORIES = {
    "identity": (Identity, set()),
    "line_translation": (LineTranslation, {"velocity", "direction", "profile_poly"}),
    "arc_translation": (ArcTranslation, {"radius", "angle", "phase", "e1", "e2"}),
    "spline_translation": (SplineTranslation, {"waypoints", "times"}),
    "axis_rotation": (AxisRotation, {"axis", "angle", "point", "angle_poly"}),
    "screw": (Screw, {"axis", "angle", "pitch", "point", "angle_poly"}),
    "keyframe": (KeyframeTrajectory, {"quaternions", "translations", "times"}),
    "compose": (Compose, {"parts"}),
}


@dataclass(frozen=True)
class AnalysisConfig:
    """Numeric knobs for detection, tracing, and seeding; None keeps defaults."""

    nt: int = 11
    np: int = 32
    step: float | None = None
    grid: int = 64
    clearance_halfwidth: float = 0.05
    clearance_samples: int = 21


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "."
    basename: str | None = None


@dataclass(frozen=True)
class SceneConfig:
    """Parsed scene file: construction blocks plus a lossless raw echo."""

    name: str
    surface: dict
    trajectory: dict
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    raw: dict = field(default_factory=dict)


def _require_keys(block: dict, allowed, where: str):
    unknown = sorted(set(block) - set(allowed))
    if unknown:
        raise SceneValidationError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _pick(catalog, block: dict, where: str):
    if "kind" not in block:
        raise SceneValidationError(f"{where} block needs a 'kind'")
    kind = block["kind"]
    if kind not in catalog:
        raise SceneValidationError(
            f"unknown {where} kind {kind!r}; expected one of {', '.join(sorted(catalog))}"
        )
    cls, allowed = catalog[kind]
    _require_keys({k: v for k, v in block.items() if k != "kind"}, allowed, f"[{where}] ({kind})")
    return cls, {k: v for k, v in block.items() if k != "kind"}


def _build_trajectory(block: dict, where: str = "trajectory"):
    cls, kwargs = _pick(_TRAJECTORIES, block, where)
    if cls is Compose:
        parts = kwargs.pop("parts", None)
        if not parts:
            raise SceneValidationError("compose trajectory needs a nonempty 'parts' list")
        return Compose([_build_trajectory(p, f"{where}.parts") for p in parts])
    return cls(**kwargs)


def parse_config(text: str, name_hint: str = "") -> SceneConfig:
    """Parse and strictly validate scene TOML text (no geometry built yet)."""
    data = tomllib.loads(text)
    _require_keys(data, {"name", "surface", "trajectory", "analysis", "output"}, "scene file")
    for key in ("surface", "trajectory"):
        if key not in data or not isinstance(data[key], dict):
            raise SceneValidationError(f"scene file needs a [{key}] block")
    analysis = data.get("analysis", {})
    _require_keys(analysis, {"nt", "np", "step", "grid",
                             "clearance_halfwidth", "clearance_samples"}, "[analysis]")
    output = data.get("output", {})
    _require_keys(output, {"directory", "basename"}, "[output]")
    return SceneConfig(
        name=str(data.get("name", name_hint or "scene")),
        surface=dict(data["surface"]),
        trajectory=dict(data["trajectory"]),
        analysis=AnalysisConfig(**analysis),
        output=OutputConfig(**output),
        raw=data,
    )


def build_scene(cfg: SceneConfig) -> SweepScene:
    """Construct and validate the sweep described by a parsed config."""
    surf_cls, surf_kwargs = _pick(_SURFACES, cfg.surface, "surface")
    surface = surf_cls(**surf_kwargs)
    trajectory = _build_trajectory(cfg.trajectory)
    return SweepScene(surface, trajectory, name=cfg.name)


def load_scene(path) -> tuple[SweepScene, SceneConfig]:
    """Read, parse, and build a scene file; errors carry the offending field."""
    path = Path(path)
    cfg = parse_config(path.read_text(), name_hint=path.stem)
    return build_scene(cfg), cfg


def bundled_scene_names() -> list[str]:
    root = resources.files(__package__) / "scenes"
    return sorted(p.name[: -len(".toml")] for p in root.iterdir() if p.name.endswith(".toml"))


def bundled_scene_path(name: str) -> Path:
    """Filesystem path of a bundled scene config."""
    p = resources.files(__package__) / "scenes" / f"{name}.toml"
    if not p.is_file():
        raise SceneValidationError(
            f"no bundled scene {name!r}; available: {', '.join(bundled_scene_names())}"
        )
    return Path(str(p))
