"""Batch front end: trace, theta-field, detect, mesh, and eval subcommands.

Output artifacts are deterministic: floats print with 17 significant digits,
CSV uses comma delimiters with a header row, and JSON reports carry
``"schema": 1`` with sorted keys.  Timing is part of the human summary on
standard error, never of the artifact, so identical runs stay byte-identical.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import det_frame_transform, detect_singularity, lambda_ddot, theta
from .config import SceneConfig, bundled_scene_names, bundled_scene_path, load_scene
from .envelope import build_envelope, envelope_jet, eval_envelope
from .errors import FrameDegeneracyError, SweepKitError
from .funnel import funnel_point, sample_funnel, trace_components
from .sweep import SweepScene, evaluate


@dataclass(frozen=True)
class RunReport:
    """Detection outcome plus provenance; ``seconds`` never enters the JSON."""

    scene: str
    verdict: str
    samples: int
    min_theta: float
    max_theta: float
    excised_count: int
    excised_bbox: tuple | None
    seconds: float
    version: str
    config: dict

    def to_json(self) -> str:
        bbox = None
        if self.excised_bbox is not None:
            lo, hi = self.excised_bbox
            bbox = {"min": list(lo), "max": list(hi)}
        finite = lambda x: float(x) if np.isfinite(x) else None
        doc = {
            "schema": 1,
            "toolVersion": self.version,
            "scene": self.scene,
            "verdict": self.verdict,
            "samples": self.samples,
            "minTheta": finite(self.min_theta),
            "maxTheta": finite(self.max_theta),
            "excised": {"count": self.excised_count, "bbox": bbox},
            "config": self.config,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def summary(self) -> str:
        return (f"{self.scene}: {self.verdict} "
                f"(theta in [{_fmt(self.min_theta)}, {_fmt(self.max_theta)}], "
                f"{self.samples} samples, {self.seconds:.2f}s, sweepkit {self.version})")


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _threads() -> int:
    raw = os.environ.get("SWEEPKIT_THREADS", "")
    if raw.strip():
        return max(1, int(raw))
    return min(4, os.cpu_count() or 1)


def _map_slices(fn, items):
    """Apply fn over per-slice work, optionally threaded, preserving order."""
    n = _threads()
    if n <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _resolve_scene(arg: str) -> tuple[SweepScene, SceneConfig]:
    path = Path(arg)
    if path.exists():
        return load_scene(path)
    if arg in bundled_scene_names():
        return load_scene(bundled_scene_path(arg))
    raise SweepKitError(
        f"scene {arg!r} is neither a file nor a bundled name "
        f"({', '.join(bundled_scene_names())})"
    )


def _open_out(path: str | None):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _write_csv(out, header, rows):
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(_fmt(x) for x in row) + "\n")


def cmd_trace(scene: SweepScene, cfg: SceneConfig, args, out) -> int:
    t = args.time if args.time is not None else 0.0
    step = args.step if args.step is not None else cfg.analysis.step
    rows = []
    for curve in trace_components(scene, t, step=step):
        for (u, v), x in zip(curve.params, curve.image):
            rows.append((u, v, curve.t, x[0], x[1], x[2]))
    _write_csv(out, ("u", "v", "t", "x", "y", "z"), rows)
    return 0


def cmd_theta_field(scene: SweepScene, cfg: SceneConfig, args, out) -> int:
    nt = args.nt if args.nt is not None else cfg.analysis.nt
    step = args.step if args.step is not None else cfg.analysis.step
    curves = sample_funnel(scene, nt=nt, step=step, grid=cfg.analysis.grid)

    def rows_of(curve):
        rows = []
        for fp in curve.points:
            th = theta(scene, fp)
            ld = lambda_ddot(scene, fp)
            try:
                dd = det_frame_transform(scene, fp)
            except FrameDegeneracyError:
                dd = float("nan")
            rows.append((fp.u, fp.v, fp.t, th, ld, dd))
        return rows

    rows = [row for batch in _map_slices(rows_of, curves) for row in batch]
    _write_csv(out, ("u", "v", "t", "theta", "lambdaDdot", "detD"), rows)
    return 0


def cmd_detect(scene: SweepScene, cfg: SceneConfig, args, out) -> int:
    nt = args.nt if args.nt is not None else cfg.analysis.nt
    step = args.step if args.step is not None else cfg.analysis.step
    start = time.perf_counter()
    rep = detect_singularity(
        scene, nt=nt, step=step, grid=cfg.analysis.grid,
        halfwidth=cfg.analysis.clearance_halfwidth,
        window_samples=cfg.analysis.clearance_samples,
    )
    report = RunReport(
        scene=rep.scene,
        verdict=rep.verdict,
        samples=len(rep.samples),
        min_theta=rep.min_theta,
        max_theta=rep.max_theta,
        excised_count=rep.excised_count,
        excised_bbox=rep.excised_bbox,
        seconds=time.perf_counter() - start,
        version=__version__,
        config=cfg.raw,
    )
    out.write(report.to_json())
    print(report.summary(), file=sys.stderr)
    return 0 if report.verdict == "clean" else 1


def cmd_mesh(scene: SweepScene, cfg: SceneConfig, args, obj_path: str) -> int:
    grid_t = args.nt if args.nt is not None else 32
    grid_p = args.np if args.np is not None else 32
    env = build_envelope(scene, nt=8, per_slice=cfg.analysis.np)
    (p0, p1), (t0, t1) = env.p_domain, env.t_domain
    ps = np.linspace(p0, p1, grid_p)
    ts = np.linspace(t0, t1, grid_t)

    def row_of(t):
        jets = [eval_envelope(env, float(p), float(t)) for p in ps]
        thetas = []
        for jet in jets:
            try:
                ev = evaluate(scene, jet.u, jet.v, jet.t, check_domain=False)
                thetas.append(theta(scene, funnel_point(scene, ev)))
            except FrameDegeneracyError:
                thetas.append(float("nan"))
        return jets, thetas

    results = _map_slices(row_of, [float(t) for t in ts])
    sidecar_path = str(Path(obj_path).with_suffix(".csv"))
    with open(obj_path, "w", newline="") as obj:
        obj.write(f"# sweepkit {__version__} envelope mesh: {scene.name}\n")
        obj.write(f"# grid {grid_t} x {grid_p} (t x p); theta comment follows each vertex\n")
        for jets, thetas in results:
            for jet, th in zip(jets, thetas):
                x, y, z = jet.point
                obj.write(f"v {_fmt(x)} {_fmt(y)} {_fmt(z)}\n")
                obj.write(f"# theta {_fmt(th)}\n")
        for i in range(grid_t - 1):
            for j in range(grid_p - 1):
                a = i * grid_p + j + 1
                b = a + 1
                c = a + grid_p
                d = c + 1
                obj.write(f"f {a} {b} {d}\n")
                obj.write(f"f {a} {d} {c}\n")
    with open(sidecar_path, "w", newline="") as side:
        rows = []
        for (jets, thetas), t in zip(results, ts):
            for jet, th in zip(jets, thetas):
                rows.append((jet.p, jet.t, jet.u, jet.v, th))
        side.write("vertex,p,t,u,v,theta\n")
        for idx, row in enumerate(rows, start=1):
            side.write(str(idx) + "," + ",".join(_fmt(x) for x in row) + "\n")
    print(f"{scene.name}: wrote {grid_t * grid_p} vertices to {obj_path} "
          f"(theta sidecar {sidecar_path})", file=sys.stderr)
    return 0


def cmd_eval(scene: SweepScene, cfg: SceneConfig, args, out) -> int:
    p = args.param if args.param is not None else 0.5
    t = args.time if args.time is not None else 0.5
    env = build_envelope(scene, nt=8, per_slice=cfg.analysis.np)
    jet = envelope_jet(env, p, t)
    values = list(jet.point) + list(jet.d_p) + list(jet.d_t)
    out.write(",".join(_fmt(x) for x in values) + "\n")
    return 0


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="sweepkit",
        description="Contact sets of solid sweeps: trace, classify, and mesh.",
    )
    ap.add_argument("--version", action="version", version=f"sweepkit {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    specs = {
        "trace": "trace the contact curves of one time slice to CSV",
        "theta-field": "sample theta/lambdaDdot/detD over the funnel to CSV",
        "detect": "classify the sweep (exit 0 clean, 1 singular or self-intersecting)",
        "mesh": "tessellate the envelope to OBJ plus a theta sidecar CSV",
        "eval": "evaluate one envelope point with derivatives to stdout",
    }
    for name, help_text in specs.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--scene", required=True,
                       help="scene config path or bundled scene name")
        p.add_argument("--time", type=float, default=None, help="time parameter")
        p.add_argument("--nt", type=int, default=None, help="time-slice count")
        p.add_argument("--np", type=int, default=None, help="points per slice")
        p.add_argument("--step", type=float, default=None, help="trace step override")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        if name == "eval":
            p.add_argument("--param", type=float, default=None,
                           help="envelope p parameter in [0, 1]")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        scene, cfg = _resolve_scene(args.scene)
        if args.command == "mesh":
            if args.out is None:
                raise SweepKitError("mesh requires --out (an OBJ path)")
            return cmd_mesh(scene, cfg, args, args.out)
        out, close = _open_out(args.out)
        try:
            if args.command == "trace":
                return cmd_trace(scene, cfg, args, out)
            if args.command == "theta-field":
                return cmd_theta_field(scene, cfg, args, out)
            if args.command == "detect":
                return cmd_detect(scene, cfg, args, out)
            return cmd_eval(scene, cfg, args, out)
        finally:
            if close:
                out.close()
    except SweepKitError as err:
        print(f"sweepkit: error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # parse errors, bad TOML, IO failures
        print(f"sweepkit: error: {type(err).__name__}: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
