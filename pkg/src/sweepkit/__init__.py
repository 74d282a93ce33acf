"""sweepkit: contact-set kernel for solid sweeps.

Computes the contact set (running envelope) of a parametric surface carried
along a rigid-motion trajectory, locates and classifies local
self-intersections and singularities of the swept boundary, and provides an
on-demand Newton-refined parametrization of the envelope.
"""

__version__ = "0.1.0"

from .analysis import (
    ClearanceProfile,
    LsiReport,
    ThetaSample,
    classify_point,
    clearance_profile,
    det_frame_transform,
    detect_singularity,
    lambda_ddot,
    refine_theta_min,
    theta,
    theta_sample,
)
from .config import (
    AnalysisConfig,
    OutputConfig,
    SceneConfig,
    build_scene,
    bundled_scene_names,
    bundled_scene_path,
    load_scene,
    parse_config,
)
from .envelope import (
    AssumptionReport,
    EnvelopeJet,
    ProceduralEnvelope,
    SeedSurface,
    build_envelope,
    build_seed,
    envelope_jet,
    eval_envelope,
    eval_envelope_derivative,
    gaussian_curvature_translational,
    validate_assumption,
)
from .errors import (
    ConvergenceError,
    CurvatureDegeneracyError,
    DegenerateSurfaceError,
    DegenerateSweepError,
    DomainError,
    FrameDegeneracyError,
    SceneValidationError,
    SeedNotFoundError,
    SweepKitError,
    TopologyChangeError,
    TraceError,
)
from .funnel import (
    ContactCurve,
    FunnelPoint,
    find_seed,
    frame,
    funnel_point,
    refine_to_funnel,
    sample_funnel,
    trace_components,
    trace_pcurve,
)
from .kinematics import (
    ArcTranslation,
    AxisRotation,
    Compose,
    Identity,
    KeyframeTrajectory,
    LineTranslation,
    MotionJet,
    Screw,
    SplineTranslation,
    Trajectory,
    inverse_motion,
    inverse_point_trajectory,
    point_trajectory,
    rebased_jet,
    sample_motion,
)
from .surface import (
    Cylinder,
    Ellipsoid,
    ParametricSurface,
    Plane,
    Sphere,
    SplinePatch,
    SurfaceJet,
    Torus,
    eval_jet,
    shape_operator,
)
from .sweep import SweepScene, SweepEval, evaluate, extended_sweep, jacobian, sweep_map

__all__ = [
    "AnalysisConfig",
    "ArcTranslation",
    "AssumptionReport",
    "AxisRotation",
    "ClearanceProfile",
    "Compose",
    "ContactCurve",
    "ConvergenceError",
    "CurvatureDegeneracyError",
    "Cylinder",
    "DegenerateSurfaceError",
    "DegenerateSweepError",
    "DomainError",
    "Ellipsoid",
    "EnvelopeJet",
    "FrameDegeneracyError",
    "FunnelPoint",
    "Identity",
    "KeyframeTrajectory",
    "LineTranslation",
    "LsiReport",
    "MotionJet",
    "OutputConfig",
    "ParametricSurface",
    "Plane",
    "ProceduralEnvelope",
    "SceneConfig",
    "SceneValidationError",
    "Screw",
    "SeedNotFoundError",
    "SeedSurface",
    "Sphere",
    "SplinePatch",
    "SplineTranslation",
    "SurfaceJet",
    "SweepEval",
    "SweepKitError",
    "SweepScene",
    "ThetaSample",
    "TopologyChangeError",
    "Torus",
    "TraceError",
    "Trajectory",
    "build_envelope",
    "build_scene",
    "build_seed",
    "bundled_scene_names",
    "bundled_scene_path",
    "classify_point",
    "clearance_profile",
    "det_frame_transform",
    "detect_singularity",
    "envelope_jet",
    "eval_envelope",
    "eval_envelope_derivative",
    "eval_jet",
    "evaluate",
    "extended_sweep",
    "find_seed",
    "frame",
    "funnel_point",
    "gaussian_curvature_translational",
    "inverse_motion",
    "inverse_point_trajectory",
    "jacobian",
    "lambda_ddot",
    "load_scene",
    "parse_config",
    "point_trajectory",
    "rebased_jet",
    "refine_theta_min",
    "refine_to_funnel",
    "sample_funnel",
    "sample_motion",
    "shape_operator",
    "sweep_map",
    "theta",
    "theta_sample",
    "trace_components",
    "trace_pcurve",
    "validate_assumption",
    "__version__",
]
