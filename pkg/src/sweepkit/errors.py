"""Exception types shared across the package."""


class SweepKitError(Exception):
    """Base class for all sweepkit errors."""


class SceneValidationError(SweepKitError):
    """A scene description failed validation (unknown key, bad value, missing block)."""


class DomainError(SweepKitError):
    """A parameter value lies outside the surface domain or the time interval."""


class DegenerateSurfaceError(SweepKitError):
    """The surface is not regular: the partials are linearly dependent at some point."""


class DegenerateSweepError(SweepKitError):
    """The whole surface is in tangential contact for all time (no isolated contact set).

    Classic triggers: a cylinder translated along its own axis, a plane moved
    within itself, or a motionless trajectory.
    """


class SeedNotFoundError(SweepKitError):
    """No funnel sign change was found at the scanned grid resolution."""


class FrameDegeneracyError(SweepKitError):
    """The in-slice gradient (f_u, f_v) vanished, so the contact-curve frame is undefined.

    Detected and reported rather than handled; the curve frame needs a
    different chart at such points.
    """


class ConvergenceError(SweepKitError):
    """An iterative solve (Newton, bisection, projection) failed to converge."""


class TraceError(SweepKitError):
    """Curve tracing failed; ``partial`` holds whatever polyline was collected."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class TopologyChangeError(SweepKitError):
    """The number of contact-curve components changed between time slices."""


class CurvatureDegeneracyError(SweepKitError):
    """The curvature formula hit a zero denominator (parabolic contact)."""
