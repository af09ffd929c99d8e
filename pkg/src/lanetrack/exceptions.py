"""Exception types raised across the package."""


class LanetrackError(Exception):
    """Base class for all package-specific errors."""


class ZeroAngularVelocity(LanetrackError):
    """Motion radius requested for (near-)straight motion."""


class NonPositiveDt(LanetrackError):
    """Integration step must be strictly positive."""


class DegenerateRho(LanetrackError):
    """Polar-error rates are undefined at (or too close to) rho = 0."""


class CoincidentPoints(LanetrackError):
    """Heading is undefined for a zero-length segment."""


class NearSingularAlpha(LanetrackError):
    """Control law denominator vanishes at this heading error."""


class EmptyPolyline(LanetrackError):
    """Operation requires at least one point."""


class DegeneratePolyline(LanetrackError):
    """Operation requires at least two distinct points."""


class TooFewPoints(LanetrackError):
    """Not enough samples for any polynomial fit."""


class DisjointRanges(LanetrackError):
    """Left and right lane fits do not overlap in x."""


class AboveHorizon(LanetrackError):
    """Pixel ray does not hit the ground plane ahead of the vehicle."""


class NonPositiveDuration(LanetrackError):
    """Boundary-conditioned cubic needs a positive time span."""


class PathExhausted(LanetrackError):
    """Target ran off the end of an open reference path."""


class InvalidScenario(LanetrackError):
    """Scenario violates one of its declared invariants."""


class EmptyLog(LanetrackError):
    """Metrics require at least one log record."""


class DegeneratePath(LanetrackError):
    """Cross-track distance requires a path with at least two points."""
