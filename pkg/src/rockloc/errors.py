"""Exception types raised by the localization pipeline."""


class RocklocError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(RocklocError):
    """Malformed or inconsistent configuration / input file."""


# --- geometry ---------------------------------------------------------------


class DegenerateSample(RocklocError):
    """Point sample too degenerate to determine an affine transform."""


class ZeroVector(RocklocError):
    """A direction vector with (near-)zero norm where a direction is required."""


class NotARotation(RocklocError):
    """Matrix is not orthonormal with determinant +1 within tolerance."""


# --- triangulation / stereo -------------------------------------------------


class TriangulationError(RocklocError):
    """Base class for triangulation construction failures."""


class TooFewPoints(TriangulationError):
    """Fewer than three points supplied."""


class AllCollinear(TriangulationError):
    """All input points lie on one line; no triangle exists."""


class DuplicatePoints(TriangulationError):
    """Two input points coincide within tolerance."""


class OutsideHull(RocklocError):
    """Query point lies outside the triangulated region."""


class DegenerateTriangle(RocklocError):
    """Triangle area too small to carry an affine transfer."""


class NonPositiveDisparity(RocklocError):
    """Stereo disparity at or below the minimum; depth is undefined."""


class IntersectionError(RocklocError):
    """Stereo stage failed to produce usable rock positions."""


# --- pattern matching -------------------------------------------------------


class TooFewRocks(RocklocError):
    """Either rock set has fewer than three points; no transform is fittable."""


class NoConsensus(RocklocError):
    """No trial reached the minimum inlier count."""


# --- resection --------------------------------------------------------------


class SingularNormalMatrix(RocklocError):
    """Normal matrix of the position update is singular (e.g. parallel rays)."""


class DegenerateConfiguration(RocklocError):
    """Observation geometry does not determine a rotation."""


class ResectionError(RocklocError):
    """Pose estimation failed outright."""


# --- simulation -------------------------------------------------------------


class EmptyVisibleSet(RocklocError):
    """Scene produced no visible rocks (nothing to localize against)."""
