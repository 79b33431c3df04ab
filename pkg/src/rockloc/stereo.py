"""Rectified-stereo rock positioning.

Rock centroids are detected in the left image only; their right-image
counterparts are obtained by a per-triangle affine transfer over a
Delaunay triangulation of sparse stereo feature matches, then depth
follows from the disparity (z = f*B/d).  Camera frame: x right, y down,
z along the optical axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .delaunay import Triangulation, locate_triangle
from .errors import (
    DegenerateSample,
    DegenerateTriangle,
    NonPositiveDisparity,
    OutsideHull,
)
from .geometry import Point2, Point3, affine_apply, affine_from_pairs

DEFAULT_MIN_DISPARITY = 0.5  # px
DEFAULT_EPIPOLAR_TOL = 2.0  # px
DEFAULT_MAX_RANGE = 15.0  # m


@dataclass(frozen=True, slots=True)
class StereoRig:
    """Calibrated, rectified stereo pair."""

    focal_length: float  # px
    principal_point: Point2  # px
    baseline: float  # m
    image_size: tuple[int, int]  # (width, height) px

    def __post_init__(self) -> None:
        object.__setattr__(self, "focal_length", float(self.focal_length))
        object.__setattr__(self, "baseline", float(self.baseline))
        w, h = self.image_size
        object.__setattr__(self, "image_size", (int(w), int(h)))
        if self.focal_length <= 0:
            raise ValueError(f"focal length must be > 0, got {self.focal_length}")
        if self.baseline <= 0:
            raise ValueError(f"baseline must be > 0, got {self.baseline}")
        cx, cy = self.principal_point.x, self.principal_point.y
        if not (0 <= cx <= self.image_size[0] and 0 <= cy <= self.image_size[1]):
            raise ValueError("principal point outside image bounds")


@dataclass(frozen=True, slots=True)
class FeatureMatch:
    """One left/right feature correspondence on a rectified pair."""

    left: Point2
    right: Point2
    epipolar_tolerance: float = DEFAULT_EPIPOLAR_TOL

    def __post_init__(self) -> None:
        object.__setattr__(self, "epipolar_tolerance", float(self.epipolar_tolerance))
        dy = abs(self.left.y - self.right.y)
        if dy > self.epipolar_tolerance:
            raise ValueError(
                f"epipolar violation: |dy| = {dy:g} > {self.epipolar_tolerance:g}"
            )
        if self.left.x - self.right.x <= 0.0:
            raise NonPositiveDisparity(
                f"disparity {self.left.x - self.right.x:g} <= 0"
            )

    @property
    def disparity(self) -> float:
        return self.left.x - self.right.x


@dataclass(frozen=True, slots=True)
class RockObservation:
    """A rock centroid with its transferred right pixel and 3D position."""

    pixel_left: Point2
    pixel_right: Point2
    camera_point: Point3
    rock_id: int = -1

    def __post_init__(self) -> None:
        if self.camera_point.z <= 0.0:
            raise ValueError(f"camera point behind camera: z = {self.camera_point.z}")


def transfer_point(
    tri: Triangulation, matches: Sequence[FeatureMatch], p_left
) -> Point2:
    """Map a left-image point into the right image.

    The triangulation must have been built over ``[m.left for m in
    matches]`` so triangle vertex indices index ``matches``.
    """
    if len(matches) != len(tri.vertices):
        raise ValueError(
            f"{len(matches)} matches for {len(tri.vertices)} triangulation vertices"
        )
    idx = locate_triangle(tri, p_left)
    if idx is None:
        p = p_left if isinstance(p_left, Point2) else Point2(p_left[0], p_left[1])
        raise OutsideHull(f"({p.x:g}, {p.y:g}) is outside the feature hull")
    ia, ib, ic = tri.triangles[idx]
    try:
        f_i = affine_from_pairs(
            (tri.vertices[ia], tri.vertices[ib], tri.vertices[ic]),
            (matches[ia].right, matches[ib].right, matches[ic].right),
        )
    except DegenerateSample as exc:
        raise DegenerateTriangle(str(exc)) from exc
    return affine_apply(f_i, p_left)


def forward_intersect(
    rig: StereoRig, left, right, min_disparity: float = DEFAULT_MIN_DISPARITY
) -> Point3:
    """Camera-frame 3D point from a rectified pixel pair."""
    lx, ly = (left.x, left.y) if isinstance(left, Point2) else map(float, left)
    rx, ry = (right.x, right.y) if isinstance(right, Point2) else map(float, right)
    d = lx - rx
    if d <= min_disparity:
        raise NonPositiveDisparity(
            f"disparity {d:g} px at or below minimum {min_disparity:g} px"
        )
    z = rig.focal_length * rig.baseline / d
    x = (lx - rig.principal_point.x) * z / rig.focal_length
    # Rectified rows should agree; averaging symmetrizes small epipolar noise.
    y = (0.5 * (ly + ry) - rig.principal_point.y) * z / rig.focal_length
    return Point3(x, y, z)


def rocks_to_ground_plane(
    observations: Sequence[RockObservation], tilt: float
) -> list[Point2]:
    """Project camera-frame rocks to rover ground coordinates.

    The camera looks down at ``tilt`` radians about its horizontal axis;
    levelling by -tilt and dropping the vertical component leaves
    (lateral, forward) in meters.  With zero roll this is exact for any
    terrain: heights cancel instead of smearing into the plane.
    """
    c = math.cos(tilt)
    s = math.sin(tilt)
    out = []
    for obs in observations:
        p = obs.camera_point
        out.append(Point2(p.x, c * p.z - s * p.y))
    return out


def filter_near_rocks(
    observations: Sequence[RockObservation], max_range: float = DEFAULT_MAX_RANGE
) -> list[RockObservation]:
    """Keep observations within max_range meters of the camera."""
    return [o for o in observations if o.camera_point.z <= max_range]
