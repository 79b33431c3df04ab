"""Synthetic scene generator: the ground-truth oracle for the pipeline.

Builds a rock field on a terrain surface, a camera pose, and everything
the localization pipeline consumes: a map of 3D rock records (noisy,
optionally with outlier insertions), left-image rock centroids, and
stereo terrain-feature matches.  All randomness flows through one
seeded generator, so a fixed config reproduces the scene exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import ConfigError, EmptyVisibleSet
from .geometry import Point2, Point3, RotationMatrix, matrix_to_quat
from .resection import Pose
from .stereo import StereoRig

MIN_ROCK_SEPARATION = 0.3
_PLACEMENT_TRIES = 10_000

# Terrain feature grid: spacing and margin beyond the field, in meters,
# with per-node jitter as a fraction of the spacing.  The margin keeps
# every visible rock pixel inside the hull of projected features.
FEATURE_SPACING = 1.0
FEATURE_MARGIN = 2.0
FEATURE_JITTER = 0.35

_MIN_DEPTH = 1e-9


@dataclass(frozen=True, slots=True)
class PlaneTerrain:
    """Flat ground at z = 0."""

    def height(self, x: float, y: float) -> float:
        return 0.0


@dataclass(frozen=True, slots=True)
class GentleRelief:
    """Smooth doubly periodic undulation around z = 0."""

    amplitude: float
    wavelength: float

    def __post_init__(self) -> None:
        if not (self.amplitude >= 0.0 and math.isfinite(self.amplitude)):
            raise ConfigError(f"relief amplitude must be >= 0, got {self.amplitude!r}")
        if not (self.wavelength > 0.0 and math.isfinite(self.wavelength)):
            raise ConfigError(f"relief wavelength must be > 0, got {self.wavelength!r}")

    def height(self, x: float, y: float) -> float:
        k = 2.0 * math.pi / self.wavelength
        return self.amplitude * math.sin(k * x) * math.sin(k * y)


Terrain = Union[PlaneTerrain, GentleRelief]


@dataclass(frozen=True, slots=True)
class SceneConfig:
    field_extent: tuple[float, float]
    rock_count: int
    rover_pose_truth: Pose
    rig: StereoRig
    terrain: Terrain = field(default_factory=PlaneTerrain)
    pixel_noise_sigma: float = 0.0
    uav_noise_sigma: float = 0.0
    outlier_fraction: float = 0.0
    rng_seed: int = 0

    def __post_init__(self) -> None:
        ex, ey = self.field_extent
        if not (ex > 0.0 and ey > 0.0 and math.isfinite(ex) and math.isfinite(ey)):
            raise ConfigError(f"field_extent must be positive, got {self.field_extent!r}")
        object.__setattr__(self, "field_extent", (float(ex), float(ey)))
        if self.rock_count < 0:
            raise ConfigError(f"rock_count must be >= 0, got {self.rock_count}")
        for name in ("pixel_noise_sigma", "uav_noise_sigma"):
            v = getattr(self, name)
            if not (v >= 0.0 and math.isfinite(v)):
                raise ConfigError(f"{name} must be >= 0, got {v!r}")
        if not (0.0 <= self.outlier_fraction < 1.0):
            raise ConfigError(
                f"outlier_fraction must be in [0, 1), got {self.outlier_fraction!r}"
            )


@dataclass(frozen=True, slots=True)
class GroundTruth:
    """What actually happened, for the evaluator and the tests."""

    rock_world: tuple[Point3, ...]
    rover_pose: Pose
    visible: tuple[bool, ...]
    correspondences: tuple[tuple[int, int], ...]  # (detection id, map record id)


@dataclass(frozen=True, slots=True)
class UavMap:
    """3D rock records as the aerial survey would deliver them."""

    records: tuple[tuple[int, Point3], ...]


@dataclass(frozen=True, slots=True)
class RoverObservations:
    """Left-image rock centroids plus stereo terrain-feature matches."""

    detections: tuple[tuple[int, Point2], ...]
    stereo_matches: tuple[tuple[float, float, float, float], ...]


def pose_from_ground(position: Point3, heading_deg: float, tilt_deg: float) -> Pose:
    """Camera pose standing at ``position``, yawed by heading, pitched down by tilt.

    Heading 0 looks along world +x; tilt is the downward pitch of the
    optical axis from horizontal.  The image x axis stays horizontal
    (no roll), image y points groundward.
    """
    th = math.radians(heading_deg)
    ta = math.radians(tilt_deg)
    z_axis = (math.cos(ta) * math.cos(th), math.cos(ta) * math.sin(th), -math.sin(ta))
    x_axis = (math.sin(th), -math.cos(th), 0.0)
    y_axis = (
        z_axis[1] * x_axis[2] - z_axis[2] * x_axis[1],
        z_axis[2] * x_axis[0] - z_axis[0] * x_axis[2],
        z_axis[0] * x_axis[1] - z_axis[1] * x_axis[0],
    )
    M = RotationMatrix(np.array([x_axis, y_axis, z_axis]))
    return Pose(rotation=matrix_to_quat(M), position=position)


def project_rock(
    pose: Pose, rig: StereoRig, world: Point3
) -> Optional[tuple[Point2, Point2]]:
    """Pinhole projection into the rectified pair, or None when not visible.

    Visible means: in front of the camera and inside [0, width] x
    [0, height] in both images.  Rectified geometry puts the right
    camera a baseline along the camera x axis, so both rows share y and
    the disparity is positive whenever the depth is.
    """
    M = pose.matrix().m
    rs = pose.position.as_array()
    cam = M @ (world.as_array() - rs)
    if cam[2] <= _MIN_DEPTH:
        return None
    f = rig.focal_length
    cx, cy = rig.principal_point.x, rig.principal_point.y
    xl = f * cam[0] / cam[2] + cx
    xr = f * (cam[0] - rig.baseline) / cam[2] + cx
    y = f * cam[1] / cam[2] + cy
    w, h = rig.image_size
    for x in (xl, xr):
        if not (0.0 <= x <= w):
            return None
    if not (0.0 <= y <= h):
        return None
    return Point2(xl, y), Point2(xr, y)


def _place_separated(
    rng: np.random.Generator,
    extent: tuple[float, float],
    count: int,
    occupied: list[tuple[float, float]],
    what: str,
) -> list[tuple[float, float]]:
    """Uniform draws over the field, each at least MIN_ROCK_SEPARATION
    from everything placed so far (rejection sampling)."""
    placed: list[tuple[float, float]] = []
    sep2 = MIN_ROCK_SEPARATION * MIN_ROCK_SEPARATION
    tries = 0
    budget = _PLACEMENT_TRIES * max(count, 1)
    while len(placed) < count:
        if tries >= budget:
            raise ConfigError(
                f"could not place {count} {what} with "
                f"{MIN_ROCK_SEPARATION} m separation in {extent} m field"
            )
        tries += 1
        x = float(rng.uniform(0.0, extent[0]))
        y = float(rng.uniform(0.0, extent[1]))
        if any((x - ox) ** 2 + (y - oy) ** 2 < sep2 for ox, oy in occupied):
            continue
        placed.append((x, y))
        occupied.append((x, y))
    return placed


def _feature_grid(
    rng: np.random.Generator, cfg: SceneConfig
) -> list[tuple[float, float, float]]:
    """Jittered terrain sample points covering the field plus margin.

    Jitter is drawn for every node in row-major order before any
    visibility decision, so the random stream does not depend on the
    camera pose.
    """
    ex, ey = cfg.field_extent
    xs = np.arange(-FEATURE_MARGIN, ex + FEATURE_MARGIN + 1e-9, FEATURE_SPACING)
    ys = np.arange(-FEATURE_MARGIN, ey + FEATURE_MARGIN + 1e-9, FEATURE_SPACING)
    half = FEATURE_JITTER * FEATURE_SPACING
    out = []
    for gy in ys:
        for gx in xs:
            jx, jy = rng.uniform(-half, half, size=2)
            x, y = float(gx + jx), float(gy + jy)
            out.append((x, y, cfg.terrain.height(x, y)))
    return out


def generate_scene(cfg: SceneConfig) -> tuple[GroundTruth, UavMap, RoverObservations]:
    """Build one scene; deterministic for a fixed config.

    Raises EmptyVisibleSet when the pose sees no rocks (including the
    rock_count = 0 config).  Outlier insertions number
    round(outlier_fraction * rock_count) on each side: fake map records
    placed in the field, and fake detections that are ground points
    projected like rocks, all respecting the minimum separation.
    """
    rng = np.random.default_rng(cfg.rng_seed)
    occupied: list[tuple[float, float]] = []

    rock_xy = _place_separated(rng, cfg.field_extent, cfg.rock_count, occupied, "rocks")
    rock_world = tuple(
        Point3(x, y, cfg.terrain.height(x, y)) for x, y in rock_xy
    )

    projections: list[Optional[tuple[Point2, Point2]]] = [
        project_rock(cfg.rover_pose_truth, cfg.rig, w) for w in rock_world
    ]
    visible = tuple(p is not None for p in projections)
    if not any(visible):
        raise EmptyVisibleSet(
            f"pose sees none of the {cfg.rock_count} rocks in the field"
        )

    grid = _feature_grid(rng, cfg)
    feature_rows: list[tuple[float, float, float, float]] = []
    for x, y, z in grid:
        pair = project_rock(cfg.rover_pose_truth, cfg.rig, Point3(x, y, z))
        if pair is not None:
            left, right = pair
            feature_rows.append((left.x, left.y, right.x, right.y))

    n_out = round(cfg.outlier_fraction * cfg.rock_count)

    # Map records: every true rock (id = index) with survey noise, then
    # fake records continuing the id sequence.
    records: list[tuple[int, Point3]] = []
    for i, w in enumerate(rock_world):
        dx, dy, dz = rng.normal(0.0, cfg.uav_noise_sigma, size=3)
        records.append((i, Point3(w.x + dx, w.y + dy, w.z + dz)))
    fake_xy = _place_separated(rng, cfg.field_extent, n_out, occupied, "map outliers")
    for j, (x, y) in enumerate(fake_xy):
        dx, dy, dz = rng.normal(0.0, cfg.uav_noise_sigma, size=3)
        z = cfg.terrain.height(x, y)
        records.append((cfg.rock_count + j, Point3(x + dx, y + dy, z + dz)))

    # Detections: visible rocks in rock order (id = running index), then
    # fake detections from visible ground points nothing else occupies.
    detections: list[tuple[int, Point2]] = []
    correspondences: list[tuple[int, int]] = []
    for i, pair in enumerate(projections):
        if pair is None:
            continue
        det_id = len(detections)
        left = pair[0]
        nx, ny = rng.normal(0.0, cfg.pixel_noise_sigma, size=2)
        detections.append((det_id, Point2(left.x + nx, left.y + ny)))
        correspondences.append((det_id, i))

    placed_fakes = 0
    tries = 0
    sep2 = MIN_ROCK_SEPARATION * MIN_ROCK_SEPARATION
    while placed_fakes < n_out and tries < _PLACEMENT_TRIES:
        tries += 1
        x = float(rng.uniform(0.0, cfg.field_extent[0]))
        y = float(rng.uniform(0.0, cfg.field_extent[1]))
        if any((x - ox) ** 2 + (y - oy) ** 2 < sep2 for ox, oy in occupied):
            continue
        pair = project_rock(
            cfg.rover_pose_truth, cfg.rig, Point3(x, y, cfg.terrain.height(x, y))
        )
        if pair is None:
            continue
        occupied.append((x, y))
        det_id = len(detections)
        nx, ny = rng.normal(0.0, cfg.pixel_noise_sigma, size=2)
        detections.append((det_id, Point2(pair[0].x + nx, pair[0].y + ny)))
        placed_fakes += 1

    noisy_rows: list[tuple[float, float, float, float]] = []
    for xl, yl, xr, yr in feature_rows:
        n4 = rng.normal(0.0, cfg.pixel_noise_sigma, size=4)
        noisy_rows.append(
            (xl + n4[0], yl + n4[1], xr + n4[2], yr + n4[3])
        )

    # Shuffle row order (ids travel with rows) so file position carries
    # no hint of which entries are genuine.
    rec_order = rng.permutation(len(records))
    det_order = rng.permutation(len(detections))

    truth = GroundTruth(
        rock_world=rock_world,
        rover_pose=cfg.rover_pose_truth,
        visible=visible,
        correspondences=tuple(correspondences),
    )
    uav = UavMap(records=tuple(records[int(k)] for k in rec_order))
    rover = RoverObservations(
        detections=tuple(detections[int(k)] for k in det_order),
        stereo_matches=tuple(noisy_rows),
    )
    return truth, uav, rover
