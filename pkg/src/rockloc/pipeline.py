"""Stage orchestration: scene files in, localized rover position out.

localize_scene chains the stages: parse stereo rows -> triangulate the
left-image features -> transfer each rock centroid to the right image
and intersect -> project to the ground plane -> match against the map
-> join the matched records -> resect the camera pose.  Rows or rocks
that fail a stage's validity checks are dropped and counted, never
silently ignored; whole-stage failures raise the owning module's error
so the CLI can map them to stage exit codes.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from . import fileio
from ._backend import backend_name
from .errors import ConfigError, IntersectionError, NonPositiveDisparity
from .errors import DegenerateTriangle, OutsideHull
from .delaunay import delaunay
from .geometry import Point2, Point3
from .matching import FrameLabel, MatchConfig, MatchHypothesis, RockSet, match_patterns
from .resection import Pose, RayObservation, ResectionReport, pixel_to_ray, resect
from .simulate import (
    GentleRelief,
    PlaneTerrain,
    SceneConfig,
    Terrain,
    pose_from_ground,
)
from .stereo import (
    FeatureMatch,
    RockObservation,
    StereoRig,
    filter_near_rocks,
    forward_intersect,
    rocks_to_ground_plane,
    transfer_point,
)
from .simulate import RoverObservations, UavMap

SCENE_CONFIG_FORMAT = "rockloc-scene-config"
PIPELINE_CONFIG_FORMAT = "rockloc-pipeline-config"

WORLD_FRAME = "world"


@dataclass(frozen=True, slots=True)
class PipelineConfig:
    rig: StereoRig
    camera_tilt_deg: float
    max_range: float = 15.0
    match: MatchConfig = field(default_factory=MatchConfig)
    resect_tol: float = 1e-12
    resect_max_iter: int = 200

    def __post_init__(self) -> None:
        if not math.isfinite(self.camera_tilt_deg):
            raise ConfigError(f"camera_tilt_deg must be finite, got {self.camera_tilt_deg!r}")
        if not (self.max_range > 0.0 and math.isfinite(self.max_range)):
            raise ConfigError(f"max_range must be > 0, got {self.max_range!r}")
        if not (self.resect_tol > 0.0):
            raise ConfigError(f"resect_tol must be > 0, got {self.resect_tol!r}")
        if self.resect_max_iter < 1:
            raise ConfigError(f"resect_max_iter must be >= 1, got {self.resect_max_iter!r}")

    def to_doc(self) -> dict[str, Any]:
        m = self.match
        return {
            "format": PIPELINE_CONFIG_FORMAT,
            "rig": _rig_doc(self.rig),
            "camera_tilt_deg": self.camera_tilt_deg,
            "max_range_m": self.max_range,
            "match": {
                "iterations": m.iterations,
                "inlier_threshold": m.inlier_threshold,
                "min_inliers": m.min_inliers,
                "rng_seed": m.rng_seed,
                "shape_tolerance": m.shape_tolerance,
                "anisotropy_bound": m.anisotropy_bound,
                "area_epsilon": m.area_epsilon,
                "max_candidates": m.max_candidates,
            },
            "resection": {"tol": self.resect_tol, "max_iter": self.resect_max_iter},
        }

    def digest(self) -> str:
        payload = json.dumps(self.to_doc(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(payload).hexdigest()


@dataclass(frozen=True, slots=True)
class LocalizationResult:
    planar_position: Point2
    pose: Pose
    match: MatchHypothesis
    resection: ResectionReport
    matched_ids: tuple[tuple[int, int], ...]  # (detection id, map record id)
    dropped_stereo_rows: int
    dropped_detections: int
    beyond_range: int
    provenance: Mapping[str, Any]
    # Plot support, in-memory only; to_doc() does not serialize these.
    ground_points: tuple[Point2, ...] = ()
    map_points: tuple[Point2, ...] = ()

    def to_doc(self) -> dict[str, Any]:
        q = self.pose.rotation
        p = self.pose.position
        return {
            "format": fileio.RESULT_FORMAT,
            "frame": WORLD_FRAME,
            "planar_position": [self.planar_position.x, self.planar_position.y],
            "pose": {
                "quaternion_wxyz": [q.w, q.x, q.y, q.z],
                "position": [p.x, p.y, p.z],
            },
            "match": {
                "inlier_count": self.match.inlier_count,
                "residual": self.match.residual,
                "transform": list(self.match.transform.as_tuple()),
                "correspondences": [list(pair) for pair in self.matched_ids],
            },
            "resection": {
                "converged": self.resection.converged,
                "iterations": self.resection.iterations,
                "loss_trace": list(self.resection.loss_trace),
            },
            "dropped": {
                "stereo_rows": self.dropped_stereo_rows,
                "detections": self.dropped_detections,
                "beyond_range": self.beyond_range,
            },
            "provenance": dict(self.provenance),
        }


def _rig_doc(rig: StereoRig) -> dict[str, Any]:
    return {
        "focal_length_px": rig.focal_length,
        "principal_point_px": [rig.principal_point.x, rig.principal_point.y],
        "baseline_m": rig.baseline,
        "image_size_px": [rig.image_size[0], rig.image_size[1]],
    }


def _require(doc: Mapping[str, Any], key: str, where: str) -> Any:
    if key not in doc:
        raise ConfigError(f"{where}: missing required field {key!r}")
    return doc[key]


def rig_from_doc(doc: Mapping[str, Any], where: str) -> StereoRig:
    try:
        cx, cy = (float(v) for v in _require(doc, "principal_point_px", where))
        w, h = (int(v) for v in _require(doc, "image_size_px", where))
        return StereoRig(
            focal_length=float(_require(doc, "focal_length_px", where)),
            principal_point=Point2(cx, cy),
            baseline=float(_require(doc, "baseline_m", where)),
            image_size=(w, h),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: bad rig record: {exc}") from exc


def _terrain_from_doc(doc: Mapping[str, Any], where: str) -> Terrain:
    kind = _require(doc, "kind", where)
    if kind == "plane":
        return PlaneTerrain()
    if kind == "gentle_relief":
        return GentleRelief(
            amplitude=float(_require(doc, "amplitude_m", where)),
            wavelength=float(_require(doc, "wavelength_m", where)),
        )
    raise ConfigError(f"{where}: unknown terrain kind {kind!r}")


def parse_scene_config(
    doc: Mapping[str, Any], where: str, seed_override: int | None = None
) -> SceneConfig:
    if doc.get("format") != SCENE_CONFIG_FORMAT:
        raise ConfigError(
            f"{where}: format tag {doc.get('format')!r}, expected {SCENE_CONFIG_FORMAT!r}"
        )
    rover = _require(doc, "rover", where)
    try:
        px, py, pz = (float(v) for v in _require(rover, "position_m", where))
        pose = pose_from_ground(
            Point3(px, py, pz),
            heading_deg=float(_require(rover, "heading_deg", where)),
            tilt_deg=float(_require(rover, "tilt_deg", where)),
        )
        ex, ey = (float(v) for v in _require(doc, "field_extent_m", where))
        terrain = _terrain_from_doc(doc.get("terrain", {"kind": "plane"}), where)
        seed = int(doc.get("rng_seed", 0)) if seed_override is None else seed_override
        return SceneConfig(
            field_extent=(ex, ey),
            rock_count=int(_require(doc, "rock_count", where)),
            rover_pose_truth=pose,
            rig=rig_from_doc(_require(doc, "rig", where), where),
            terrain=terrain,
            pixel_noise_sigma=float(doc.get("pixel_noise_sigma_px", 0.0)),
            uav_noise_sigma=float(doc.get("uav_noise_sigma_m", 0.0)),
            outlier_fraction=float(doc.get("outlier_fraction", 0.0)),
            rng_seed=seed,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: bad scene config: {exc}") from exc


_MATCH_KEYS = {
    "iterations",
    "inlier_threshold",
    "min_inliers",
    "rng_seed",
    "shape_tolerance",
    "anisotropy_bound",
    "area_epsilon",
    "max_candidates",
}


def parse_pipeline_config(
    doc: Mapping[str, Any], where: str, seed_override: int | None = None
) -> PipelineConfig:
    if doc.get("format") != PIPELINE_CONFIG_FORMAT:
        raise ConfigError(
            f"{where}: format tag {doc.get('format')!r}, expected {PIPELINE_CONFIG_FORMAT!r}"
        )
    match_doc = dict(doc.get("match", {}))
    unknown = set(match_doc) - _MATCH_KEYS
    if unknown:
        raise ConfigError(f"{where}: unknown match keys {sorted(unknown)}")
    if seed_override is not None:
        match_doc["rng_seed"] = seed_override
    res_doc = dict(doc.get("resection", {}))
    unknown = set(res_doc) - {"tol", "max_iter"}
    if unknown:
        raise ConfigError(f"{where}: unknown resection keys {sorted(unknown)}")
    try:
        return PipelineConfig(
            rig=rig_from_doc(_require(doc, "rig", where), where),
            camera_tilt_deg=float(_require(doc, "camera_tilt_deg", where)),
            max_range=float(doc.get("max_range_m", 15.0)),
            match=MatchConfig(**match_doc),
            resect_tol=float(res_doc.get("tol", 1e-12)),
            resect_max_iter=int(res_doc.get("max_iter", 200)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: bad pipeline config: {exc}") from exc


def localize_scene(
    uav: UavMap,
    rover: RoverObservations,
    cfg: PipelineConfig,
    input_digests: Mapping[str, str] | None = None,
) -> LocalizationResult:
    """Run the full localization chain on in-memory scene data."""
    matches: list[FeatureMatch] = []
    dropped_rows = 0
    for xl, yl, xr, yr in rover.stereo_matches:
        try:
            matches.append(FeatureMatch(left=Point2(xl, yl), right=Point2(xr, yr)))
        except (ValueError, NonPositiveDisparity):
            dropped_rows += 1
    if len(matches) < 3:
        raise IntersectionError(
            f"only {len(matches)} usable stereo matches ({dropped_rows} dropped)"
        )
    tri = delaunay([m.left for m in matches])

    observations: list[RockObservation] = []
    dropped_detections = 0
    for det_id, px in rover.detections:
        try:
            right = transfer_point(tri, matches, px)
            cam = forward_intersect(cfg.rig, px, right)
        except (OutsideHull, DegenerateTriangle, NonPositiveDisparity):
            dropped_detections += 1
            continue
        observations.append(
            RockObservation(
                pixel_left=px, pixel_right=right, camera_point=cam, rock_id=det_id
            )
        )

    near = filter_near_rocks(observations, max_range=cfg.max_range)
    beyond = len(observations) - len(near)
    ground = rocks_to_ground_plane(near, tilt=math.radians(cfg.camera_tilt_deg))

    rover_set = RockSet(points=ground, frame_label=FrameLabel.ROVER_GROUND)
    uav_set = RockSet(
        points=[Point2(p.x, p.y) for _, p in uav.records],
        frame_label=FrameLabel.UAV_MAP,
    )
    hyp = match_patterns(rover_set, uav_set, cfg.match)

    rays = []
    matched_ids = []
    for i, j in hyp.correspondences:
        px = near[i].pixel_left
        rays.append(
            RayObservation(
                pixel=px,
                direction=pixel_to_ray(cfg.rig, px),
                world_point=uav.records[j][1],
            )
        )
        matched_ids.append((near[i].rock_id, uav.records[j][0]))
    report = resect(rays, tol=cfg.resect_tol, max_iter=cfg.resect_max_iter)

    provenance = {
        "inputs": dict(input_digests or {}),
        "config_digest": cfg.digest(),
        "match_seed": cfg.match.rng_seed,
        "kernel_backend": backend_name(),
    }
    return LocalizationResult(
        planar_position=report.planar_position,
        pose=report.pose,
        match=hyp,
        resection=report,
        matched_ids=tuple(matched_ids),
        dropped_stereo_rows=dropped_rows,
        dropped_detections=dropped_detections,
        beyond_range=beyond,
        provenance=provenance,
        ground_points=tuple(ground),
        map_points=tuple(uav_set.points),
    )


def localize_dir(scene_dir: str | Path, cfg: PipelineConfig) -> LocalizationResult:
    """Load a scene directory and localize against it."""
    scene = Path(scene_dir)
    for name in (
        fileio.UAV_ROCKS_NAME,
        fileio.ROVER_DETECTIONS_NAME,
        fileio.STEREO_MATCHES_NAME,
    ):
        if not (scene / name).is_file():
            raise ConfigError(f"missing input file: {scene / name}")
    uav = fileio.read_uav_rocks(scene / fileio.UAV_ROCKS_NAME)
    detections = fileio.read_rover_detections(scene / fileio.ROVER_DETECTIONS_NAME)
    rows = fileio.read_stereo_matches(scene / fileio.STEREO_MATCHES_NAME)
    digests = {
        name: fileio.sha256_digest(scene / name)
        for name in (
            fileio.UAV_ROCKS_NAME,
            fileio.ROVER_DETECTIONS_NAME,
            fileio.STEREO_MATCHES_NAME,
        )
    }
    rover = RoverObservations(detections=detections, stereo_matches=rows)
    return localize_scene(uav, rover, cfg, input_digests=digests)


@dataclass(frozen=True, slots=True)
class EvaluationReport:
    """Per-axis and total planar error of a computed position vs truth."""

    delta_x: float
    delta_y: float
    total: float
    computed: tuple[float, float]
    truth: tuple[float, float]

    def as_text(self) -> str:
        return (
            f"computed  {self.computed[0]:.4f} {self.computed[1]:.4f}\n"
            f"truth     {self.truth[0]:.4f} {self.truth[1]:.4f}\n"
            f"delta_x   {self.delta_x:.4f}\n"
            f"delta_y   {self.delta_y:.4f}\n"
            f"total     {self.total:.4f}\n"
        )


def _planar_from_doc(doc: Mapping[str, Any], where: str) -> tuple[float, float]:
    try:
        x, y = (float(v) for v in _require(doc, "planar_position", where))
        return x, y
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: bad planar_position: {exc}") from exc


def evaluate_positions(
    computed: tuple[float, float], truth: tuple[float, float]
) -> EvaluationReport:
    dx = computed[0] - truth[0]
    dy = computed[1] - truth[1]
    return EvaluationReport(
        delta_x=dx,
        delta_y=dy,
        total=math.hypot(dx, dy),
        computed=computed,
        truth=truth,
    )


def evaluate_files(result_path: str | Path, truth_path: str | Path) -> EvaluationReport:
    """Compare a result document against a truth document (frames must agree)."""
    result = fileio.read_json_document(result_path, expect_format=fileio.RESULT_FORMAT)
    truth = fileio.read_json_document(truth_path)
    if truth.get("format") not in (fileio.TRUTH_FORMAT, fileio.RESULT_FORMAT):
        raise ConfigError(f"{truth_path}: not a truth or result document")
    rf = result.get("frame", WORLD_FRAME)
    tf = truth.get("frame", WORLD_FRAME)
    if rf != tf:
        raise ConfigError(f"frame mismatch: result {rf!r} vs truth {tf!r}")
    return evaluate_positions(
        _planar_from_doc(result, str(result_path)),
        _planar_from_doc(truth, str(truth_path)),
    )
