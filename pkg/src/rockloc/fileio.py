"""File formats: whitespace-delimited numeric tables and JSON documents.

Tables are UTF-8 lines of space-separated values with '#' comment lines;
floats are written with repr() so a read-back is bit-exact.  Structured
records (truth, results, configs) are JSON with sorted keys and a
"format" tag.  Both forms are deterministic byte-for-byte, which is
what lets result digests double as reproducibility checks.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Any, Sequence

from .errors import ConfigError
from .geometry import Point2, Point3
from .resection import Pose, UnitQuaternion
from .simulate import GroundTruth, RoverObservations, UavMap

UAV_ROCKS_NAME = "uav_rocks.txt"
ROVER_DETECTIONS_NAME = "rover_detections.txt"
STEREO_MATCHES_NAME = "stereo_matches.txt"
TRUTH_NAME = "truth.json"

TRUTH_FORMAT = "rockloc-truth"
RESULT_FORMAT = "rockloc-result"


def sha256_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _fmt(v: float) -> str:
    return repr(float(v))


def _data_lines(path: Path) -> list[tuple[int, list[str]]]:
    out = []
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        out.append((lineno, line.split()))
    return out


def _parse_row(
    path: Path, lineno: int, parts: list[str], width: int, int_cols: int
) -> list[float]:
    if len(parts) != width:
        raise ConfigError(
            f"{path}:{lineno}: expected {width} columns, got {len(parts)}"
        )
    row: list[float] = []
    for k, text in enumerate(parts):
        try:
            row.append(float(int(text) if k < int_cols else float(text)))
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value {text!r}") from exc
    for v in row:
        if not math.isfinite(v):
            raise ConfigError(f"{path}:{lineno}: non-finite value")
    return row


def write_uav_rocks(path: str | Path, uav: UavMap) -> None:
    lines = ["# map rock records", "# columns: id x y z"]
    for rock_id, p in uav.records:
        lines.append(f"{rock_id} {_fmt(p.x)} {_fmt(p.y)} {_fmt(p.z)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_uav_rocks(path: str | Path) -> UavMap:
    path = Path(path)
    records = []
    for lineno, parts in _data_lines(path):
        rid, x, y, z = _parse_row(path, lineno, parts, 4, 1)
        records.append((int(rid), Point3(x, y, z)))
    return UavMap(records=tuple(records))


def write_rover_detections(
    path: str | Path, detections: Sequence[tuple[int, Point2]]
) -> None:
    lines = ["# left-image rock centroids", "# columns: id x_px y_px"]
    for det_id, p in detections:
        lines.append(f"{det_id} {_fmt(p.x)} {_fmt(p.y)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_rover_detections(path: str | Path) -> tuple[tuple[int, Point2], ...]:
    path = Path(path)
    out = []
    for lineno, parts in _data_lines(path):
        did, x, y = _parse_row(path, lineno, parts, 3, 1)
        out.append((int(did), Point2(x, y)))
    return tuple(out)


def write_stereo_matches(
    path: str | Path, rows: Sequence[tuple[float, float, float, float]]
) -> None:
    lines = ["# stereo terrain feature matches", "# columns: xl yl xr yr"]
    for xl, yl, xr, yr in rows:
        lines.append(f"{_fmt(xl)} {_fmt(yl)} {_fmt(xr)} {_fmt(yr)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_stereo_matches(
    path: str | Path,
) -> tuple[tuple[float, float, float, float], ...]:
    path = Path(path)
    out = []
    for lineno, parts in _data_lines(path):
        xl, yl, xr, yr = _parse_row(path, lineno, parts, 4, 0)
        out.append((xl, yl, xr, yr))
    return tuple(out)


def write_json_document(path: str | Path, doc: dict[str, Any]) -> None:
    Path(path).write_text(
        json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def read_json_document(path: str | Path, expect_format: str | None = None) -> dict:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    if expect_format is not None and doc.get("format") != expect_format:
        raise ConfigError(
            f"{path}: format tag {doc.get('format')!r}, expected {expect_format!r}"
        )
    return doc


def _pose_doc(pose: Pose) -> dict[str, Any]:
    q = pose.rotation
    p = pose.position
    return {
        "quaternion_wxyz": [q.w, q.x, q.y, q.z],
        "position": [p.x, p.y, p.z],
    }


def pose_from_doc(doc: dict[str, Any], where: str) -> Pose:
    try:
        w, x, y, z = (float(v) for v in doc["quaternion_wxyz"])
        px, py, pz = (float(v) for v in doc["position"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: bad pose record: {exc}") from exc
    return Pose(rotation=UnitQuaternion(w, x, y, z), position=Point3(px, py, pz))


def write_truth(path: str | Path, truth: GroundTruth) -> None:
    doc = {
        "format": TRUTH_FORMAT,
        "frame": "world",
        "rover_pose": _pose_doc(truth.rover_pose),
        "planar_position": [truth.rover_pose.position.x, truth.rover_pose.position.y],
        "rock_world": [[p.x, p.y, p.z] for p in truth.rock_world],
        "visible": list(truth.visible),
        "correspondences": [list(pair) for pair in truth.correspondences],
    }
    write_json_document(path, doc)


def read_truth(path: str | Path) -> GroundTruth:
    doc = read_json_document(path, expect_format=TRUTH_FORMAT)
    where = str(path)
    try:
        pose = pose_from_doc(doc["rover_pose"], where)
        rocks = tuple(Point3(*map(float, row)) for row in doc["rock_world"])
        visible = tuple(bool(v) for v in doc["visible"])
        pairs = tuple((int(a), int(b)) for a, b in doc["correspondences"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: bad truth document: {exc}") from exc
    return GroundTruth(
        rock_world=rocks, rover_pose=pose, visible=visible, correspondences=pairs
    )


def write_scene_dir(
    out_dir: str | Path, truth: GroundTruth, uav: UavMap, rover: RoverObservations
) -> dict[str, str]:
    """Write the four scene files; returns {filename: sha256}."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_uav_rocks(out / UAV_ROCKS_NAME, uav)
    write_rover_detections(out / ROVER_DETECTIONS_NAME, rover.detections)
    write_stereo_matches(out / STEREO_MATCHES_NAME, rover.stereo_matches)
    write_truth(out / TRUTH_NAME, truth)
    return {
        name: sha256_digest(out / name)
        for name in (
            UAV_ROCKS_NAME,
            ROVER_DETECTIONS_NAME,
            STEREO_MATCHES_NAME,
            TRUTH_NAME,
        )
    }
