"""Tests for the plain-text table formats, JSON documents and SVG plots.

Table files carry '#' comments and repr() floats, so a write/read round
trip must be exact to the last bit, and two writes of the same data must
be byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from rockloc.errors import ConfigError
from rockloc.fileio import (
    ROVER_DETECTIONS_NAME,
    STEREO_MATCHES_NAME,
    TRUTH_FORMAT,
    TRUTH_NAME,
    UAV_ROCKS_NAME,
    read_json_document,
    read_rover_detections,
    read_stereo_matches,
    read_truth,
    read_uav_rocks,
    sha256_digest,
    write_json_document,
    write_scene_dir,
    write_stereo_matches,
    write_truth,
    write_uav_rocks,
)
from rockloc.geometry import Point2, Point3
from rockloc.plots import write_localization_plots
from rockloc.matching import Affine2
from rockloc.simulate import (
    SceneConfig,
    UavMap,
    generate_scene,
    pose_from_ground,
)
from rockloc.stereo import StereoRig

RIG = StereoRig(1000.0, Point2(800.0, 600.0), 0.5, (1600, 1200))


def sample_scene(seed=5, **kw):
    cfg = SceneConfig(
        field_extent=(20.0, 20.0),
        rock_count=25,
        rover_pose_truth=pose_from_ground(Point3(10.0, -2.0, 1.6), 90.0, 15.0),
        rig=RIG,
        rng_seed=seed,
        **kw,
    )
    return generate_scene(cfg)


def test_uav_rocks_round_trip(tmp_path):
    # awkward values on purpose: negatives, tiny, large, non-round ids
    uav = UavMap(
        records=(
            (3, Point3(-1.25, 1e-17, 901386.6842)),
            (0, Point3(0.1 + 0.2, 7.0, -2.5)),
            (11, Point3(5.0, 5.000000000000001, 0.0)),
        )
    )
    p = tmp_path / UAV_ROCKS_NAME
    write_uav_rocks(p, uav)
    back = read_uav_rocks(p)
    assert back.records == uav.records


def test_table_writes_are_byte_stable(tmp_path):
    _, uav, rover = sample_scene()
    a = tmp_path / "a.txt"
    b = tmp_path / "b.txt"
    write_uav_rocks(a, uav)
    write_uav_rocks(b, uav)
    assert a.read_bytes() == b.read_bytes()
    assert sha256_digest(a) == sha256_digest(b)


def test_sha256_digest_matches_hashlib(tmp_path):
    p = tmp_path / "blob.txt"
    p.write_bytes(b"rocks\n")
    assert sha256_digest(p) == hashlib.sha256(b"rocks\n").hexdigest()


def test_detections_and_matches_round_trip(tmp_path):
    _, _, rover = sample_scene(pixel_noise_sigma=0.3)
    dp = tmp_path / ROVER_DETECTIONS_NAME
    sp = tmp_path / STEREO_MATCHES_NAME
    from rockloc.fileio import write_rover_detections

    write_rover_detections(dp, rover.detections)
    write_stereo_matches(sp, rover.stereo_matches)
    assert read_rover_detections(dp) == rover.detections
    assert read_stereo_matches(sp) == rover.stereo_matches


def test_tables_skip_comments_and_blank_lines(tmp_path):
    p = tmp_path / "rocks.txt"
    p.write_text(
        "# leading comment\n"
        "\n"
        "4 1.5 -2.5 0.0\n"
        "   \n"
        "# interior comment\n"
        "7 3.0 4.0 0.25\n"
    )
    uav = read_uav_rocks(p)
    assert uav.records == (
        (4, Point3(1.5, -2.5, 0.0)),
        (7, Point3(3.0, 4.0, 0.25)),
    )


def test_table_parse_errors_carry_location(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("1 2.0 3.0\n")  # one column short
    with pytest.raises(ConfigError) as exc:
        read_uav_rocks(p)
    assert "bad.txt" in str(exc.value)

    p.write_text("1 2.0 nan 4.0\n")
    with pytest.raises(ConfigError):
        read_uav_rocks(p)

    p.write_text("x 2.0 3.0 4.0\n")
    with pytest.raises(ConfigError):
        read_uav_rocks(p)


def test_stereo_matches_reject_bad_rows(tmp_path):
    p = tmp_path / "sm.txt"
    p.write_text("100.0 50.0 90.0\n")
    with pytest.raises(ConfigError):
        read_stereo_matches(p)
    p.write_text("100.0 inf 90.0 50.0\n")
    with pytest.raises(ConfigError):
        read_stereo_matches(p)


def test_json_document_round_trip(tmp_path):
    p = tmp_path / "doc.json"
    doc = {"format": "rockloc-test", "b": [1.5, 2.5], "a": {"nested": True}}
    write_json_document(p, doc)
    text = p.read_text()
    assert text.endswith("\n")
    # keys are sorted for byte stability
    assert text.index('"a"') < text.index('"b"') < text.index('"format"')
    back = read_json_document(p, expect_format="rockloc-test")
    assert back == doc


def test_json_document_format_mismatch(tmp_path):
    p = tmp_path / "doc.json"
    write_json_document(p, {"format": "other"})
    with pytest.raises(ConfigError):
        read_json_document(p, expect_format="rockloc-test")
    q = tmp_path / "broken.json"
    q.write_text("{not json")
    with pytest.raises(ConfigError):
        read_json_document(q)


def test_truth_round_trip(tmp_path):
    truth, _, _ = sample_scene(seed=9)
    p = tmp_path / TRUTH_NAME
    write_truth(p, truth)
    doc = json.loads(p.read_text())
    assert doc["format"] == TRUTH_FORMAT
    assert doc["frame"] == "world"
    back = read_truth(p)
    assert back.rock_world == truth.rock_world
    assert back.visible == truth.visible
    assert back.correspondences == truth.correspondences
    assert back.rover_pose.position == truth.rover_pose.position
    q0 = truth.rover_pose.rotation.as_array()
    q1 = back.rover_pose.rotation.as_array()
    assert np.abs(q0 - q1).max() < 1e-15


def test_write_scene_dir_full_layout(tmp_path):
    truth, uav, rover = sample_scene(seed=12)
    digests = write_scene_dir(tmp_path, truth, uav, rover)
    assert set(digests) == {
        UAV_ROCKS_NAME,
        ROVER_DETECTIONS_NAME,
        STEREO_MATCHES_NAME,
        TRUTH_NAME,
    }
    for name, digest in digests.items():
        path = tmp_path / name
        assert path.exists()
        assert sha256_digest(path) == digest
    assert read_uav_rocks(tmp_path / UAV_ROCKS_NAME).records == uav.records


def make_points(seed, n):
    rng = np.random.default_rng(seed)
    return [Point2(*p) for p in rng.uniform(0, 10, (n, 2))]


def test_plots_are_valid_svg(tmp_path):
    rover_pts = make_points(1, 15)
    map_pts = make_points(2, 20)
    pairs = [(i, i) for i in range(12)]
    paths = write_localization_plots(
        tmp_path, rover_pts, map_pts, Affine2.identity(), pairs
    )
    assert len(paths) == 3
    for p in paths:
        root = ET.fromstring(p.read_text())
        assert root.tag.endswith("svg")
        assert float(root.attrib["width"]) > 0


def test_plot_point_and_line_counts(tmp_path):
    rover_pts = make_points(3, 10)
    map_pts = make_points(4, 14)
    pairs = [(i, i) for i in range(8)]
    paths = write_localization_plots(
        tmp_path, rover_pts, map_pts, Affine2.identity(), pairs
    )
    by_name = {p.name: p for p in paths}
    dist = ET.fromstring(by_name["rock_distributions.svg"].read_text())
    ns = {"svg": "http://www.w3.org/2000/svg"}
    circles = dist.findall(".//svg:circle", ns) or dist.findall(".//circle")
    assert len(circles) == 10 + 14
    corr = ET.fromstring(by_name["match_correspondences.svg"].read_text())
    lines = corr.findall(".//svg:line", ns) or corr.findall(".//line")
    assert len(lines) >= 8  # one link per pair (axes may add more)


def test_plots_handle_empty_pairs(tmp_path):
    rover_pts = make_points(5, 6)
    map_pts = make_points(6, 6)
    paths = write_localization_plots(
        tmp_path, rover_pts, map_pts, Affine2.identity(), []
    )
    for p in paths:
        ET.fromstring(p.read_text())  # parses
