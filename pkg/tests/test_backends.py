"""Bit-parity between the native consensus kernel and its numpy twin.

Both implementations are part of one contract: same expression order,
same tie-breaks, same candidate walk.  Equality below is exact (==),
not approximate; a single ULP of drift is a failure.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from rockloc import _backend, _consensus_py
from rockloc.geometry import Point2
from rockloc.matching import FrameLabel, MatchConfig, RockSet, match_patterns

native = pytest.importorskip(
    "rockloc._consensus", reason="native kernel extension not built"
)


def random_sets(seed, n=18, m=24):
    rng = np.random.default_rng(seed)
    rov = []
    while len(rov) < n:
        c = rng.uniform(0, 12, 2)
        if all(math.dist(c, p) > 0.5 for p in rov):
            rov.append(tuple(c))
    th = rng.uniform(0, 2 * math.pi)
    s = rng.uniform(0.8, 1.3)
    A = (s * math.cos(th), -s * math.sin(th), rng.uniform(-5, 5),
         s * math.sin(th), s * math.cos(th), rng.uniform(-5, 5))
    uav = [
        (A[0] * x + A[1] * y + A[2] + rng.normal(0, 0.02),
         A[3] * x + A[4] * y + A[5] + rng.normal(0, 0.02))
        for x, y in rov
    ]
    while len(uav) < m:
        c = rng.uniform(-10, 20, 2)
        if all(math.dist(c, p) > 0.5 for p in uav):
            uav.append(tuple(c))
    return rov, uav


def test_backend_module_identifies_itself():
    assert _consensus_py.BACKEND == "python"
    assert native.BACKEND == "native"
    assert _backend.backend_name() in ("python", "native")


def test_fit3_bit_identical():
    rng = np.random.default_rng(71)
    for _ in range(500):
        src = rng.uniform(-20, 20, (3, 2))
        dst = rng.uniform(-20, 20, (3, 2))
        a = _consensus_py.fit3(src, dst)
        b = native.fit3(src, dst)
        if a is None or b is None:
            assert a == b
            continue
        assert tuple(a) == tuple(b)


def test_fit3_degenerate_agreement():
    src = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])
    dst = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    assert _consensus_py.fit3(src, dst) is None
    assert native.fit3(src, dst) is None


def test_greedy_assign_bit_identical():
    rng = np.random.default_rng(73)
    for _ in range(300):
        n = int(rng.integers(1, 30))
        m = int(rng.integers(1, 30))
        txy = rng.uniform(0, 10, (n, 2))
        uxy = rng.uniform(0, 10, (m, 2))
        thr = float(rng.uniform(0.1, 3.0))
        pa, da = _consensus_py.greedy_assign(txy, uxy, thr)
        pb, db = native.greedy_assign(txy, uxy, thr)
        assert np.array_equal(np.asarray(pa), np.asarray(pb))
        assert np.array_equal(np.asarray(da), np.asarray(db))


def test_greedy_assign_exact_tie_breaks_agree():
    # symmetric cross: distances tie exactly in floating point
    txy = np.array([[0.0, 0.0], [2.0, 0.0]])
    uxy = np.array([[1.0, 0.0], [-1.0, 0.0], [3.0, 0.0]])
    pa, da = _consensus_py.greedy_assign(txy, uxy, 1.5)
    pb, db = native.greedy_assign(txy, uxy, 1.5)
    assert np.array_equal(np.asarray(pa), np.asarray(pb))
    assert np.array_equal(np.asarray(da), np.asarray(db))
    assert np.asarray(pa).tolist() == [[0, 0], [1, 2]] or np.asarray(pa).tolist() == [
        [0, 1],
        [1, 0],
    ]


def test_match_patterns_bit_identical_across_kernels():
    """End-to-end: full trial evaluation through both kernels."""
    for seed in range(6):
        rov_pts, uav_pts = random_sets(seed)
        rov = RockSet(points=tuple(rov_pts), frame_label=FrameLabel.ROVER_GROUND)
        uav = RockSet(points=tuple(uav_pts), frame_label=FrameLabel.UAV_MAP)
        cfg = MatchConfig(iterations=400, rng_seed=seed)
        a = match_patterns(rov, uav, cfg, kernels=_consensus_py)
        b = match_patterns(rov, uav, cfg, kernels=native)
        assert a.transform.as_tuple() == b.transform.as_tuple()
        assert a.correspondences == b.correspondences
        assert a.residual == b.residual
        assert a.inlier_count == b.inlier_count


def test_evaluate_trials_bit_identical_raw_outputs():
    from rockloc.matching import _sample_triples, _shape_table

    for seed in (11, 12, 13):
        rov_pts, uav_pts = random_sets(seed, n=14, m=20)
        R = np.array(rov_pts)
        U = np.array(uav_pts)
        combos, sides, sig = _shape_table(U)
        rng = np.random.default_rng(seed)
        rov_tri, uav_tri = _sample_triples(rng, len(R), len(U), 250)
        args = (R, U, rov_tri, uav_tri, combos, sides, sig, 0.3, 1e-9, 10.0, 0.25, 8)
        ia, ra, sa, dsa = _consensus_py.evaluate_trials(*args)
        ib, rb, sb, dsb = native.evaluate_trials(*args)
        assert np.array_equal(np.asarray(ia), np.asarray(ib))
        assert np.array_equal(np.asarray(ra), np.asarray(rb))
        assert np.array_equal(np.asarray(sa), np.asarray(sb))
        assert np.array_equal(np.asarray(dsa), np.asarray(dsb))


def test_environment_override_forces_backend(tmp_path):
    import subprocess
    import sys

    code = (
        "from rockloc._backend import backend_name; print(backend_name())"
    )
    for choice, expect in (("python", "python"), ("native", "native")):
        out = subprocess.run(
            [sys.executable, "-c", code],
            capture_output=True,
            text=True,
            env={"PATH": "/usr/bin:/bin", "ROCKLOC_KERNELS": choice},
        )
        assert out.returncode == 0, out.stderr
        assert out.stdout.strip() == expect
