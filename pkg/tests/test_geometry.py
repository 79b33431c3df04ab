"""Tests for the geometric primitives.

Hand-worked values used below:

  affine (2,0,1, 0,3,2) sends (x,y) to (2x+1, 3y+2), so
    (1,0) -> (3,2)  and  (0,1) -> (1,5).
  Fitting the three pairs ((0,0),(1,2)), ((1,0),(3,2)), ((0,1),(1,5))
  has to recover exactly those six coefficients: the constant terms come
  from the image of the origin, the linear terms from the axis images.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from rockloc.errors import DegenerateSample, NotARotation, ZeroVector
from rockloc.geometry import (
    Affine2,
    Point2,
    Point3,
    RotationMatrix,
    UnitQuaternion,
    affine_apply,
    affine_from_pairs,
    affine_lsq,
    matrix_to_quat,
    projection_matrix,
    quat_rotate,
    quat_to_matrix,
)


def test_point_constructors_reject_non_finite():
    with pytest.raises(ValueError):
        Point2(float("nan"), 0.0)
    with pytest.raises(ValueError):
        Point3(0.0, float("inf"), 0.0)
    with pytest.raises(ValueError):
        Affine2(1.0, 0.0, float("nan"), 0.0, 1.0, 0.0)


def test_affine_apply_identity():
    t = Affine2.identity()
    out = affine_apply(t, Point2(3.5, -2.0))
    assert out == Point2(3.5, -2.0)


def test_affine_apply_known_coefficients():
    t = Affine2(2.0, 0.0, 1.0, 0.0, 3.0, 2.0)
    assert affine_apply(t, (1.0, 0.0)) == Point2(3.0, 2.0)
    assert affine_apply(t, (0.0, 1.0)) == Point2(1.0, 5.0)


def test_affine_from_pairs_fixed_points_force_identity():
    pts = ((0.0, 0.0), (1.0, 0.0), (0.0, 1.0))
    t = affine_from_pairs(pts, pts)
    assert t.as_tuple() == pytest.approx((1, 0, 0, 0, 1, 0), abs=1e-12)


def test_affine_from_pairs_recovers_known_transform():
    src = ((0.0, 0.0), (1.0, 0.0), (0.0, 1.0))
    dst = ((1.0, 2.0), (3.0, 2.0), (1.0, 5.0))
    t = affine_from_pairs(src, dst)
    assert t.as_tuple() == pytest.approx((2, 0, 1, 0, 3, 2), abs=1e-12)


def test_affine_from_pairs_collinear_source_rejected():
    src = ((0.0, 0.0), (1.0, 1.0), (2.0, 2.0))
    dst = ((0.0, 0.0), (1.0, 0.0), (0.0, 1.0))
    with pytest.raises(DegenerateSample):
        affine_from_pairs(src, dst)


def test_affine_from_pairs_degenerate_destination_allowed():
    # Only the source triangle must span the plane.
    src = ((0.0, 0.0), (1.0, 0.0), (0.0, 1.0))
    dst = ((0.0, 0.0), (1.0, 1.0), (2.0, 2.0))
    t = affine_from_pairs(src, dst)
    for s, d in zip(src, dst):
        out = affine_apply(t, s)
        assert (out.x, out.y) == pytest.approx(d, abs=1e-12)


def test_affine_from_pairs_interpolates_random_samples():
    for seed in range(50):
        rng = np.random.default_rng(seed)
        src = rng.uniform(-10, 10, (3, 2))
        dst = rng.uniform(-10, 10, (3, 2))
        # skip the (rare) nearly collinear draws
        e1 = src[1] - src[0]
        e2 = src[2] - src[0]
        area = 0.5 * abs(e1[0] * e2[1] - e1[1] * e2[0])
        if area < 1e-3:
            continue
        t = affine_from_pairs(src, dst)
        for s, d in zip(src, dst):
            out = affine_apply(t, s)
            assert math.hypot(out.x - d[0], out.y - d[1]) < 1e-9


def test_affine_composition_matches_matrix_product():
    rng = np.random.default_rng(7)
    for _ in range(100):
        t1 = Affine2(*rng.uniform(-2, 2, 6))
        t2 = Affine2(*rng.uniform(-2, 2, 6))
        p = Point2(*rng.uniform(-1, 1, 2))
        stepwise = affine_apply(t2, affine_apply(t1, p))
        composed = t2.as_matrix() @ t1.as_matrix() @ np.array([p.x, p.y, 1.0])
        assert abs(stepwise.x - composed[0]) < 1e-12
        assert abs(stepwise.y - composed[1]) < 1e-12


def test_affine_lsq_matches_exact_fit_on_three_pairs():
    src = ((0.0, 0.0), (2.0, 1.0), (-1.0, 3.0))
    dst = ((4.0, -2.0), (0.5, 1.0), (3.0, 3.0))
    exact = affine_from_pairs(src, dst)
    lsq = affine_lsq(list(zip(src, dst)))
    assert lsq.as_tuple() == pytest.approx(exact.as_tuple(), abs=1e-9)


def test_affine_lsq_recovers_transform_from_ten_clean_pairs():
    truth = Affine2(1.2, -0.3, 5.0, 0.4, 0.9, -3.0)
    rng = np.random.default_rng(3)
    pairs = []
    for _ in range(10):
        p = Point2(*rng.uniform(-5, 5, 2))
        pairs.append((p, affine_apply(truth, p)))
    fit = affine_lsq(pairs)
    assert fit.as_tuple() == pytest.approx(truth.as_tuple(), abs=1e-9)


def test_affine_lsq_noisy_residual_stays_within_noise_scale():
    truth = Affine2(0.8, 0.1, -2.0, -0.2, 1.1, 4.0)
    sigma = 0.05
    rng = np.random.default_rng(11)
    pairs = []
    for _ in range(40):
        p = rng.uniform(-5, 5, 2)
        q = affine_apply(truth, p)
        noisy = (q.x + rng.normal(0, sigma), q.y + rng.normal(0, sigma))
        pairs.append((tuple(p), noisy))
    fit = affine_lsq(pairs)
    residuals = []
    for s, d in pairs:
        out = affine_apply(fit, s)
        residuals.append((out.x - d[0]) ** 2 + (out.y - d[1]) ** 2)
    rms = math.sqrt(sum(residuals) / len(residuals))
    assert rms <= 2 * sigma


def test_affine_lsq_agrees_with_direct_lstsq_oracle():
    # Independent solve of the same normal problem through numpy alone.
    rng = np.random.default_rng(19)
    src = rng.uniform(-3, 3, (12, 2))
    dst = rng.uniform(-3, 3, (12, 2))
    fit = affine_lsq(list(zip(src, dst)))
    A = np.column_stack([src, np.ones(len(src))])
    sol = np.linalg.lstsq(A, dst, rcond=None)[0]
    expect = (sol[0, 0], sol[1, 0], sol[2, 0], sol[0, 1], sol[1, 1], sol[2, 1])
    assert fit.as_tuple() == pytest.approx(expect, abs=1e-9)


def test_affine_lsq_rejects_short_and_collinear_input():
    with pytest.raises(DegenerateSample):
        affine_lsq([((0, 0), (1, 1)), ((1, 1), (2, 2))])
    collinear = [((float(i), float(i)), (0.0, float(i))) for i in range(6)]
    with pytest.raises(DegenerateSample):
        affine_lsq(collinear)


def test_projection_matrix_axis_aligned():
    V = projection_matrix(Point3(0.0, 0.0, 1.0)).m
    np.testing.assert_allclose(V, np.diag([0.0, 0.0, 1.0]), atol=1e-15)


def test_projection_matrix_diagonal_direction():
    V = projection_matrix((1.0, 1.0, 0.0)).m
    expect = np.array([[0.5, 0.5, 0.0], [0.5, 0.5, 0.0], [0.0, 0.0, 0.0]])
    np.testing.assert_allclose(V, expect, atol=1e-15)


def test_projection_matrix_zero_vector_rejected():
    with pytest.raises(ZeroVector):
        projection_matrix((0.0, 0.0, 0.0))


def test_projection_matrix_properties_random_directions():
    """Symmetric, idempotent, trace one, for any nonzero direction."""
    rng = np.random.default_rng(23)
    for _ in range(1000):
        v = rng.normal(0, 1, 3)
        if np.linalg.norm(v) < 1e-6:
            continue
        V = projection_matrix(v).m
        assert np.abs(V - V.T).max() < 1e-12
        assert np.abs(V @ V - V).max() < 1e-12
        assert abs(np.trace(V) - 1.0) < 1e-12


def test_quaternion_normalizes_on_construction():
    q = UnitQuaternion(2.0, 0.0, 0.0, 0.0)
    assert q.w == 1.0
    n = math.sqrt(q.w**2 + q.x**2 + q.y**2 + q.z**2)
    assert abs(n - 1.0) < 1e-12
    with pytest.raises(ZeroVector):
        UnitQuaternion(0.0, 0.0, 0.0, 0.0)


def test_identity_quaternion_gives_identity_matrix():
    M = quat_to_matrix(UnitQuaternion.identity()).m
    np.testing.assert_allclose(M, np.eye(3), atol=1e-15)


def test_quarter_turn_about_z():
    half = math.radians(45.0)
    q = UnitQuaternion(math.cos(half), 0.0, 0.0, math.sin(half))
    out = quat_rotate(q, Point3(1.0, 0.0, 0.0))
    assert (out.x, out.y, out.z) == pytest.approx((0.0, 1.0, 0.0), abs=1e-12)


def test_quat_matrix_round_trip_sign_invariant():
    rng = np.random.default_rng(31)
    for _ in range(1000):
        q = UnitQuaternion(*rng.normal(0, 1, 4))
        back = matrix_to_quat(quat_to_matrix(q))
        a = q.as_array()
        b = back.as_array()
        # q and -q are the same rotation
        assert min(np.abs(a - b).max(), np.abs(a + b).max()) < 1e-12


def test_matrix_to_quat_exercises_all_branches():
    # Near-half-turns about each axis push a different diagonal branch.
    axes = [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)]
    half = math.radians(89.5)
    for ax in axes:
        q = UnitQuaternion(math.cos(half), *(math.sin(half) * a for a in ax))
        back = matrix_to_quat(quat_to_matrix(q))
        a, b = q.as_array(), back.as_array()
        assert min(np.abs(a - b).max(), np.abs(a + b).max()) < 1e-12


def test_rotation_matrix_validation():
    with pytest.raises(NotARotation):
        RotationMatrix(np.eye(3) + 1e-3)
    with pytest.raises(NotARotation):
        RotationMatrix(np.diag([1.0, 1.0, -1.0]))  # reflection
    with pytest.raises(NotARotation):
        matrix_to_quat(np.eye(3) * 1.01)
    # a tiny orthogonality defect is tolerated
    RotationMatrix(np.eye(3) + 1e-9)


def test_rotation_matrix_is_immutable():
    M = RotationMatrix.identity()
    with pytest.raises(ValueError):
        M.m[0, 0] = 2.0
