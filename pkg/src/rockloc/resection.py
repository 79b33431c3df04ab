"""Camera pose from rock rays and matched world points.

Minimizes the object-space loss

    E(M, r_s) = sum_i || (I - V_i) * M * (r_i - r_s) ||^2,

the squared distance of each rotated, translated world point from its
observation ray, where V_i = v_i v_i^T / (v_i^T v_i) projects onto ray
direction v_i.  The solve alternates two exact conditional minimizers:

  * position: for fixed M the loss is quadratic in r_s and the normal
    equations give r_s in closed form;
  * rotation: for fixed r_s, iterating "project current points onto
    their rays, re-align by a quaternion absolute-orientation solve"
    never increases E (each alignment minimizes an upper bound that
    touches E at the current iterate).

No initial pose is required: the start comes from aligning centroid-
centered world directions to the observed rays.  Two robustness layers
sit on top of the plain alternation, both loss-guarded so the trace
stays non-increasing:

  * a damped joint step on (rotation, position) after each alternation
    round, accepted only when it lowers E (plain alternation contracts
    too slowly when a rotation can mimic a sideways shift, which is the
    usual camera-above-a-plane geometry here);
  * a small deterministic set of extra starts (the bootstrap rotated a
    half turn about each camera axis), because near-planar scenes admit
    a rival pose on the far side of the point field whose basin the
    bootstrap occasionally lands in; the candidate with the lowest
    final loss wins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateConfiguration, SingularNormalMatrix, ZeroVector
from .geometry import (
    Point2,
    Point3,
    RotationMatrix,
    UnitQuaternion,
    matrix_to_quat,
    quat_to_matrix,
)
from .stereo import StereoRig

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 200

# Inner rotation refinement limits; each step still only decreases E.
_INNER_MAX_ITER = 100
_INNER_STOP = 1e-14

# Damping ladder for the guarded joint step.
_DAMPING_MIN = 1e-12
_DAMPING_MAX = 1e10

# loss_trace entries may rise by at most this slack (float jitter).
TRACE_SLACK = 1e-12

_MACHINE_EPS = float(np.finfo(float).eps)


@dataclass(frozen=True, slots=True)
class RayObservation:
    """A sight ray to a known world point.

    direction is normalized at construction and must look forward
    (positive z) in the camera frame.
    """

    pixel: Point2
    direction: Point3
    world_point: Point3

    def __post_init__(self) -> None:
        d = self.direction
        n = math.sqrt(d.x * d.x + d.y * d.y + d.z * d.z)
        if n < 1e-12:
            raise ZeroVector("observation direction has (near-)zero norm")
        d = Point3(d.x / n, d.y / n, d.z / n)
        if d.z <= 0.0:
            raise ValueError(f"observation direction looks backward: z = {d.z:g}")
        object.__setattr__(self, "direction", d)


@dataclass(frozen=True, slots=True)
class Pose:
    """World-to-camera rotation plus camera position in world frame."""

    rotation: UnitQuaternion
    position: Point3

    def matrix(self) -> RotationMatrix:
        return quat_to_matrix(self.rotation)


@dataclass(frozen=True, slots=True)
class ResectionReport:
    """Solve outcome.

    converged means the last loss change passed the relative test
    |dE| <= tol * max(E_prev, floor), where floor keeps the denominator
    above the float noise of evaluating E itself, so a loss already at
    the numerical zero still counts as converged.
    """

    pose: Pose
    loss_trace: tuple[float, ...]
    iterations: int
    converged: bool
    planar_position: Point2

    def __post_init__(self) -> None:
        object.__setattr__(self, "loss_trace", tuple(float(e) for e in self.loss_trace))
        for k in range(1, len(self.loss_trace)):
            prev = self.loss_trace[k - 1]
            if self.loss_trace[k] > prev + TRACE_SLACK * max(1.0, prev):
                raise ValueError(
                    f"loss trace increases at step {k}: "
                    f"{prev:g} -> {self.loss_trace[k]:g}"
                )
        if (
            self.planar_position.x != self.pose.position.x
            or self.planar_position.y != self.pose.position.y
        ):
            raise ValueError("planar_position disagrees with pose position")


def pixel_to_ray(rig: StereoRig, pixel) -> Point3:
    """Unit camera-frame sight direction through a pixel."""
    px, py = (pixel.x, pixel.y) if isinstance(pixel, Point2) else map(float, pixel)
    x = (px - rig.principal_point.x) / rig.focal_length
    y = (py - rig.principal_point.y) / rig.focal_length
    n = math.sqrt(x * x + y * y + 1.0)
    return Point3(x / n, y / n, 1.0 / n)


def _arrays(obs: Sequence[RayObservation]) -> tuple[np.ndarray, np.ndarray]:
    r = np.array([[o.world_point.x, o.world_point.y, o.world_point.z] for o in obs])
    v = np.array([[o.direction.x, o.direction.y, o.direction.z] for o in obs])
    return r.reshape(len(obs), 3), v.reshape(len(obs), 3)


def _as_matrix(M) -> np.ndarray:
    if isinstance(M, RotationMatrix):
        return M.m
    return np.asarray(M, dtype=float).reshape(3, 3)


def _as_position(r_s) -> np.ndarray:
    if isinstance(r_s, Point3):
        return r_s.as_array()
    return np.asarray(r_s, dtype=float).reshape(3)


def _loss_core(M: np.ndarray, rs: np.ndarray, r: np.ndarray, v: np.ndarray) -> float:
    y = (r - rs) @ M.T
    along = np.einsum("ij,ij->i", v, y)
    e = y - v * along[:, None]
    total = 0.0
    for row in e:  # summed in input order
        total += float(row[0] * row[0] + row[1] * row[1] + row[2] * row[2])
    return total


def loss(M, r_s, obs: Sequence[RayObservation]) -> float:
    """E(M, r_s) over the observations; zero iff all points sit on rays."""
    r, v = _arrays(obs)
    return _loss_core(_as_matrix(M), _as_position(r_s), r, v)


def position_update(M, obs: Sequence[RayObservation]) -> Point3:
    """Closed-form minimizer of E over r_s for fixed M.

    Solves the normal equations of the quadratic loss about the world
    centroid (better conditioned under large coordinate offsets).
    """
    r, v = _arrays(obs)
    Mm = _as_matrix(M)
    W = v @ Mm  # rows are M^T v_i
    n = r.shape[0]
    A = n * np.eye(3) - W.T @ W
    lam = np.linalg.eigvalsh(A)
    if lam[-1] <= 0.0 or lam[0] <= 1e-12 * lam[-1]:
        raise SingularNormalMatrix(
            "observation rays leave the camera position unconstrained"
        )
    c = r.mean(axis=0)
    rc = r - c
    s = np.einsum("ij,ij->i", W, rc)
    b = rc.sum(axis=0) - W.T @ s
    x = np.linalg.solve(A, b)
    return Point3(c[0] + x[0], c[1] + x[1], c[2] + x[2])


def _best_rotation(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Rotation minimizing sum ||R a_i - b_i||^2 (quaternion eigensolve)."""
    S = a.T @ b
    sv = np.linalg.svd(S, compute_uv=False)
    if sv[0] < 1e-300 or sv[1] <= 1e-12 * sv[0]:
        raise DegenerateConfiguration(
            "cross-covariance is rank-deficient; rotation undetermined"
        )
    sxx, sxy, sxz = S[0]
    syx, syy, syz = S[1]
    szx, szy, szz = S[2]
    N = np.array(
        [
            [sxx + syy + szz, syz - szy, szx - sxz, sxy - syx],
            [syz - szy, sxx - syy - szz, sxy + syx, szx + sxz],
            [szx - sxz, sxy + syx, syy - sxx - szz, syz + szy],
            [sxy - syx, szx + sxz, syz + szy, szz - sxx - syy],
        ]
    )
    _, vecs = np.linalg.eigh(N)
    q = vecs[:, -1]  # eigenvector of the largest eigenvalue
    return quat_to_matrix(UnitQuaternion(q[0], q[1], q[2], q[3])).m


def rotation_update(r_s, obs: Sequence[RayObservation], initial=None) -> RotationMatrix:
    """Minimize E over orthogonal M for fixed r_s.

    Starting from ``initial`` (or a data-driven bootstrap aligning the
    centered world vectors to ray-length targets), repeatedly re-aligns
    the rotated points with their projections onto the rays.  E never
    increases relative to the starting matrix.
    """
    r, v = _arrays(obs)
    rs = _as_position(r_s)
    d = r - rs
    if initial is None:
        lengths = np.sqrt(np.einsum("ij,ij->i", d, d))
        M = _best_rotation(d, v * lengths[:, None])
    else:
        M = _as_matrix(initial)
    for _ in range(_INNER_MAX_ITER):
        p = d @ M.T
        along = np.einsum("ij,ij->i", v, p)
        targets = v * along[:, None]
        M_new = _best_rotation(d, targets)
        delta = np.abs(M_new - M).max()
        M = M_new
        if delta < _INNER_STOP:
            break
    return RotationMatrix(M)


def _skew(u: np.ndarray) -> np.ndarray:
    return np.array(
        [
            [0.0, -u[2], u[1]],
            [u[2], 0.0, -u[0]],
            [-u[1], u[0], 0.0],
        ]
    )


def _rodrigues(phi: np.ndarray) -> np.ndarray:
    theta = float(np.sqrt(phi @ phi))
    if theta < 1e-12:
        return np.eye(3) + _skew(phi)
    K = _skew(phi / theta)
    return np.eye(3) + math.sin(theta) * K + (1.0 - math.cos(theta)) * (K @ K)


def _joint_step(
    M: np.ndarray,
    rs: np.ndarray,
    r: np.ndarray,
    v: np.ndarray,
    E: float,
    damping: float,
) -> tuple[np.ndarray, np.ndarray, float, float]:
    """One damped Gauss-Newton try on (rotation, position) jointly.

    Returns the new state only when it strictly lowers E; otherwise the
    input state comes back with the damping raised for the next call.
    """
    n = r.shape[0]
    d = r - rs
    y = d @ M.T
    along = np.einsum("ij,ij->i", v, y)
    e = y - v * along[:, None]
    J = np.empty((3 * n, 6))
    eye = np.eye(3)
    for i in range(n):
        P = eye - np.outer(v[i], v[i])
        J[3 * i : 3 * i + 3, 0:3] = -P @ _skew(y[i])
        J[3 * i : 3 * i + 3, 3:6] = -P @ M
    H = J.T @ J
    g = J.T @ e.reshape(-1)
    diag = np.maximum(np.diag(H), 1e-12)
    while damping <= _DAMPING_MAX:
        try:
            delta = np.linalg.solve(H + damping * np.diag(diag), -g)
        except np.linalg.LinAlgError:
            damping *= 10.0
            continue
        M_new = _rodrigues(delta[:3]) @ M
        rs_new = rs + delta[3:]
        E_new = _loss_core(M_new, rs_new, r, v)
        if E_new < E:
            return M_new, rs_new, E_new, max(damping * 0.3, _DAMPING_MIN)
        damping *= 10.0
    return M, rs, E, damping


def _loss_floor(n: int, scale: float, tol: float) -> float:
    """Denominator floor so float-level loss jitter counts as converged."""
    return n * (16.0 * _MACHINE_EPS * scale) ** 2 / tol


def _solve_from(
    M0: np.ndarray,
    obs: Sequence[RayObservation],
    r: np.ndarray,
    v: np.ndarray,
    tol: float,
    max_iter: int,
    floor: float,
) -> tuple[np.ndarray, Point3, list[float], int, bool]:
    M = M0
    rs_pt = position_update(M, obs)
    rs = rs_pt.as_array()
    trace = [_loss_core(M, rs, r, v)]
    damping = 1e-6
    iterations = 0
    converged = False
    while not converged and iterations < max_iter:
        iterations += 1
        M = rotation_update(rs_pt, obs, initial=M).m
        rs = position_update(M, obs).as_array()
        E_half = _loss_core(M, rs, r, v)
        M, rs, E_new, damping = _joint_step(M, rs, r, v, E_half, damping)
        rs_pt = Point3(rs[0], rs[1], rs[2])
        trace.append(E_new)
        converged = abs(trace[-2] - E_new) <= tol * max(trace[-2], floor)
    return M, rs_pt, trace, iterations, converged


def resect(
    obs: Sequence[RayObservation],
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> ResectionReport:
    """Full pose solve from scratch; see module docstring.

    Convergence failure surfaces as converged=False on the report,
    never as an exception.
    """
    if len(obs) < 3:
        raise DegenerateConfiguration(f"need >= 3 observations, got {len(obs)}")
    r, v = _arrays(obs)
    c = r.mean(axis=0)
    rc = r - c
    lengths = np.sqrt(np.einsum("ij,ij->i", rc, rc))
    keep = lengths > 1e-12
    if keep.sum() < 3:
        raise DegenerateConfiguration("world points collapse to their centroid")
    M0 = _best_rotation(rc[keep] / lengths[keep, None], v[keep])

    scale = max(1.0, float(np.abs(r).max()))
    floor = _loss_floor(r.shape[0], scale, tol)

    half_turns = (
        np.eye(3),
        np.diag([1.0, -1.0, -1.0]),  # about camera x
        np.diag([-1.0, 1.0, -1.0]),  # about camera y
        np.diag([-1.0, -1.0, 1.0]),  # about camera z
    )
    best = None
    for flip in half_turns:
        result = _solve_from(flip @ M0, obs, r, v, tol, max_iter, floor)
        if best is None or result[2][-1] < best[2][-1]:
            best = result
        if best[2][-1] <= floor:
            break  # numerically exact already; rivals cannot do better

    M, rs_pt, trace, iterations, converged = best
    pose = Pose(rotation=matrix_to_quat(RotationMatrix(M)), position=rs_pt)
    return ResectionReport(
        pose=pose,
        loss_trace=tuple(trace),
        iterations=iterations,
        converged=converged,
        planar_position=Point2(rs_pt.x, rs_pt.y),
    )
