"""Foundational geometric types and exact primitives.

Everything here is a plain 64-bit float value type or a pure function.
Conventions fixed repo-wide:

  * quaternions are Hamilton, stored w-first;
  * rotation matrices act on column vectors, ``p_out = M @ p_in``;
  * ``Affine2`` is the row-major 2x3 block (a1, b1, c1, a2, b2, c2) mapping
    (x, y) -> (a1*x + b1*y + c1, a2*x + b2*y + c2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateSample, NotARotation, ZeroVector

# Triangle area below this (squared input units) counts as collinear.
DEGENERACY_EPS = 1e-9


def _finite(*values: float) -> bool:
    return all(math.isfinite(v) for v in values)


@dataclass(frozen=True, slots=True)
class Point2:
    """Planar coordinate; pixels or meters depending on context."""

    x: float
    y: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        if not _finite(self.x, self.y):
            raise ValueError(f"non-finite Point2 components ({self.x}, {self.y})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True, slots=True)
class Point3:
    """Spatial coordinate in meters."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "z", float(self.z))
        if not _finite(self.x, self.y, self.z):
            raise ValueError(
                f"non-finite Point3 components ({self.x}, {self.y}, {self.z})"
            )

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


def _xy(p) -> tuple[float, float]:
    """Accept Point2 or any 2-sequence."""
    if isinstance(p, Point2):
        return p.x, p.y
    x, y = p
    return float(x), float(y)


@dataclass(frozen=True, slots=True)
class Affine2:
    """Planar affine transform, 6 parameters."""

    a1: float
    b1: float
    c1: float
    a2: float
    b2: float
    c2: float

    def __post_init__(self) -> None:
        for name in ("a1", "b1", "c1", "a2", "b2", "c2"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not _finite(self.a1, self.b1, self.c1, self.a2, self.b2, self.c2):
            raise ValueError("non-finite affine coefficients")

    @classmethod
    def identity(cls) -> Affine2:
        return cls(1.0, 0.0, 0.0, 0.0, 1.0, 0.0)

    def as_tuple(self) -> tuple[float, float, float, float, float, float]:
        return (self.a1, self.b1, self.c1, self.a2, self.b2, self.c2)

    def as_matrix(self) -> np.ndarray:
        """Homogeneous 3x3 form."""
        return np.array(
            [
                [self.a1, self.b1, self.c1],
                [self.a2, self.b2, self.c2],
                [0.0, 0.0, 1.0],
            ]
        )


def affine_apply(t: Affine2, p) -> Point2:
    x, y = _xy(p)
    return Point2(t.a1 * x + t.b1 * y + t.c1, t.a2 * x + t.b2 * y + t.c2)


def affine_from_pairs(src, dst) -> Affine2:
    """Exact affine through three point pairs (Cramer solve).

    Raises DegenerateSample when the source triangle is (near-)collinear.
    The destination triangle may be degenerate; the resulting transform is
    then rank-deficient but still well defined.
    """
    (x0, y0), (x1, y1), (x2, y2) = (_xy(p) for p in src)
    (X0, Y0), (X1, Y1), (X2, Y2) = (_xy(p) for p in dst)

    d1x = x1 - x0
    d1y = y1 - y0
    d2x = x2 - x0
    d2y = y2 - y0
    det = d1x * d2y - d1y * d2x  # twice the signed source area
    if 0.5 * abs(det) < DEGENERACY_EPS:
        raise DegenerateSample(f"source triangle area {0.5 * abs(det):g} below epsilon")

    D1X = X1 - X0
    D1Y = Y1 - Y0
    D2X = X2 - X0
    D2Y = Y2 - Y0
    a1 = (D1X * d2y - D2X * d1y) / det
    b1 = (D2X * d1x - D1X * d2x) / det
    a2 = (D1Y * d2y - D2Y * d1y) / det
    b2 = (D2Y * d1x - D1Y * d2x) / det
    c1 = X0 - a1 * x0 - b1 * y0
    c2 = Y0 - a2 * x0 - b2 * y0
    return Affine2(a1, b1, c1, a2, b2, c2)


def affine_lsq(pairs: Iterable[tuple]) -> Affine2:
    """Least-squares affine over >= 3 point pairs."""
    src = []
    dst = []
    for s, d in pairs:
        src.append(_xy(s))
        dst.append(_xy(d))
    if len(src) < 3:
        raise DegenerateSample(f"need >= 3 pairs, got {len(src)}")
    A = np.ones((len(src), 3))
    A[:, :2] = np.asarray(src)
    B = np.asarray(dst)
    sol, _, rank, _ = np.linalg.lstsq(A, B, rcond=None)
    if rank < 3:
        raise DegenerateSample("source points are collinear")
    return Affine2(sol[0, 0], sol[1, 0], sol[2, 0], sol[0, 1], sol[1, 1], sol[2, 1])


@dataclass(frozen=True, slots=True)
class UnitQuaternion:
    """Hamilton quaternion, w-first, normalized on construction."""

    w: float
    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        w, x, y, z = (float(v) for v in (self.w, self.x, self.y, self.z))
        if not _finite(w, x, y, z):
            raise ValueError("non-finite quaternion components")
        n = math.sqrt(w * w + x * x + y * y + z * z)
        if n < 1e-12:
            raise ZeroVector("cannot normalize a zero quaternion")
        object.__setattr__(self, "w", w / n)
        object.__setattr__(self, "x", x / n)
        object.__setattr__(self, "y", y / n)
        object.__setattr__(self, "z", z / n)

    @classmethod
    def identity(cls) -> UnitQuaternion:
        return cls(1.0, 0.0, 0.0, 0.0)

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])


def _frozen_matrix(m: np.ndarray) -> np.ndarray:
    out = np.array(m, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, slots=True, eq=False)
class RotationMatrix:
    """Orthonormal 3x3 matrix with det +1; validated at construction."""

    m: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.m, dtype=float)
        if m.shape != (3, 3) or not np.all(np.isfinite(m)):
            raise NotARotation(f"expected a finite 3x3 matrix, got shape {m.shape}")
        err = np.abs(m.T @ m - np.eye(3)).max()
        if err > 1e-6:
            raise NotARotation(f"M^T M deviates from I by {err:g}")
        if np.linalg.det(m) < 0.0:
            raise NotARotation("matrix has negative determinant (reflection)")
        object.__setattr__(self, "m", _frozen_matrix(m))

    @classmethod
    def identity(cls) -> RotationMatrix:
        return cls(np.eye(3))


@dataclass(frozen=True, slots=True, eq=False)
class ProjectionMatrix:
    """Rank-1 orthogonal projector onto a ray direction."""

    m: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.m, dtype=float)
        if m.shape != (3, 3) or not np.all(np.isfinite(m)):
            raise ValueError(f"expected a finite 3x3 matrix, got shape {m.shape}")
        object.__setattr__(self, "m", _frozen_matrix(m))


def projection_matrix(v) -> ProjectionMatrix:
    """V = v v^T / (v^T v): projects onto the direction of v."""
    if isinstance(v, Point3):
        vec = v.as_array()
    else:
        vec = np.asarray(v, dtype=float).reshape(3)
    n2 = float(vec @ vec)
    if math.sqrt(n2) < 1e-12:
        raise ZeroVector("projection direction has (near-)zero norm")
    return ProjectionMatrix(np.outer(vec, vec) / n2)


def quat_to_matrix(q: UnitQuaternion) -> RotationMatrix:
    w, x, y, z = q.w, q.x, q.y, q.z
    return RotationMatrix(
        np.array(
            [
                [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
                [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
                [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
            ]
        )
    )


def matrix_to_quat(m) -> UnitQuaternion:
    """Inverse of quat_to_matrix (Shepperd's max-branch method).

    The returned quaternion is canonicalized so its first nonzero component
    is positive; q and -q encode the same rotation.
    """
    if isinstance(m, RotationMatrix):
        M = m.m
    else:
        M = RotationMatrix(m).m  # validates orthonormality
    m00, m01, m02 = M[0]
    m10, m11, m12 = M[1]
    m20, m21, m22 = M[2]
    tr = m00 + m11 + m22
    # Pick the numerically largest diagonal-derived branch.
    if tr >= m00 and tr >= m11 and tr >= m22:
        s = 2.0 * math.sqrt(tr + 1.0)
        w = 0.25 * s
        x = (m21 - m12) / s
        y = (m02 - m20) / s
        z = (m10 - m01) / s
    elif m00 >= m11 and m00 >= m22:
        s = 2.0 * math.sqrt(1.0 + m00 - m11 - m22)
        w = (m21 - m12) / s
        x = 0.25 * s
        y = (m01 + m10) / s
        z = (m02 + m20) / s
    elif m11 >= m22:
        s = 2.0 * math.sqrt(1.0 + m11 - m00 - m22)
        w = (m02 - m20) / s
        x = (m01 + m10) / s
        y = 0.25 * s
        z = (m12 + m21) / s
    else:
        s = 2.0 * math.sqrt(1.0 + m22 - m00 - m11)
        w = (m10 - m01) / s
        x = (m02 + m20) / s
        y = (m12 + m21) / s
        z = 0.25 * s
    for lead in (w, x, y, z):
        if lead != 0.0:
            if lead < 0.0:
                w, x, y, z = -w, -x, -y, -z
            break
    return UnitQuaternion(w, x, y, z)


def quat_rotate(q: UnitQuaternion, p: Point3) -> Point3:
    """Rotate a point by a quaternion (via its matrix form)."""
    out = quat_to_matrix(q).m @ p.as_array()
    return Point3(out[0], out[1], out[2])
