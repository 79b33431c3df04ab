"""Robust 2D rock-distribution pattern matching.

Estimates the planar affine transform from the rover-frame rock layout
to the aerial-map layout by randomized trial matching: each trial
hypothesizes a 3-to-3 rock correspondence, fits the exact affine, and
scores it by one-to-one nearest-neighbor consensus.  Because no putative
correspondences exist up front, trials pair a sampled rover triple both
with a blindly sampled map triple and with map triangles retrieved from
a precomputed shape table (sorted side lengths and their ratios), which
keeps the per-trial hit rate usable at realistic outlier fractions.

The hot loop lives in a kernel module with a native and a pure-numpy
implementation selected at import (see rockloc._backend); both produce
bit-identical hypotheses.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _backend, _consensus_py
from .errors import NoConsensus, TooFewRocks
from .geometry import Affine2, DegenerateSample, Point2, affine_lsq

DUPLICATE_ROCK_EPS = 1e-6  # m


class FrameLabel(Enum):
    ROVER_GROUND = "rover_ground"
    UAV_MAP = "uav_map"


@dataclass(frozen=True, slots=True)
class RockSet:
    """Labeled planar rock layout in meters."""

    points: tuple[Point2, ...]
    frame_label: FrameLabel

    def __post_init__(self) -> None:
        pts = tuple(
            p if isinstance(p, Point2) else Point2(p[0], p[1]) for p in self.points
        )
        object.__setattr__(self, "points", pts)
        if len(pts) >= 2:
            a = self.as_array()
            diff = a[:, None, :] - a[None, :, :]
            d2 = np.einsum("ijk,ijk->ij", diff, diff)
            np.fill_diagonal(d2, np.inf)
            if d2.min() < DUPLICATE_ROCK_EPS * DUPLICATE_ROCK_EPS:
                i, j = np.unravel_index(int(d2.argmin()), d2.shape)
                raise ValueError(
                    f"duplicate rocks {min(i, j)} and {max(i, j)} "
                    f"within {DUPLICATE_ROCK_EPS:g} m"
                )

    def as_array(self) -> np.ndarray:
        return np.array([[p.x, p.y] for p in self.points]).reshape(
            len(self.points), 2
        )

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True, slots=True)
class MatchConfig:
    iterations: int = 2000
    inlier_threshold: float = 0.3  # m
    min_inliers: int = 4
    rng_seed: int = 0
    # Shape-table retrieval knobs.
    shape_tolerance: float = 0.25
    anisotropy_bound: float = 10.0
    area_epsilon: float = 1e-9
    max_candidates: int = 8

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if self.inlier_threshold <= 0:
            raise ValueError(
                f"inlier_threshold must be > 0, got {self.inlier_threshold}"
            )
        if self.min_inliers < 3:
            raise ValueError(f"min_inliers must be >= 3, got {self.min_inliers}")
        if self.max_candidates < 0:
            raise ValueError("max_candidates must be >= 0")


@dataclass(frozen=True, slots=True)
class MatchHypothesis:
    transform: Affine2
    correspondences: tuple[tuple[int, int], ...]
    residual: float
    inlier_count: int

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "correspondences",
            tuple((int(i), int(j)) for i, j in self.correspondences),
        )
        rov = [i for i, _ in self.correspondences]
        uav = [j for _, j in self.correspondences]
        if len(set(rov)) != len(rov) or len(set(uav)) != len(uav):
            raise ValueError("correspondences are not one-to-one")
        if self.residual < 0:
            raise ValueError(f"negative residual {self.residual}")
        if self.inlier_count != len(self.correspondences):
            raise ValueError("inlier_count disagrees with correspondence count")


def sample_filter(
    src_triple,
    dst_triple,
    area_epsilon: float = 1e-9,
    anisotropy_bound: float = 10.0,
) -> bool:
    """Accept or reject a hypothesized 3-to-3 sample.

    Rejects when either triangle's area falls below area_epsilon or the
    spread of per-side length ratios exceeds anisotropy_bound.
    """
    src = tuple((float(p[0]), float(p[1])) if not isinstance(p, Point2) else (p.x, p.y) for p in src_triple)
    dst = tuple((float(p[0]), float(p[1])) if not isinstance(p, Point2) else (p.x, p.y) for p in dst_triple)
    return _consensus_py._accept_pair(src, dst, area_epsilon, anisotropy_bound)


def _apply6(t6, pts: np.ndarray) -> np.ndarray:
    a1, b1, c1, a2, b2, c2 = t6
    tx = a1 * pts[:, 0] + b1 * pts[:, 1] + c1
    ty = a2 * pts[:, 0] + b2 * pts[:, 1] + c2
    return np.stack([tx, ty], axis=1)


def assign_nearest(
    transform: Affine2, rover: RockSet, uav: RockSet, threshold: float
) -> list[tuple[int, int]]:
    """Greedy ascending-distance one-to-one pairing under a transform."""
    kern = _backend.kernels
    pairs, _ = kern.greedy_assign(
        _apply6(transform.as_tuple(), rover.as_array()), uav.as_array(), threshold
    )
    return [(int(i), int(j)) for i, j in pairs]


def _shape_table(uav_a: np.ndarray):
    """Sorted side lengths and side-ratio signatures of all map triangles."""
    m = uav_a.shape[0]
    combos = np.array(
        list(itertools.combinations(range(m), 3)), dtype=np.int64
    ).reshape(-1, 3)
    p0 = uav_a[combos[:, 0]]
    p1 = uav_a[combos[:, 1]]
    p2 = uav_a[combos[:, 2]]
    d01 = np.sqrt(
        (p1[:, 0] - p0[:, 0]) * (p1[:, 0] - p0[:, 0])
        + (p1[:, 1] - p0[:, 1]) * (p1[:, 1] - p0[:, 1])
    )
    d12 = np.sqrt(
        (p2[:, 0] - p1[:, 0]) * (p2[:, 0] - p1[:, 0])
        + (p2[:, 1] - p1[:, 1]) * (p2[:, 1] - p1[:, 1])
    )
    d20 = np.sqrt(
        (p0[:, 0] - p2[:, 0]) * (p0[:, 0] - p2[:, 0])
        + (p0[:, 1] - p2[:, 1]) * (p0[:, 1] - p2[:, 1])
    )
    sides = np.sort(np.stack([d01, d12, d20], axis=1), axis=1)
    sig = sides[:, :2] / sides[:, 2:3]
    return combos, sides, sig


def _sample_triples(rng: np.random.Generator, n: int, m: int, trials: int):
    rov = np.empty((trials, 3), dtype=np.int64)
    uav = np.empty((trials, 3), dtype=np.int64)
    for t in range(trials):
        rov[t] = rng.choice(n, size=3, replace=False)
        uav[t] = rng.choice(m, size=3, replace=False)
    return rov, uav


def match_patterns(
    rover: RockSet,
    uav: RockSet,
    cfg: MatchConfig = MatchConfig(),
    kernels=None,
) -> MatchHypothesis:
    """Best consensus hypothesis over cfg.iterations seeded trials.

    The winner maximizes inlier count, ties broken by lower residual and
    then earlier trial.  Its transform is refit by least squares over the
    winning correspondences and the reported correspondences, residual
    and inlier count describe that refit transform; if the refit drops
    the assignment below cfg.min_inliers the trial transform is kept
    instead.  Raises NoConsensus when no trial reaches cfg.min_inliers.
    """
    kern = kernels if kernels is not None else _backend.kernels
    n = len(rover)
    m = len(uav)
    if n < 3 or m < 3:
        raise TooFewRocks(f"need >= 3 rocks on both sides, got {n} and {m}")

    R = rover.as_array()
    U = uav.as_array()
    combos, sides, sig = _shape_table(U)
    rng = np.random.default_rng(cfg.rng_seed)
    rov_tri, uav_tri = _sample_triples(rng, n, m, cfg.iterations)

    inl, res, src_i, dst_i = kern.evaluate_trials(
        R,
        U,
        rov_tri,
        uav_tri,
        combos,
        sides,
        sig,
        cfg.inlier_threshold,
        cfg.area_epsilon,
        cfg.anisotropy_bound,
        cfg.shape_tolerance,
        cfg.max_candidates,
    )

    best_t = -1
    best_inl = -1
    best_res = np.inf
    for t in range(cfg.iterations):
        if inl[t] > best_inl or (inl[t] == best_inl and res[t] < best_res):
            best_inl = int(inl[t])
            best_res = float(res[t])
            best_t = t
    if best_t < 0 or best_inl < cfg.min_inliers:
        raise NoConsensus(
            f"best trial matched {max(best_inl, 0)} rocks, "
            f"need >= {cfg.min_inliers}"
        )

    t6 = kern.fit3(R[src_i[best_t]], U[dst_i[best_t]], cfg.area_epsilon)
    if t6 is None:
        raise NoConsensus("winning trial sample became degenerate on rebuild")
    pairs, dists = kern.greedy_assign(_apply6(t6, R), U, cfg.inlier_threshold)

    final_t6 = t6
    final_pairs = pairs
    final_dists = dists
    if len(pairs) >= 3:
        try:
            refit = affine_lsq(
                [
                    (Point2(R[i, 0], R[i, 1]), Point2(U[j, 0], U[j, 1]))
                    for i, j in pairs
                ]
            )
        except DegenerateSample:
            refit = None
        if refit is not None:
            rp, rd = kern.greedy_assign(
                _apply6(refit.as_tuple(), R), U, cfg.inlier_threshold
            )
            if len(rp) >= cfg.min_inliers:
                final_t6 = refit.as_tuple()
                final_pairs = rp
                final_dists = rd

    residual = 0.0
    for d in final_dists:
        residual += float(d)
    return MatchHypothesis(
        transform=Affine2(*final_t6),
        correspondences=tuple((int(i), int(j)) for i, j in final_pairs),
        residual=residual,
        inlier_count=len(final_pairs),
    )
