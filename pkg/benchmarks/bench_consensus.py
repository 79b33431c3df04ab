"""Benchmark: native consensus kernels vs the pure-numpy fallback.

Runs the same randomized trial-matching workload through both kernel
implementations, checks the results are bit-identical, and reports the
timing ratio.  Usage:

    python benchmarks/bench_consensus.py [--trials N] [--repeats K]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from rockloc import _consensus_py
from rockloc.geometry import Point2
from rockloc.matching import FrameLabel, MatchConfig, RockSet, match_patterns

try:
    from rockloc import _consensus
except ImportError:
    _consensus = None


def build_sets(seed: int = 5) -> tuple[RockSet, RockSet]:
    rng = np.random.default_rng(seed)
    map_pts = rng.uniform(0.0, 20.0, size=(32, 2))
    chosen = rng.choice(32, size=14, replace=False)
    th = np.radians(25.0)
    R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    rover_pts = (map_pts[chosen] - np.array([4.0, 7.0])) @ R
    rover_pts += rng.normal(scale=0.03, size=rover_pts.shape)
    return (
        RockSet(points=[Point2(*p) for p in rover_pts], frame_label=FrameLabel.ROVER_GROUND),
        RockSet(points=[Point2(*p) for p in map_pts], frame_label=FrameLabel.UAV_MAP),
    )


def time_backend(kernels, rover, uav, cfg, repeats: int) -> tuple[float, object]:
    best = float("inf")
    hyp = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        hyp = match_patterns(rover, uav, cfg, kernels=kernels)
        best = min(best, time.perf_counter() - t0)
    return best, hyp


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    rover, uav = build_sets()
    cfg = MatchConfig(iterations=args.trials)

    t_py, h_py = time_backend(_consensus_py, rover, uav, cfg, args.repeats)
    print(f"python kernels: {t_py * 1e3:9.1f} ms "
          f"({args.trials} trials, best of {args.repeats})")

    if _consensus is None:
        print("native kernels: not built (pip install -e . compiles them)")
        return 0

    t_c, h_c = time_backend(_consensus, rover, uav, cfg, args.repeats)
    print(f"native kernels: {t_c * 1e3:9.1f} ms "
          f"({args.trials} trials, best of {args.repeats})")
    print(f"speedup: {t_py / t_c:.1f}x")

    same = (
        h_py.transform.as_tuple() == h_c.transform.as_tuple()
        and h_py.correspondences == h_c.correspondences
        and h_py.residual == h_c.residual
    )
    print(f"results bit-identical: {same}")
    return 0 if same else 1


if __name__ == "__main__":
    raise SystemExit(main())
