"""Command-line front end: simulate, localize, evaluate.

Stage failures map to fixed exit codes so batch scripts can tell what
broke: 2 config/input, 3 stereo intersection, 4 pattern matching,
5 resection.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import fileio, pipeline, plots
from .errors import (
    ConfigError,
    DegenerateConfiguration,
    DegenerateSample,
    DegenerateTriangle,
    EmptyVisibleSet,
    IntersectionError,
    NoConsensus,
    NonPositiveDisparity,
    OutsideHull,
    ResectionError,
    SingularNormalMatrix,
    TooFewRocks,
    TriangulationError,
    ZeroVector,
)
from .simulate import generate_scene

EXIT_CONFIG = 2
EXIT_INTERSECTION = 3
EXIT_MATCHING = 4
EXIT_RESECTION = 5

_CONFIG_ERRORS = (ConfigError, EmptyVisibleSet, OSError)
_INTERSECTION_ERRORS = (
    TriangulationError,
    IntersectionError,
    NonPositiveDisparity,
    OutsideHull,
    DegenerateTriangle,
    DegenerateSample,
)
_MATCHING_ERRORS = (TooFewRocks, NoConsensus)
_RESECTION_ERRORS = (
    ResectionError,
    SingularNormalMatrix,
    DegenerateConfiguration,
    ZeroVector,
)


def _fail(stage: str, exc: BaseException, code: int) -> int:
    print(f"error [{stage}]: {exc}", file=sys.stderr)
    return code


def _cmd_simulate(args: argparse.Namespace) -> int:
    try:
        doc = fileio.read_json_document(args.scene_config)
        cfg = pipeline.parse_scene_config(
            doc, str(args.scene_config), seed_override=args.seed
        )
        truth, uav, rover = generate_scene(cfg)
        digests = fileio.write_scene_dir(args.out, truth, uav, rover)
    except _CONFIG_ERRORS as exc:
        return _fail("simulate", exc, EXIT_CONFIG)
    if args.verbose:
        print(
            f"wrote scene: {sum(truth.visible)} visible rocks, "
            f"{len(rover.stereo_matches)} stereo features",
            file=sys.stderr,
        )
    for name in sorted(digests):
        print(f"{digests[name]}  {name}")
    return 0


def _cmd_localize(args: argparse.Namespace) -> int:
    try:
        doc = fileio.read_json_document(args.config)
        cfg = pipeline.parse_pipeline_config(
            doc, str(args.config), seed_override=args.seed
        )
    except _CONFIG_ERRORS as exc:
        return _fail("config", exc, EXIT_CONFIG)
    try:
        result = pipeline.localize_dir(args.scene_dir, cfg)
    except _CONFIG_ERRORS as exc:
        return _fail("input", exc, EXIT_CONFIG)
    except _INTERSECTION_ERRORS as exc:
        return _fail("intersection", exc, EXIT_INTERSECTION)
    except _MATCHING_ERRORS as exc:
        return _fail("matching", exc, EXIT_MATCHING)
    except _RESECTION_ERRORS as exc:
        return _fail("resection", exc, EXIT_RESECTION)
    out = Path(args.out)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True, exist_ok=True)
    fileio.write_json_document(out, result.to_doc())
    if args.plots:
        plot_dir = out.parent if str(out.parent) else Path(".")
        written = plots.write_localization_plots(
            plot_dir,
            result.ground_points,
            result.map_points,
            result.match.transform,
            result.match.correspondences,
        )
        if args.verbose:
            for path in written:
                print(f"wrote {path}", file=sys.stderr)
    p = result.planar_position
    print(
        f"planar position {p.x:.4f} {p.y:.4f}  "
        f"inliers {result.match.inlier_count}  "
        f"converged {str(result.resection.converged).lower()}"
    )
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    try:
        report = pipeline.evaluate_files(args.result, args.truth)
    except _CONFIG_ERRORS as exc:
        return _fail("evaluate", exc, EXIT_CONFIG)
    print(report.as_text(), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rockloc",
        description="Rock-pattern rover localization: simulate, localize, evaluate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate a synthetic scene directory")
    sim.add_argument("scene_config", help="scene config JSON")
    sim.add_argument("-o", "--out", required=True, help="output directory")
    sim.add_argument("--seed", type=int, default=None, help="override rng_seed")
    sim.add_argument("--verbose", action="store_true")
    sim.set_defaults(func=_cmd_simulate)

    loc = sub.add_parser("localize", help="run the localization pipeline")
    loc.add_argument("scene_dir", help="scene directory from simulate")
    loc.add_argument("-c", "--config", required=True, help="pipeline config JSON")
    loc.add_argument("-o", "--out", required=True, help="result JSON path")
    loc.add_argument("--plots", action="store_true", help="emit SVG figures")
    loc.add_argument("--seed", type=int, default=None, help="override match rng_seed")
    loc.add_argument("--verbose", action="store_true")
    loc.set_defaults(func=_cmd_localize)

    ev = sub.add_parser("evaluate", help="compare a result against truth")
    ev.add_argument("result", help="result JSON from localize")
    ev.add_argument("truth", help="truth JSON (or another result)")
    ev.add_argument("--verbose", action="store_true")
    ev.set_defaults(func=_cmd_evaluate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
