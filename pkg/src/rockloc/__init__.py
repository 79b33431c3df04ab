"""Rock-pattern rover localization.

Localizes a ground camera against an aerial rock map: stereo forward
intersection with triangle-local affine transfer recovers rock
positions in the camera frame, a randomized trial matcher aligns the
ground rock pattern with the map, and an orthogonal-projection
resection solves the full camera pose from the matched records.
"""

from ._backend import backend_name
from .delaunay import Triangulation, delaunay, locate_triangle
from .errors import (
    AllCollinear,
    ConfigError,
    DegenerateConfiguration,
    DegenerateSample,
    DegenerateTriangle,
    DuplicatePoints,
    EmptyVisibleSet,
    IntersectionError,
    NoConsensus,
    NonPositiveDisparity,
    NotARotation,
    OutsideHull,
    ResectionError,
    RocklocError,
    SingularNormalMatrix,
    TooFewPoints,
    TooFewRocks,
    TriangulationError,
    ZeroVector,
)
from .geometry import (
    Affine2,
    Point2,
    Point3,
    ProjectionMatrix,
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
from .matching import (
    FrameLabel,
    MatchConfig,
    MatchHypothesis,
    RockSet,
    assign_nearest,
    match_patterns,
    sample_filter,
)
from .pipeline import (
    EvaluationReport,
    LocalizationResult,
    PipelineConfig,
    evaluate_files,
    evaluate_positions,
    localize_dir,
    localize_scene,
)
from .resection import (
    Pose,
    RayObservation,
    ResectionReport,
    loss,
    pixel_to_ray,
    position_update,
    resect,
    rotation_update,
)
from .simulate import (
    GentleRelief,
    GroundTruth,
    PlaneTerrain,
    RoverObservations,
    SceneConfig,
    UavMap,
    generate_scene,
    pose_from_ground,
    project_rock,
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

__version__ = "0.1.0"

__all__ = [
    "Affine2",
    "AllCollinear",
    "ConfigError",
    "DegenerateConfiguration",
    "DegenerateSample",
    "DegenerateTriangle",
    "DuplicatePoints",
    "EmptyVisibleSet",
    "EvaluationReport",
    "FeatureMatch",
    "FrameLabel",
    "GentleRelief",
    "GroundTruth",
    "IntersectionError",
    "LocalizationResult",
    "MatchConfig",
    "MatchHypothesis",
    "NoConsensus",
    "NonPositiveDisparity",
    "NotARotation",
    "OutsideHull",
    "PipelineConfig",
    "PlaneTerrain",
    "Point2",
    "Point3",
    "Pose",
    "ProjectionMatrix",
    "RayObservation",
    "ResectionError",
    "ResectionReport",
    "RockObservation",
    "RockSet",
    "RocklocError",
    "RotationMatrix",
    "RoverObservations",
    "SceneConfig",
    "SingularNormalMatrix",
    "StereoRig",
    "TooFewPoints",
    "TooFewRocks",
    "TriangulationError",
    "Triangulation",
    "UavMap",
    "UnitQuaternion",
    "ZeroVector",
    "affine_apply",
    "affine_from_pairs",
    "affine_lsq",
    "assign_nearest",
    "backend_name",
    "delaunay",
    "evaluate_files",
    "evaluate_positions",
    "filter_near_rocks",
    "forward_intersect",
    "generate_scene",
    "localize_dir",
    "localize_scene",
    "locate_triangle",
    "loss",
    "match_patterns",
    "matrix_to_quat",
    "pixel_to_ray",
    "pose_from_ground",
    "position_update",
    "project_rock",
    "projection_matrix",
    "quat_rotate",
    "quat_to_matrix",
    "resect",
    "rocks_to_ground_plane",
    "rotation_update",
    "sample_filter",
    "transfer_point",
]
