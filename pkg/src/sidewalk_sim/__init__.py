"""Deterministic pose-graph simulator for sidewalk navigation.

Agents move over a graph of panoramic viewpoints with 16 discrete headings,
observing FOV image crops, scaled GPS vectors, and encoded scene text, under
four reward structures and eight task settings. Worlds are procedurally
generated with annotations derived from the same geometry that renders the
pixels, so ground-truth labels are exact by construction.
"""

from .annotations import (
    AnnotationSet,
    BoundingBox,
    DoorPolygon,
    GoalIndex,
    HouseNumberLabel,
    StreetSignLabel,
    build_goal_index,
    fov_interval,
    visible_labels,
)
from .env_core import Action, Episode, StepResult, TASKS, TaskConfig, derived_horizon, is_success
from .observation import (
    Observation,
    crop_image,
    encode_house_numbers,
    encode_street_names,
    fuse_tensor,
    gps_observation,
)
from .oracle import OraclePlan, act, plan
from .rewards import RewardKind, RewardTracker, correct_directions
from .rollout import RolloutReport, bench, run_rollouts
from .spatial_graph import (
    Pose,
    StreetSegment,
    TurnAction,
    WorldGraph,
    bearing,
    forward_target,
    hop_distance,
    turn,
)
from .synth_world import WorldSpec, generate, sparsify
from .world import LoadedWorld, WorldValidationError, validate_world
from .world_io import load_world, save_bundle

__version__ = "0.1.0"

__all__ = [
    "Action",
    "AnnotationSet",
    "BoundingBox",
    "DoorPolygon",
    "Episode",
    "GoalIndex",
    "HouseNumberLabel",
    "LoadedWorld",
    "Observation",
    "OraclePlan",
    "Pose",
    "RewardKind",
    "RewardTracker",
    "RolloutReport",
    "StepResult",
    "StreetSegment",
    "StreetSignLabel",
    "TASKS",
    "TaskConfig",
    "TurnAction",
    "WorldGraph",
    "WorldSpec",
    "WorldValidationError",
    "act",
    "bearing",
    "bench",
    "build_goal_index",
    "correct_directions",
    "crop_image",
    "derived_horizon",
    "encode_house_numbers",
    "encode_street_names",
    "forward_target",
    "fov_interval",
    "fuse_tensor",
    "generate",
    "gps_observation",
    "hop_distance",
    "is_success",
    "load_world",
    "plan",
    "run_rollouts",
    "save_bundle",
    "sparsify",
    "turn",
    "validate_world",
    "visible_labels",
]
