"""The four per-episode reward structures with exact turn-reward bookkeeping.

Movement rewards are +-1 per forward transition by whether the hop distance
to the goal node decreased or increased. Turn shaping pays +0.1 for turns
toward the correct direction, but only when the new heading is nearer than
any heading already inhabited at this node, and -0.2 for turns away.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .spatial_graph import WEDGE_DEG, Pose, TurnAction, wedge_distance
from .world import LoadedWorld

TURN_TOWARD_REWARD = 0.1
TURN_AWAY_PENALTY = -0.2
READ_PENALTY = -0.2
SPARSE_SUCCESS_REWARD = 1.0  # magnitude is a config constant, not dictated
MULTI_GOAL_SIGHT_REWARD = 1.0


class RewardKind(Enum):
    DENSE = "dense"
    DENSE_COSTLY_READ = "dense_costly_read"
    SPARSE = "sparse"
    MULTI_GOAL = "multi_goal"


@dataclass
class RewardTracker:
    """Per-episode mutable reward state, owned by a single episode session."""

    node: int
    best_turn_dist_deg: float
    prev_hop: int
    seen_numbers: set[str] = field(default_factory=set)


def angular_dist_to_set(wedge: int, correct: frozenset[int]) -> float:
    """Circular distance in degrees from a wedge to the nearest correct wedge."""
    return min(wedge_distance(wedge, c) for c in correct) * WEDGE_DEG


def correct_directions(world: LoadedWorld, node: int, goal_address: str) -> frozenset[int]:
    """Headings counted as correct at `node` for the given goal.

    At the goal node: every wedge whose FOV fully contains the goal door.
    Elsewhere: the single wedge nearest the bearing toward the next node on
    a shortest hop-path to the goal.
    """
    return world.goal_runtime(goal_address).correct_wedges(world, node)


def init_tracker(world: LoadedWorld, start: Pose, goal_address: str) -> RewardTracker:
    rt = world.goal_runtime(goal_address)
    best = angular_dist_to_set(start.wedge, rt.correct_wedges(world, start.node))
    return RewardTracker(node=start.node, best_turn_dist_deg=best, prev_hop=rt.hop[start.node])


def dense_reward(
    tracker: RewardTracker,
    world: LoadedWorld,
    prev_pose: Pose,
    action: "object",
    new_pose: Pose,
    goal_address: str,
) -> float:
    """Dense movement/turn reward for one already-applied action.

    `action` may be a TurnAction or any other action marker; non-turn,
    non-move actions earn 0. The tracker's best-so-far resets whenever the
    agent enters a node, seeded with the entry heading's distance.
    """
    rt = world.goal_runtime(goal_address)
    if isinstance(action, TurnAction):
        correct = rt.correct_wedges(world, prev_pose.node)
        d_old = angular_dist_to_set(prev_pose.wedge, correct)
        d_new = angular_dist_to_set(new_pose.wedge, correct)
        if d_new > d_old:
            return TURN_AWAY_PENALTY
        if d_new < d_old and d_new < tracker.best_turn_dist_deg:
            tracker.best_turn_dist_deg = d_new
            return TURN_TOWARD_REWARD
        return 0.0
    if new_pose.node != prev_pose.node:
        new_hop = rt.hop[new_pose.node]
        reward = 0.0
        if new_hop < tracker.prev_hop:
            reward = 1.0
        elif new_hop > tracker.prev_hop:
            reward = -1.0
        tracker.prev_hop = new_hop
        tracker.node = new_pose.node
        tracker.best_turn_dist_deg = angular_dist_to_set(
            new_pose.wedge, rt.correct_wedges(world, new_pose.node)
        )
        return reward
    return 0.0  # blocked forward / read / done: no transition occurred


def read_cost() -> float:
    """Charge for the READ action in the costly-read structure."""
    return READ_PENALTY


def multi_goal_reward(tracker: RewardTracker, visible_numbers: list[str]) -> float:
    """+1 per house-number string not sighted earlier in the episode."""
    reward = 0.0
    for text in visible_numbers:
        if text not in tracker.seen_numbers:
            tracker.seen_numbers.add(text)
            reward += MULTI_GOAL_SIGHT_REWARD
    return reward


def sparse_reward(success: bool) -> float:
    return SPARSE_SUCCESS_REWARD if success else 0.0
