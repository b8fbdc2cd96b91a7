"""Provably shortest action sequences from any pose to any goal.

The planner runs breadth-first search over the pose graph (node x wedge,
unit action cost) backward from the goal's door-framing poses, then walks
the distance field forward. Turn runs are emitted in the committed greedy
form: rotate the shorter way (right on a 180-degree tie), big turns while
at least 3 wedges remain, then small turns; this decomposition is always
ring-optimal, so the emitted plan length equals the BFS optimum exactly.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .env_core import Action
from .rewards import dense_reward, init_tracker
from .spatial_graph import NUM_WEDGES, Pose, TurnAction, wedge_distance
from .world import LoadedWorld

_TURN_DELTAS = (-3, -1, 1, 3)


def _ring_cost(k_right: int) -> int:
    """Minimum turn actions for a net rotation of k_right wedges (0..15)."""
    m = min(k_right, NUM_WEDGES - k_right)
    return m // 3 + m % 3


def pose_distance_field(world: LoadedWorld, goal_address: str) -> np.ndarray:
    """(N, 16) optimal action counts from every pose to the goal's framing poses."""
    rt = world.goal_runtime(goal_address)
    if rt.pose_dist is not None:
        return rt.pose_dist
    ftable = world.forward_table()
    n_nodes = world.graph.num_nodes
    dist = np.full((n_nodes, NUM_WEDGES), -1, dtype=np.int32)

    rev_forward: list[list[list[int]]] = [
        [[] for _ in range(NUM_WEDGES)] for _ in range(n_nodes)
    ]
    for m in range(n_nodes):
        for w in range(NUM_WEDGES):
            t = int(ftable[m, w])
            if t >= 0:
                rev_forward[t][w].append(m)

    q: deque[tuple[int, int]] = deque()
    for w in sorted(rt.framing):
        dist[rt.node, w] = 0
        q.append((rt.node, w))
    while q:
        node, w = q.popleft()
        d = int(dist[node, w]) + 1
        for delta in _TURN_DELTAS:
            w2 = (w - delta) % NUM_WEDGES
            if dist[node, w2] < 0:
                dist[node, w2] = d
                q.append((node, w2))
        for m in rev_forward[node][w]:
            if dist[m, w] < 0:
                dist[m, w] = d
                q.append((m, w))
    rt.pose_dist = dist
    return dist


@dataclass
class OraclePlan:
    actions: list[Action]
    poses: list[Pose]  # pose after each action
    total_dense_reward: float


def _greedy_turn_sequence(k_right: int) -> list[Action]:
    """Committed rotation: shorter side (right at exactly 180 degrees), big
    turns while >= 3 wedges remain, then small turns."""
    rightward = k_right <= NUM_WEDGES // 2
    m = k_right if rightward else NUM_WEDGES - k_right
    big = Action.RIGHT_BIG if rightward else Action.LEFT_BIG
    small = Action.RIGHT_SMALL if rightward else Action.LEFT_SMALL
    return [big] * (m // 3) + [small] * (m % 3)


def _burst_target(world: LoadedWorld, dist: np.ndarray, pose: Pose) -> tuple[int, int]:
    """Wedge to rotate to before the next forward (or to frame the door).

    Returns (target wedge, net rightward rotation). Ties break by smaller
    ring cost, then smaller angular distance, then smaller wedge index.
    """
    ftable = world.forward_table()
    d = int(dist[pose.node, pose.wedge])
    best: tuple[tuple[int, int, int], int, int] | None = None
    for w2 in range(NUM_WEDGES):
        if w2 == pose.wedge:
            continue
        k_right = (w2 - pose.wedge) % NUM_WEDGES
        cost = _ring_cost(k_right)
        d2 = int(dist[pose.node, w2])
        if d2 < 0 or cost + d2 != d:
            continue
        t2 = int(ftable[pose.node, w2])
        if d2 == 0 or (t2 >= 0 and dist[t2, w2] == d2 - 1):
            key = (cost, wedge_distance(pose.wedge, w2), w2)
            if best is None or key < best[0]:
                best = (key, w2, k_right)
    if best is None:
        raise RuntimeError(f"no optimal turn target from pose {pose}; distance field inconsistent")
    return best[1], best[2]


def plan(world: LoadedWorld, start: Pose, goal_address: str) -> OraclePlan:
    """Shortest action sequence from `start` to framing the goal's door."""
    dist = pose_distance_field(world, goal_address)
    if dist[start.node, start.wedge] < 0:
        raise ValueError(f"goal {goal_address} unreachable from pose {start}")
    ftable = world.forward_table()
    actions: list[Action] = []
    poses: list[Pose] = []
    cur = start
    while dist[cur.node, cur.wedge] > 0:
        d = int(dist[cur.node, cur.wedge])
        target = int(ftable[cur.node, cur.wedge])
        if target >= 0 and dist[target, cur.wedge] == d - 1:
            cur = Pose(target, cur.wedge)
            actions.append(Action.FORWARD)
            poses.append(cur)
            continue
        wedge2, k_right = _burst_target(world, dist, cur)
        for a in _greedy_turn_sequence(k_right):
            cur = Pose(cur.node, (cur.wedge + _TURNS[a].value) % NUM_WEDGES)
            actions.append(a)
            poses.append(cur)
        assert cur.wedge == wedge2

    total = 0.0
    tracker = init_tracker(world, start, goal_address)
    prev = start
    for a, p in zip(actions, poses):
        applied: object = _TURNS.get(a, a)
        total += dense_reward(tracker, world, prev, applied, p, goal_address)
        prev = p
    return OraclePlan(actions, poses, total)


_TURNS = {
    Action.LEFT_BIG: TurnAction.LEFT_BIG,
    Action.LEFT_SMALL: TurnAction.LEFT_SMALL,
    Action.RIGHT_SMALL: TurnAction.RIGHT_SMALL,
    Action.RIGHT_BIG: TurnAction.RIGHT_BIG,
}


def act(world: LoadedWorld, state) -> Action:
    """Next optimal action for an episode state (replans from the current pose).

    When the pose already frames the goal door, emits DONE if the task allows
    it; otherwise keeps scanning in place (exploration-style tasks only).
    """
    pose: Pose = state.pose
    dist = pose_distance_field(world, state.goal_address)
    d = int(dist[pose.node, pose.wedge])
    if d < 0:
        raise ValueError(f"goal {state.goal_address} unreachable from pose {pose}")
    if d == 0:
        task = getattr(state, "task", None)
        if task is not None and Action.DONE in task.legal_actions:
            return Action.DONE
        return Action.LEFT_SMALL
    target = int(world.forward_table()[pose.node, pose.wedge])
    if target >= 0 and dist[target, pose.wedge] == d - 1:
        return Action.FORWARD
    _, k_right = _burst_target(world, dist, pose)
    return _greedy_turn_sequence(k_right)[0]
