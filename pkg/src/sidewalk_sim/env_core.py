"""Episode state machine: task catalog, start/goal sampling, reset/step,
success test, and the horizon derivation.

Tasks follow a fixed catalog: four modality-ablation settings, a
cross-intersection variant, a costly-read variant, a sparse-reward variant,
and an exploration task rewarding unique house-number sightings.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .annotations import visible_labels
from .observation import (
    Observation,
    crop_image,
    encode_house_numbers,
    encode_street_names,
    gps_observation,
    resize_square,
)
from .rewards import (
    RewardKind,
    RewardTracker,
    dense_reward,
    init_tracker,
    multi_goal_reward,
    read_cost,
    sparse_reward,
)
from .spatial_graph import NUM_WEDGES, Pose, TurnAction, forward_target, turn
from .world import LoadedWorld


class Action(Enum):
    LEFT_BIG = 0
    LEFT_SMALL = 1
    FORWARD = 2
    RIGHT_SMALL = 3
    RIGHT_BIG = 4
    READ = 5
    DONE = 6


_TURNS = {
    Action.LEFT_BIG: TurnAction.LEFT_BIG,
    Action.LEFT_SMALL: TurnAction.LEFT_SMALL,
    Action.RIGHT_SMALL: TurnAction.RIGHT_SMALL,
    Action.RIGHT_BIG: TurnAction.RIGHT_BIG,
}

_BASE_ACTIONS = (
    Action.LEFT_BIG,
    Action.LEFT_SMALL,
    Action.FORWARD,
    Action.RIGHT_SMALL,
    Action.RIGHT_BIG,
)


class IllegalActionError(ValueError):
    pass


class EpisodeTerminatedError(RuntimeError):
    pass


@dataclass(frozen=True)
class TaskConfig:
    name: str
    obs_img: bool
    obs_gps: bool
    obs_txt: bool
    reward_kind: RewardKind
    horizon: int | None = None  # None: use the world's derived horizon
    gps_sigma: float = 0.0
    resolution: str = "low"  # "low" | "high"

    @property
    def legal_actions(self) -> tuple[Action, ...]:
        extra: tuple[Action, ...] = ()
        if self.reward_kind is RewardKind.DENSE_COSTLY_READ:
            extra = (Action.READ,)
        elif self.reward_kind is RewardKind.SPARSE:
            extra = (Action.DONE,)
        return _BASE_ACTIONS + extra

    def with_overrides(self, **kwargs) -> "TaskConfig":
        return replace(self, **kwargs)


TASKS: dict[str, TaskConfig] = {
    "AllObs": TaskConfig("AllObs", True, True, True, RewardKind.DENSE),
    "NoImg": TaskConfig("NoImg", False, True, True, RewardKind.DENSE),
    "NoGPS": TaskConfig("NoGPS", True, False, True, RewardKind.DENSE),
    "ImgOnly": TaskConfig("ImgOnly", True, False, False, RewardKind.DENSE),
    "Intersection": TaskConfig("Intersection", True, True, True, RewardKind.DENSE),
    "CostlyTxt": TaskConfig("CostlyTxt", True, True, True, RewardKind.DENSE_COSTLY_READ),
    "Sparse": TaskConfig("Sparse", True, True, True, RewardKind.SPARSE),
    "Explorer": TaskConfig("Explorer", True, True, True, RewardKind.MULTI_GOAL),
}


@dataclass
class EpisodeState:
    pose: Pose
    goal_address: str
    goal_node: int
    step_count: int
    horizon: int
    tracker: RewardTracker
    rng: np.random.Generator
    goal_noise: tuple[float, float]
    task: TaskConfig
    terminated: bool = False
    cumulative_reward: float = 0.0


@dataclass
class StepResult:
    observation: Observation
    reward: float
    done: bool
    info: dict


def is_success(world: LoadedWorld, state: EpisodeState) -> bool:
    """At the goal node with the goal door fully inside the 135-degree FOV."""
    if state.pose.node != state.goal_node:
        return False
    return state.pose.wedge in world.goal_runtime(state.goal_address).framing


def _segment_adjacency(world: LoadedWorld) -> dict[int, set[int]]:
    adj: dict[int, set[int]] = {seg.id: set() for seg in world.graph.segments}
    for a, b in world.graph.edges:
        sa = world.graph.nodes[a].segment
        sb = world.graph.nodes[b].segment
        if sa != sb:
            adj[sa].add(sb)
            adj[sb].add(sa)
    return adj


def _start_pool(world: LoadedWorld, task: TaskConfig, goal_node: int) -> list[int]:
    goal_seg = world.graph.segment_of(goal_node)
    if task.name != "Intersection":
        return list(goal_seg.nodes)
    seg_adj = _segment_adjacency(world)
    intersections = [s for s in world.graph.segments if s.kind == "intersection"]
    if not intersections:
        raise ValueError("Intersection task requires a world with intersections")
    pool: list[int] = []
    for inter in intersections:
        if goal_seg.id not in seg_adj[inter.id]:
            continue
        for sid in sorted(seg_adj[inter.id]):
            seg = world.graph.segments[sid]
            if seg.id != goal_seg.id and seg.kind == "segment":
                pool.extend(seg.nodes)
    pool = sorted(set(pool))
    if not pool:
        raise ValueError(
            f"no start segment reachable through an intersection from segment {goal_seg.id}"
        )
    return pool


def sample_task(world: LoadedWorld, task: TaskConfig, rng: np.random.Generator) -> tuple[str, Pose]:
    """Sample a goal address uniformly, then a start pose from the task's pool.

    Starts already satisfying the success condition are resampled so no
    episode begins solved.
    """
    addresses = world.goal_index.addresses
    goal_address = addresses[int(rng.integers(len(addresses)))]
    rt = world.goal_runtime(goal_address)
    pool = _start_pool(world, task, rt.node)
    for _ in range(10000):
        node = pool[int(rng.integers(len(pool)))]
        wedge = int(rng.integers(NUM_WEDGES))
        if node == rt.node and wedge in rt.framing:
            continue  # start would already satisfy success
        return goal_address, Pose(node, wedge)
    raise RuntimeError(f"could not sample a non-terminal start for goal {goal_address}")


def derived_horizon(world: LoadedWorld, use_cache: bool = True) -> int:
    """Longest oracle trajectory over all (pose, goal) pairs.

    Cached in the world bundle's meta at generation time; pass
    use_cache=False to force the exhaustive recomputation.
    """
    if use_cache and "horizon" in world.meta:
        return int(world.meta["horizon"])
    from .oracle import pose_distance_field

    worst = 0
    for address in world.goal_index.addresses:
        dist = pose_distance_field(world, address)
        worst = max(worst, int(dist.max()))
    return worst


class Episode:
    """One episode session. Many sessions may share one immutable world."""

    def __init__(
        self,
        world: LoadedWorld,
        task: TaskConfig | str = "AllObs",
        seed: int | None = None,
        horizon: int | None = None,
        gps_sigma: float | None = None,
    ):
        self.world = world
        cfg = TASKS[task] if isinstance(task, str) else task
        if horizon is not None:
            cfg = cfg.with_overrides(horizon=horizon)
        if gps_sigma is not None:
            cfg = cfg.with_overrides(gps_sigma=gps_sigma)
        self.task = cfg
        self.state: EpisodeState | None = None
        self._seed = seed

    def reset(self, seed: int | None = None) -> tuple[Observation, dict]:
        if seed is None:
            seed = self._seed
        rng = np.random.default_rng(seed)
        goal_address, start = sample_task(self.world, self.task, rng)
        rt = self.world.goal_runtime(goal_address)
        sigma = self.task.gps_sigma
        if sigma > 0:
            noise = rng.normal(0.0, sigma, size=2)
            goal_noise = (float(noise[0]), float(noise[1]))
        else:
            goal_noise = (0.0, 0.0)
        hor = self.task.horizon
        if hor is None:
            hor = derived_horizon(self.world)
        self.state = EpisodeState(
            pose=start,
            goal_address=goal_address,
            goal_node=rt.node,
            step_count=0,
            horizon=int(hor),
            tracker=init_tracker(self.world, start, goal_address),
            rng=rng,
            goal_noise=goal_noise,
            task=self.task,
        )
        obs, info = self._observe(action=None)
        return obs, info

    @property
    def legal_actions(self) -> tuple[Action, ...]:
        return self.task.legal_actions

    def step(self, action: Action | str | int) -> StepResult:
        state = self.state
        if state is None:
            raise EpisodeTerminatedError("no active episode; call reset() first")
        if state.terminated:
            raise EpisodeTerminatedError("episode already terminated; call reset()")
        action = _coerce_action(action)
        if action not in self.task.legal_actions:
            legal = ", ".join(a.name for a in self.task.legal_actions)
            raise IllegalActionError(
                f"action {action.name} is not legal in task {self.task.name}; legal: {legal}"
            )

        prev = state.pose
        if action in _TURNS:
            state.pose = turn(prev, _TURNS[action])
            applied: object = _TURNS[action]
        elif action is Action.FORWARD:
            target = forward_target(self.world.graph, prev)
            if target is not None:
                state.pose = Pose(target, prev.wedge)
            applied = action
        else:  # READ / DONE: pose unchanged
            applied = action

        kind = self.task.reward_kind
        success = is_success(self.world, state) and self.task.name != "Explorer"
        numbers, signs, _doors = visible_labels(self.world.annotations, state.pose)
        if kind in (RewardKind.DENSE, RewardKind.DENSE_COSTLY_READ):
            reward = dense_reward(state.tracker, self.world, prev, applied, state.pose, state.goal_address)
            if action is Action.READ:
                reward += read_cost()
        elif kind is RewardKind.SPARSE:
            reward = sparse_reward(success) if action is Action.DONE else 0.0
        else:  # MULTI_GOAL
            reward = multi_goal_reward(state.tracker, [l.text for l in numbers])

        state.step_count += 1
        if self.task.name == "Explorer":
            done = state.step_count >= state.horizon
        elif kind is RewardKind.SPARSE:
            done = action is Action.DONE or state.step_count >= state.horizon
        else:
            done = success or state.step_count >= state.horizon
        state.cumulative_reward += reward
        state.terminated = done

        obs, info = self._observe(action=action, precomputed_text=(numbers, signs))
        return StepResult(observation=obs, reward=reward, done=done, info=info)

    def _observe(self, action, precomputed_text=None):
        state = self.state
        assert state is not None
        world = self.world
        node = state.pose.node
        if precomputed_text is None:
            numbers, signs, _ = visible_labels(world.annotations, state.pose)
        else:
            numbers, signs = precomputed_text

        obs = Observation()
        if self.task.obs_img:
            if self.task.resolution == "high":
                pano = world.panoramas.full(node)
                obs.image = resize_square(crop_image(pano, state.pose), pano.shape[0])
            else:
                obs.image = crop_image(world.panoramas.low(node), state.pose)
        if self.task.obs_gps:
            obs.gps = gps_observation(
                world.bbox,
                world.graph.node_xy(node),
                world.graph.node_xy(state.goal_node),
                self.task.gps_sigma,
                state.goal_noise,
                state.rng,
            )
        deliver_text = self.task.obs_txt
        if self.task.reward_kind is RewardKind.DENSE_COSTLY_READ:
            deliver_text = action is Action.READ
        if deliver_text:
            obs.house_vec = encode_house_numbers([l.text for l in numbers])
            obs.street_vec = encode_street_names([l.name for l in signs], world.vocabulary)

        rt = world.goal_runtime(state.goal_address)
        info = {
            "agent_xy_m": world.graph.node_xy(node),
            "goal_xy_m": world.graph.node_xy(state.goal_node),
            "hop_distance": rt.hop[node],
            "visible_text": {
                "house_numbers": [l.text for l in numbers],
                "street_signs": [l.name for l in signs],
            },
            "success": is_success(world, state) and self.task.name != "Explorer",
        }
        return obs, info


def _coerce_action(action: Action | str | int) -> Action:
    if isinstance(action, Action):
        return action
    if isinstance(action, str):
        try:
            return Action[action]
        except KeyError:
            raise IllegalActionError(f"unknown action name {action!r}") from None
    return Action(action)
