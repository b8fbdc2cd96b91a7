"""Seeded batch rollouts (random / oracle policies), report tables, and the
single-session throughput benchmark."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .env_core import Episode, TASKS, TaskConfig
from .world import LoadedWorld


@dataclass(frozen=True)
class EpisodeRow:
    index: int
    success: bool
    length: int
    total_reward: float


@dataclass
class RolloutReport:
    policy: str
    task: str
    seed: int
    rows: list[EpisodeRow] = field(default_factory=list)

    @property
    def episodes(self) -> int:
        return len(self.rows)

    @property
    def success_rate(self) -> float:
        return float(np.mean([r.success for r in self.rows]))

    @property
    def reward_mean(self) -> float:
        return float(np.mean([r.total_reward for r in self.rows]))

    @property
    def reward_sd(self) -> float:
        return float(np.std([r.total_reward for r in self.rows]))

    @property
    def length_mean(self) -> float:
        return float(np.mean([r.length for r in self.rows]))

    @property
    def length_sd(self) -> float:
        return float(np.std([r.length for r in self.rows]))

    def to_csv(self) -> str:
        lines = ["episode,success,length,total_reward"]
        for r in self.rows:
            lines.append(f"{r.index},{int(r.success)},{r.length},{r.total_reward!r}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {
            "policy": self.policy,
            "task": self.task,
            "seed": self.seed,
            "episodes": self.episodes,
            "success_rate": self.success_rate,
            "reward_mean": self.reward_mean,
            "reward_sd": self.reward_sd,
            "length_mean": self.length_mean,
            "length_sd": self.length_sd,
            "rows": [
                {
                    "episode": r.index,
                    "success": r.success,
                    "length": r.length,
                    "total_reward": r.total_reward,
                }
                for r in self.rows
            ],
        }
        return json.dumps(doc, sort_keys=True)

    def summary(self) -> str:
        return (
            f"{self.policy} policy on {self.task}: {self.episodes} episodes | "
            f"success {self.success_rate * 100:.1f}% | "
            f"reward {self.reward_mean:.2f} +- {self.reward_sd:.2f} | "
            f"length {self.length_mean:.1f} +- {self.length_sd:.1f}"
        )


def run_rollouts(
    world: LoadedWorld,
    policy: str = "random",
    task: TaskConfig | str = "AllObs",
    episodes: int = 100,
    seed: int = 0,
    horizon: int | None = None,
    gps_sigma: float | None = None,
) -> RolloutReport:
    """Run seeded episodes under a scripted policy; fully reproducible."""
    if policy not in ("random", "oracle"):
        raise ValueError(f"policy must be 'random' or 'oracle', got {policy!r}")
    task_name = task if isinstance(task, str) else task.name
    if isinstance(task, str) and task not in TASKS:
        raise ValueError(f"unknown task {task!r}; tasks: {sorted(TASKS)}")
    if policy == "oracle":
        from . import oracle as oracle_mod

    episode = Episode(world, task, horizon=horizon, gps_sigma=gps_sigma)
    base = np.random.SeedSequence(seed)
    report = RolloutReport(policy=policy, task=task_name, seed=seed)
    for i, child in enumerate(base.spawn(episodes)):
        ep_seed, policy_seed = child.spawn(2)
        rng = np.random.default_rng(policy_seed)
        episode.reset(seed=ep_seed)
        legal = episode.legal_actions
        steps = 0
        success = False
        while True:
            if policy == "random":
                action = legal[int(rng.integers(len(legal)))]
            else:
                action = oracle_mod.act(world, episode.state)
            result = episode.step(action)
            steps += 1
            if result.done:
                success = bool(result.info["success"])
                break
        report.rows.append(
            EpisodeRow(i, success, steps, float(episode.state.cumulative_reward))
        )
    return report


def bench(
    world: LoadedWorld,
    steps: int = 20000,
    task: TaskConfig | str = "AllObs",
    seed: int = 0,
    warmup: int = 1000,
) -> dict:
    """Steady-state step() throughput with full observation assembly.

    Single session, random legal actions, auto-reset on episode end.
    Reports steps/sec and the process peak RSS.
    """
    import resource

    episode = Episode(world, task)
    rng = np.random.default_rng(seed)
    episode.reset(seed=seed)
    legal = episode.legal_actions

    def one_step() -> None:
        action = legal[int(rng.integers(len(legal)))]
        result = episode.step(action)
        if result.done:
            episode.reset(seed=int(rng.integers(2**31)))

    for _ in range(warmup):
        one_step()
    t0 = time.perf_counter()
    for _ in range(steps):
        one_step()
    elapsed = time.perf_counter() - t0
    peak_kb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    return {
        "steps": steps,
        "elapsed_s": elapsed,
        "steps_per_sec": steps / elapsed,
        "peak_mem_mb": peak_kb / 1024.0,
    }
