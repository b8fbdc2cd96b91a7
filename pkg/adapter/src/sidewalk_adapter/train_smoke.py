"""Smoke-scale PPO on the engine-side fusion tensor.

The policy network consumes the (8, w, w) tensor delivered over the wire:
three convolutional layers with 32, 64, and 32 filters, a 256-unit dense
layer, ReLU throughout, with a categorical actor head and a scalar critic.
Hyperparameters follow the recommended Atari settings with lr 3e-4: 2048
steps per update, 4 epochs over 32 minibatches, clip 0.2, gamma 0.99,
GAE 0.95, value coefficient 0.5, zero entropy bonus, gradient norm 0.5,
linear learning-rate decay.

This is a desk-scale sanity trainer: the goal is to beat the random
baseline on a one-segment world, not to reproduce full-scale results.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np
import torch
import torch.nn as nn

from .env import AdapterEnv


@dataclass
class SmokeConfig:
    total_frames: int = 50_000
    num_steps: int = 2048
    lr: float = 3e-4
    linear_lr_decay: bool = True
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip: float = 0.2
    epochs: int = 4
    minibatches: int = 32
    value_coef: float = 0.5
    entropy_coef: float = 0.0
    max_grad_norm: float = 0.5
    seed: int = 0
    deterministic: bool = False


class FusionPolicy(nn.Module):
    def __init__(self, in_channels: int, num_actions: int, width: int = 84):
        super().__init__()
        self.body = nn.Sequential(
            nn.Conv2d(in_channels, 32, kernel_size=8, stride=4),
            nn.ReLU(),
            nn.Conv2d(32, 64, kernel_size=4, stride=2),
            nn.ReLU(),
            nn.Conv2d(64, 32, kernel_size=3, stride=1),
            nn.ReLU(),
            nn.Flatten(),
        )
        with torch.no_grad():
            flat = self.body(torch.zeros(1, in_channels, width, width)).shape[1]
        self.fc = nn.Sequential(nn.Linear(flat, 256), nn.ReLU())
        self.actor = nn.Linear(256, num_actions)
        self.critic = nn.Linear(256, 1)

    def forward(self, obs: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        hidden = self.fc(self.body(obs))
        return self.actor(hidden), self.critic(hidden).squeeze(-1)

    def act(self, obs: torch.Tensor) -> tuple[int, float, float]:
        logits, value = self(obs.unsqueeze(0))
        dist = torch.distributions.Categorical(logits=logits)
        action = dist.sample()
        return int(action.item()), float(dist.log_prob(action).item()), float(value.item())


def _gae(rewards, values, dones, last_value, gamma, lam):
    n = len(rewards)
    advantages = np.zeros(n, dtype=np.float64)
    gae = 0.0
    for t in reversed(range(n)):
        next_value = last_value if t == n - 1 else values[t + 1]
        next_nonterminal = 0.0 if dones[t] else 1.0
        delta = rewards[t] + gamma * next_value * next_nonterminal - values[t]
        gae = delta + gamma * lam * next_nonterminal * gae
        advantages[t] = gae
    return advantages


def train_smoke(env: AdapterEnv, config: SmokeConfig | None = None) -> dict:
    """Train on one fused-mode env; returns the learning-curve report."""
    config = config or SmokeConfig()
    if "fused" not in env.observation_space.spaces:
        raise ValueError("train_smoke needs an AdapterEnv created with fused=True")
    if config.deterministic:
        torch.set_num_threads(1)
    torch.manual_seed(config.seed)

    shape = env.observation_space.spaces["fused"].shape
    policy = FusionPolicy(shape[0], env.action_space.n, shape[1])
    optimizer = torch.optim.Adam(policy.parameters(), lr=config.lr)

    num_updates = max(1, config.total_frames // config.num_steps)
    episode_seed = config.seed * 1_000_003
    obs = torch.from_numpy(env.reset(seed=episode_seed)["fused"])
    episode_reward = 0.0
    completed: list[float] = []
    curve: list[dict] = []
    frames = 0

    for update in range(num_updates):
        if config.linear_lr_decay:
            frac = 1.0 - update / num_updates
            for group in optimizer.param_groups:
                group["lr"] = config.lr * frac

        buf_obs = torch.empty((config.num_steps, *shape), dtype=torch.float32)
        buf_actions = np.zeros(config.num_steps, dtype=np.int64)
        buf_logp = np.zeros(config.num_steps, dtype=np.float64)
        buf_values = np.zeros(config.num_steps, dtype=np.float64)
        buf_rewards = np.zeros(config.num_steps, dtype=np.float64)
        buf_dones = np.zeros(config.num_steps, dtype=bool)
        update_episodes: list[float] = []

        with torch.no_grad():
            for t in range(config.num_steps):
                action, logp, value = policy.act(obs)
                buf_obs[t] = obs
                buf_actions[t] = action
                buf_logp[t] = logp
                buf_values[t] = value
                next_obs, reward, done, _info = env.step(action)
                buf_rewards[t] = reward
                buf_dones[t] = done
                episode_reward += reward
                frames += 1
                if done:
                    completed.append(episode_reward)
                    update_episodes.append(episode_reward)
                    episode_reward = 0.0
                    episode_seed += 1
                    next_obs = env.reset(seed=episode_seed)
                obs = torch.from_numpy(next_obs["fused"])
            _, last_value = policy(obs.unsqueeze(0))

        advantages = _gae(
            buf_rewards, buf_values, buf_dones, float(last_value.item()),
            config.gamma, config.gae_lambda,
        )
        returns = advantages + buf_values
        adv_t = torch.from_numpy(
            ((advantages - advantages.mean()) / (advantages.std() + 1e-8)).astype(np.float32)
        )
        returns_t = torch.from_numpy(returns.astype(np.float32))
        logp_t = torch.from_numpy(buf_logp.astype(np.float32))
        actions_t = torch.from_numpy(buf_actions)

        batch = config.num_steps // config.minibatches
        indices = np.arange(config.num_steps)
        rng = np.random.default_rng(config.seed * 7919 + update)
        for _epoch in range(config.epochs):
            rng.shuffle(indices)
            for mb in range(config.minibatches):
                idx = indices[mb * batch : (mb + 1) * batch]
                logits, values = policy(buf_obs[idx])
                dist = torch.distributions.Categorical(logits=logits)
                new_logp = dist.log_prob(actions_t[idx])
                ratio = torch.exp(new_logp - logp_t[idx])
                surr1 = ratio * adv_t[idx]
                surr2 = torch.clamp(ratio, 1.0 - config.clip, 1.0 + config.clip) * adv_t[idx]
                policy_loss = -torch.min(surr1, surr2).mean()
                value_loss = 0.5 * (values - returns_t[idx]).pow(2).mean()
                entropy = dist.entropy().mean()
                loss = (
                    policy_loss
                    + config.value_coef * value_loss
                    - config.entropy_coef * entropy
                )
                optimizer.zero_grad()
                loss.backward()
                nn.utils.clip_grad_norm_(policy.parameters(), config.max_grad_norm)
                optimizer.step()

        recent = update_episodes if update_episodes else completed[-10:]
        curve.append(
            {
                "update": update,
                "frames": frames,
                "mean_episode_reward": float(np.mean(recent)) if recent else float("nan"),
                "episodes": len(update_episodes),
            }
        )

    return {
        "config": asdict(config),
        "frames": frames,
        "episodes_completed": len(completed),
        "episode_rewards": completed,
        "curve": curve,
        "policy": policy,
    }


def evaluate(env: AdapterEnv, policy: FusionPolicy, episodes: int = 100, seed: int = 10**6) -> list[float]:
    """Roll the trained (stochastic) policy; returns per-episode total rewards."""
    totals = []
    with torch.no_grad():
        for i in range(episodes):
            obs = torch.from_numpy(env.reset(seed=seed + i)["fused"])
            total = 0.0
            while True:
                action, _, _ = policy.act(obs)
                next_obs, reward, done, _ = env.step(action)
                total += reward
                if done:
                    break
                obs = torch.from_numpy(next_obs["fused"])
            totals.append(total)
    return totals


def main(argv: list[str] | None = None) -> int:
    import argparse

    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--world", help="world bundle directory (spawns a stdio engine)")
    ap.add_argument("--endpoint", help="TCP endpoint host:port of a running engine")
    ap.add_argument("--task", default="AllObs")
    ap.add_argument("--frames", type=int, default=50_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--eval-episodes", type=int, default=100)
    ap.add_argument("--out", default=None, help="write the JSON report here")
    args = ap.parse_args(argv)

    env = AdapterEnv(args.task, endpoint=args.endpoint, world=args.world, fused=True)
    report = train_smoke(env, SmokeConfig(total_frames=args.frames, seed=args.seed))
    rewards = evaluate(env, report["policy"], episodes=args.eval_episodes, seed=args.seed + 10**6)
    env.close()
    report.pop("policy")
    report["eval_rewards"] = rewards
    report["eval_mean"] = float(np.mean(rewards))
    print(
        f"trained {report['frames']} frames, {report['episodes_completed']} episodes; "
        f"eval mean reward {report['eval_mean']:.2f} over {len(rewards)} episodes"
    )
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(report, fh, sort_keys=True)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
