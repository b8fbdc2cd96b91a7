#!/usr/bin/env python3
"""Compare oracle and random policies on one world across tasks.

Example:
    python scripts/compare_policies.py --seed 8 --segment-length 40 --episodes 200
"""

from __future__ import annotations

import argparse

from sidewalk_sim.rollout import run_rollouts
from sidewalk_sim.synth_world import WorldSpec, generate


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=8)
    ap.add_argument("--rows", type=int, default=1)
    ap.add_argument("--cols", type=int, default=1)
    ap.add_argument("--segment-length", type=float, default=40.0)
    ap.add_argument("--episodes", type=int, default=200)
    ap.add_argument("--tasks", nargs="+", default=["AllObs", "Intersection", "Sparse", "Explorer"])
    args = ap.parse_args()

    world = generate(
        WorldSpec(seed=args.seed, rows=args.rows, cols=args.cols, segment_length=args.segment_length)
    )
    print(
        f"world: seed {args.seed}, {world.graph.num_nodes} nodes, "
        f"{len(world.goal_index)} addresses, horizon {world.meta['horizon']}\n"
    )
    for task in args.tasks:
        for policy in ("oracle", "random"):
            report = run_rollouts(world, policy, task, episodes=args.episodes, seed=args.seed)
            print(" ", report.summary())
        print()


if __name__ == "__main__":
    main()
