#!/usr/bin/env python3
"""Generation statistics sweep: how world size scales with the street grid.

Example:
    python scripts/world_report.py --seeds 0 1 2
"""

from __future__ import annotations

import argparse
import time

from sidewalk_sim.synth_world import WorldSpec, generate


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0])
    ap.add_argument("--segment-length", type=float, default=24.0)
    args = ap.parse_args()

    print(f"{'grid':>6} {'seed':>4} {'nodes':>6} {'segs':>5} {'inters':>6} "
          f"{'addrs':>5} {'numbers':>7} {'signs':>5} {'doors':>5} {'horizon':>7} {'gen_s':>6}")
    for rows, cols in ((1, 0), (1, 1), (2, 2), (3, 2)):
        for seed in args.seeds:
            t0 = time.perf_counter()
            world = generate(
                WorldSpec(seed=seed, rows=rows, cols=cols, segment_length=args.segment_length)
            )
            dt = time.perf_counter() - t0
            ann = world.annotations.per_node.values()
            print(
                f"{rows}x{cols:>4} {seed:>4} {world.graph.num_nodes:>6} "
                f"{sum(1 for s in world.graph.segments if s.kind == 'segment'):>5} "
                f"{sum(1 for s in world.graph.segments if s.kind == 'intersection'):>6} "
                f"{len(world.goal_index):>5} "
                f"{sum(len(a.house_numbers) for a in ann):>7} "
                f"{sum(len(a.street_signs) for a in ann):>5} "
                f"{sum(len(a.doors) for a in ann):>5} "
                f"{world.meta['horizon']:>7} {dt:>6.1f}"
            )


if __name__ == "__main__":
    main()
