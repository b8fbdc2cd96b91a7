"""Command-line tools: generate, inspect, rollout, bench, serve.

Exit codes: 0 ok, 1 usage error, 2 world-validation failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .world import WorldValidationError


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(1)


def _add_common(p: argparse.ArgumentParser, world: bool = True) -> None:
    p.add_argument("--seed", type=int, default=0, help="random seed")
    if world:
        p.add_argument("--world", required=True, help="world bundle directory")
    p.add_argument("--out", default=None, help="optional output path")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sidewalk-sim", description=__doc__)
    sub = parser.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("generate", help="generate a synthetic world bundle")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="bundle directory to create")
    g.add_argument("--world", default=None, help=argparse.SUPPRESS)
    g.add_argument("--rows", type=int, default=1, help="east-west streets")
    g.add_argument("--cols", type=int, default=1, help="north-south streets")
    g.add_argument("--segment-length", type=float, default=40.0)
    g.add_argument("--node-spacing", type=float, default=1.0)
    g.add_argument("--addresses-per-side", type=int, default=2)
    g.add_argument("--full-res", action="store_true", help="also render 3840x1280 panoramas")

    i = sub.add_parser("inspect", help="validate a bundle and print its stats")
    _add_common(i)

    r = sub.add_parser("rollout", help="run seeded policy rollouts")
    _add_common(r)
    r.add_argument("--policy", choices=["random", "oracle"], default="random")
    r.add_argument("--task", default="AllObs")
    r.add_argument("--episodes", type=int, default=100)
    r.add_argument("--gps-sigma", type=float, default=None)
    r.add_argument("--horizon", type=int, default=None)

    b = sub.add_parser("bench", help="measure single-session step throughput")
    _add_common(b)
    b.add_argument("--steps", type=int, default=20000)
    b.add_argument("--task", default="AllObs")

    s = sub.add_parser("serve", help="serve the episode protocol")
    _add_common(s)
    grp = s.add_mutually_exclusive_group()
    grp.add_argument("--stdio", action="store_true", help="serve one session over stdio")
    grp.add_argument("--port", type=int, default=None, help="TCP port to listen on")
    s.add_argument("--host", default="127.0.0.1")
    return parser


def _cmd_generate(args) -> int:
    from .synth_world import WorldSpec, generate
    from .world_io import load_world, save_bundle

    spec = WorldSpec(
        seed=args.seed,
        rows=args.rows,
        cols=args.cols,
        segment_length=args.segment_length,
        node_spacing=args.node_spacing,
        addresses_per_side=args.addresses_per_side,
        render_full=args.full_res,
    )
    world = generate(spec)
    root = save_bundle(world, args.out)
    reloaded = load_world(root)  # loader-side validation of what we just wrote
    doc = {
        "out": str(root),
        "nodes": world.graph.num_nodes,
        "edges": len(world.graph.edges),
        "segments": sum(1 for s in world.graph.segments if s.kind == "segment"),
        "intersections": sum(1 for s in world.graph.segments if s.kind == "intersection"),
        "addresses": len(world.goal_index),
        "horizon": world.meta["horizon"],
        "content_hash": reloaded.meta.get("content_hash"),
    }
    print(
        f"generated {doc['nodes']} nodes, {doc['segments']} street segments, "
        f"{doc['intersections']} intersections, {doc['addresses']} addresses, "
        f"horizon {doc['horizon']} -> {root}"
    )
    print(json.dumps(doc, sort_keys=True))
    return 0


def _cmd_inspect(args) -> int:
    from .world_io import load_world

    world = load_world(args.world)
    g = world.graph
    doc = {
        "world": str(args.world),
        "nodes": g.num_nodes,
        "edges": len(g.edges),
        "segments": sum(1 for s in g.segments if s.kind == "segment"),
        "intersections": sum(1 for s in g.segments if s.kind == "intersection"),
        "addresses": len(world.goal_index),
        "vocabulary": world.vocabulary,
        "horizon": world.meta.get("horizon"),
        "bbox": list(g.bbox),
        "annotations": {
            "house_numbers": sum(len(a.house_numbers) for a in world.annotations.per_node.values()),
            "street_signs": sum(len(a.street_signs) for a in world.annotations.per_node.values()),
            "doors": sum(len(a.doors) for a in world.annotations.per_node.values()),
        },
        "content_hash": world.meta.get("content_hash"),
    }
    print(f"world {args.world}: valid")
    print(
        f"  {doc['nodes']} nodes, {doc['edges']} edges, {doc['segments']} street segments, "
        f"{doc['intersections']} intersections"
    )
    ann = doc["annotations"]
    print(
        f"  {doc['addresses']} addresses | {ann['house_numbers']} house-number, "
        f"{ann['street_signs']} sign, {ann['doors']} door annotations | horizon {doc['horizon']}"
    )
    print(json.dumps(doc, sort_keys=True))
    if args.out:
        Path(args.out).write_text(json.dumps(doc, sort_keys=True) + "\n")
    return 0


def _cmd_rollout(args) -> int:
    from .rollout import run_rollouts
    from .world_io import load_world

    world = load_world(args.world)
    report = run_rollouts(
        world,
        policy=args.policy,
        task=args.task,
        episodes=args.episodes,
        seed=args.seed,
        horizon=args.horizon,
        gps_sigma=args.gps_sigma,
    )
    print(report.summary())
    print(report.to_json())
    if args.out:
        out = Path(args.out)
        out.with_suffix(".csv").write_text(report.to_csv())
        out.with_suffix(".json").write_text(report.to_json() + "\n")
        print(f"wrote {out.with_suffix('.csv')} and {out.with_suffix('.json')}")
    return 0


def _cmd_bench(args) -> int:
    from .rollout import bench
    from .world_io import load_world

    world = load_world(args.world)
    result = bench(world, steps=args.steps, task=args.task, seed=args.seed)
    print(
        f"{result['steps']} steps in {result['elapsed_s']:.2f}s -> "
        f"{result['steps_per_sec']:.0f} steps/sec, peak memory {result['peak_mem_mb']:.0f} MB"
    )
    print(json.dumps(result, sort_keys=True))
    if args.out:
        Path(args.out).write_text(json.dumps(result, sort_keys=True) + "\n")
    return 0


def _cmd_serve(args) -> int:
    from .protocol import serve_stdio, serve_tcp
    from .world_io import load_world

    world = load_world(args.world)
    if args.port is not None:
        print(f"serving on {args.host}:{args.port}", file=sys.stderr)
        serve_tcp(world, args.host, args.port)
    else:
        serve_stdio(world)
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "inspect": _cmd_inspect,
    "rollout": _cmd_rollout,
    "bench": _cmd_bench,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.cmd](args)
    except WorldValidationError as e:
        print(f"validation error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
