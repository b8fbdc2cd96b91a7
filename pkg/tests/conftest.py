"""Shared fixtures: hand-built micro-worlds and session-scoped generated ones."""

from __future__ import annotations

import math

import numpy as np
import pytest

from sidewalk_sim.annotations import (
    AnnotationSet,
    DoorPolygon,
    NodeAnnotations,
)
from sidewalk_sim.spatial_graph import StreetSegment, WorldGraph, make_world
from sidewalk_sim.synth_world import WorldSpec, generate
from sidewalk_sim.world import LoadedWorld, PanoramaStore

FULL_W, FULL_H = 3840, 1280


def black_panos(num_nodes: int, width: int = 224, height: int = 84) -> PanoramaStore:
    blank = np.zeros((height, width, 3), dtype=np.uint8)
    return PanoramaStore({n: blank for n in range(num_nodes)})


def door_at_bearing(
    bearing_deg: float,
    width_deg: float,
    house_number: str = "42",
    y0: float = 500.0,
    y1: float = 700.0,
) -> DoorPolygon:
    """Door polygon whose column extent is centered on a bearing (full-res frame)."""
    center = (bearing_deg + 180.0) / 360.0 * FULL_W
    half = width_deg / 720.0 * FULL_W
    x0 = (center - half) % FULL_W
    x1 = (center + half) % FULL_W
    verts = ((x0, y0), (x1, y0), (x1, y1), (x0, y1))
    area = (width_deg / 360.0 * FULL_W) * (y1 - y0)
    return DoorPolygon(verts, house_number, area, x0, x1)


def build_world(
    coords: list[tuple[float, float]],
    edges: list[tuple[int, int]],
    doors: dict[int, DoorPolygon],
    segments: list[StreetSegment] | None = None,
    vocab: tuple[str, ...] = ("Main St",),
    bbox: tuple[float, float, float, float] | None = None,
) -> LoadedWorld:
    """Assemble a LoadedWorld from bare parts with black panoramas."""
    graph = make_world(coords, edges, segments, bbox=bbox)
    per_node = {n: NodeAnnotations(doors=(d,)) for n, d in doors.items()}
    return LoadedWorld(
        graph,
        AnnotationSet(per_node, FULL_W, FULL_H),
        black_panos(len(coords)),
        list(vocab),
    )


def corridor_world(length: int = 10, goal_bearing: float = 0.0, door_width: float = 20.0) -> LoadedWorld:
    """Straight north-south chain; the door sits at the north-end node."""
    coords = [(0.0, float(i)) for i in range(length)]
    edges = [(i, i + 1) for i in range(length - 1)]
    doors = {length - 1: door_at_bearing(goal_bearing, door_width)}
    return build_world(coords, edges, doors, bbox=(-10.0, -10.0, 10.0, length + 9.0))


@pytest.fixture(scope="session")
def tiny_world() -> LoadedWorld:
    """One 14 m street segment, 15 nodes, 4 addresses."""
    return generate(WorldSpec(seed=7, rows=1, cols=0, segment_length=14.0, addresses_per_side=2))


@pytest.fixture(scope="session")
def plus_world() -> LoadedWorld:
    """Plus-shaped world: 1 intersection, 4 street segments."""
    return generate(WorldSpec(seed=3, rows=1, cols=1, segment_length=12.0, addresses_per_side=2))


@pytest.fixture(scope="session")
def grid_world() -> LoadedWorld:
    """2x2 street grid: 4 intersections, 12 street segments."""
    return generate(WorldSpec(seed=5, rows=2, cols=2, segment_length=12.0, addresses_per_side=1))


@pytest.fixture(scope="session")
def full_res_world() -> LoadedWorld:
    """Tiny world with 3840x1280 rasters for containment/readback checks."""
    return generate(
        WorldSpec(seed=11, rows=1, cols=0, segment_length=14.0, addresses_per_side=2, render_full=True)
    )


def random_connected_graph(rng: np.random.Generator, n: int) -> WorldGraph:
    """Random spanning tree plus extra chords over distinct lattice points."""
    cells = rng.choice(60 * 60, size=n, replace=False)
    coords = [(float(c % 60), float(c // 60)) for c in cells]
    edges = [(int(rng.integers(i)), i) for i in range(1, n)]
    for _ in range(n // 4):
        a, b = rng.integers(n), rng.integers(n)
        if a != b:
            edges.append((int(min(a, b)), int(max(a, b))))
    return make_world(coords, edges)


def brute_force_forward(world: WorldGraph, node: int, wedge: int) -> int | None:
    """Independent forward-transition oracle: recompute all neighbor bearings."""
    heading = wedge * 22.5
    best, best_off = None, 1e9
    for nbr in sorted(world.adjacency[node]):
        ax, ay = world.node_xy(node)
        bx, by = world.node_xy(nbr)
        b = math.degrees(math.atan2(bx - ax, by - ay)) % 360.0
        off = abs((b - heading + 180.0) % 360.0 - 180.0)
        if off < best_off:
            best, best_off = nbr, off
    return best if best is not None and best_off <= 45.0 else None
