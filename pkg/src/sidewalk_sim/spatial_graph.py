"""Immutable pose-graph world model: nodes, edges, street segments, heading math.

The agent's full state is a :class:`Pose` (graph node + one of 16 discrete
heading wedges of 22.5 degrees each, clockwise from north). A forward move
transitions to the neighboring node nearest the current heading, or nowhere
if no neighbor lies within 45 degrees of it.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

NUM_WEDGES = 16
WEDGE_DEG = 360.0 / NUM_WEDGES  # 22.5
FORWARD_CONE_DEG = 45.0  # inclusive boundary


class TurnAction(Enum):
    LEFT_BIG = -3
    LEFT_SMALL = -1
    RIGHT_SMALL = 1
    RIGHT_BIG = 3


@dataclass(frozen=True)
class Pose:
    """Agent state: graph node plus heading wedge in [0, 16)."""

    node: int
    wedge: int

    def __post_init__(self) -> None:
        if not 0 <= self.wedge < NUM_WEDGES:
            raise ValueError(f"wedge {self.wedge} outside [0, {NUM_WEDGES})")

    @property
    def bearing(self) -> float:
        """Heading in degrees, clockwise from north (+y)."""
        return self.wedge * WEDGE_DEG


@dataclass(frozen=True)
class GraphNode:
    id: int
    x: float  # meters east
    y: float  # meters north
    segment: int  # owning StreetSegment id


@dataclass(frozen=True)
class StreetSegment:
    id: int
    name: str
    nodes: tuple[int, ...]
    kind: str  # "segment" | "intersection"


@dataclass
class WorldGraph:
    """Pose-graph world: nodes with metric coordinates, undirected edges, segments.

    Immutable after construction; adjacency is precomputed with neighbor ids
    sorted ascending so tie-breaks are deterministic everywhere.
    """

    nodes: tuple[GraphNode, ...]
    edges: frozenset[tuple[int, int]]  # canonical (min, max) pairs
    segments: tuple[StreetSegment, ...]
    bbox: tuple[float, float, float, float]  # min_x, min_y, max_x, max_y
    adjacency: tuple[tuple[int, ...], ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        n = len(self.nodes)
        for i, node in enumerate(self.nodes):
            if node.id != i:
                raise ValueError(f"node ids must be dense 0..{n - 1}; got {node.id} at {i}")
            if not (math.isfinite(node.x) and math.isfinite(node.y)):
                raise ValueError(f"node {node.id} has non-finite coordinates")
        adj: list[list[int]] = [[] for _ in range(n)]
        for a, b in self.edges:
            if a == b or not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"bad edge ({a}, {b})")
            adj[a].append(b)
            adj[b].append(a)
        self.adjacency = tuple(tuple(sorted(ns)) for ns in adj)

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    def neighbors(self, node: int) -> tuple[int, ...]:
        return self.adjacency[node]

    def node_xy(self, node: int) -> tuple[float, float]:
        g = self.nodes[node]
        return g.x, g.y

    def segment_of(self, node: int) -> StreetSegment:
        return self.segments[self.nodes[node].segment]


def make_world(
    coords: list[tuple[float, float]],
    edges: list[tuple[int, int]],
    segments: list[StreetSegment] | None = None,
    bbox: tuple[float, float, float, float] | None = None,
) -> WorldGraph:
    """Assemble a WorldGraph from bare coordinates and edge pairs.

    When no segments are given, all nodes are placed on a single anonymous
    street segment. Convenience for tests and hand-built worlds.
    """
    if segments is None:
        segments = [StreetSegment(0, "street", tuple(range(len(coords))), "segment")]
        node_seg = {i: 0 for i in range(len(coords))}
    else:
        node_seg = {}
        for seg in segments:
            for nid in seg.nodes:
                node_seg[nid] = seg.id
    nodes = tuple(
        GraphNode(i, float(x), float(y), node_seg[i]) for i, (x, y) in enumerate(coords)
    )
    if bbox is None:
        xs = [n.x for n in nodes]
        ys = [n.y for n in nodes]
        bbox = (min(xs), min(ys), max(xs), max(ys))
    canonical = frozenset((min(a, b), max(a, b)) for a, b in edges)
    return WorldGraph(nodes, canonical, tuple(segments), bbox)


def circular_diff_deg(a: float, b: float) -> float:
    """Signed circular difference a - b, mapped into (-180, 180]."""
    d = (a - b) % 360.0
    if d > 180.0:
        d -= 360.0
    return d


def wedge_distance(a: int, b: int) -> int:
    """Shortest rotation between two wedges, in wedge steps (0..8)."""
    d = (a - b) % NUM_WEDGES
    return min(d, NUM_WEDGES - d)


def turn(pose: Pose, action: TurnAction) -> Pose:
    """Rotate in place: small turns shift 1 wedge, big turns 3, modulo 16."""
    return Pose(pose.node, (pose.wedge + action.value) % NUM_WEDGES)


def bearing(world: WorldGraph, a: int, b: int) -> float:
    """Clockwise angle from north (+y) of the vector a -> b, in [0, 360)."""
    ax, ay = world.node_xy(a)
    bx, by = world.node_xy(b)
    dx, dy = bx - ax, by - ay
    if dx == 0.0 and dy == 0.0:
        raise ValueError(f"nodes {a} and {b} have coincident coordinates")
    return math.degrees(math.atan2(dx, dy)) % 360.0


def forward_target(world: WorldGraph, pose: Pose) -> int | None:
    """Neighbor nearest the current heading, or None if all are >45 deg off.

    Ties on angular offset break toward the smaller node id (neighbors are
    pre-sorted, strict `<` keeps the first).
    """
    best: int | None = None
    best_off = math.inf
    for nbr in world.neighbors(pose.node):
        off = abs(circular_diff_deg(bearing(world, pose.node, nbr), pose.bearing))
        if off < best_off:
            best_off = off
            best = nbr
    if best is None or best_off > FORWARD_CONE_DEG:
        return None
    return best


def hop_distance(world: WorldGraph, a: int, b: int) -> int:
    """Unweighted shortest-path edge count between two nodes (BFS)."""
    if a == b:
        return 0
    dist = hop_distances_from(world, b)
    d = dist[a]
    if d < 0:
        raise ValueError(f"nodes {a} and {b} are not connected")
    return d


def hop_distances_from(world: WorldGraph, source: int) -> list[int]:
    """BFS hop distance from `source` to every node; -1 marks unreachable."""
    dist = [-1] * world.num_nodes
    dist[source] = 0
    q = deque([source])
    while q:
        cur = q.popleft()
        d = dist[cur] + 1
        for nbr in world.adjacency[cur]:
            if dist[nbr] < 0:
                dist[nbr] = d
                q.append(nbr)
    return dist


def is_connected(world: WorldGraph) -> tuple[bool, int | None]:
    """Whether the graph is connected; returns a stranded node id if not."""
    if world.num_nodes <= 1:
        return True, None
    dist = hop_distances_from(world, 0)
    for nid, d in enumerate(dist):
        if d < 0:
            return False, nid
    return True, None


def nearest_wedge(bearing_deg: float) -> int:
    """Wedge whose bearing is circularly nearest; ties toward the smaller index."""
    best = 0
    best_d = math.inf
    for w in range(NUM_WEDGES):
        d = abs(circular_diff_deg(w * WEDGE_DEG, bearing_deg))
        if d < best_d:
            best_d = d
            best = w
    return best
