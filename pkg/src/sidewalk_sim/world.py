"""Loaded-world aggregate: graph + annotations + goal index + panoramas,
with per-goal runtime caches shared by rewards, the episode engine, and the
oracle. The aggregate is immutable after load and safe to share across
concurrent episode sessions; caches are filled once under a lock."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .annotations import (
    AnnotationSet,
    DoorPolygon,
    GoalIndex,
    build_goal_index,
    door_framing_wedges,
)
from .spatial_graph import (
    NUM_WEDGES,
    Pose,
    WorldGraph,
    bearing,
    forward_target,
    hop_distances_from,
    is_connected,
    nearest_wedge,
)


class WorldValidationError(ValueError):
    """A world bundle violates a structural invariant."""


class PanoramaStore:
    """Node-indexed panorama rasters; low-res held in memory, full-res loaded
    lazily from disk when present."""

    def __init__(
        self,
        low: dict[int, np.ndarray],
        full: dict[int, np.ndarray] | None = None,
        full_paths: dict[int, Path] | None = None,
    ):
        self._low = low
        self._full = dict(full or {})
        self._full_paths = dict(full_paths or {})
        self._lock = threading.Lock()

    def low(self, node: int) -> np.ndarray:
        try:
            return self._low[node]
        except KeyError:
            raise KeyError(f"no low-res panorama for node {node}") from None

    def has_full(self, node: int) -> bool:
        return node in self._full or node in self._full_paths

    def full(self, node: int) -> np.ndarray:
        with self._lock:
            if node in self._full:
                return self._full[node]
            path = self._full_paths.get(node)
            if path is None:
                raise KeyError(f"no full-res panorama for node {node}")
            from PIL import Image

            arr = np.asarray(Image.open(path).convert("RGB"))
            self._full[node] = arr
            return arr


@dataclass
class GoalRuntime:
    """Per-goal derived fields: hop distances, next-node-toward-goal choices,
    and the door-framing wedge set at the goal node."""

    address: str
    node: int
    door: DoorPolygon
    framing: frozenset[int]
    hop: list[int]
    next_toward: list[int]
    pose_dist: np.ndarray | None = None  # (N, 16) action counts, filled by oracle
    _correct: dict[int, frozenset[int]] = field(default_factory=dict, repr=False)

    def correct_wedges(self, world: "LoadedWorld", node: int) -> frozenset[int]:
        """Wedges counted as 'toward the goal' for turn shaping at `node`."""
        cached = self._correct.get(node)
        if cached is not None:
            return cached
        if node == self.node:
            result = self.framing
        else:
            nxt = self.next_toward[node]
            if nxt < 0:
                raise WorldValidationError(f"node {node} cannot reach goal {self.address}")
            result = frozenset({nearest_wedge(bearing(world.graph, node, nxt))})
        self._correct[node] = result
        return result


class LoadedWorld:
    """Immutable world bundle ready for episodes."""

    def __init__(
        self,
        graph: WorldGraph,
        annotations: AnnotationSet,
        panoramas: PanoramaStore,
        vocabulary: list[str],
        meta: dict | None = None,
        goal_index: GoalIndex | None = None,
    ):
        self.graph = graph
        self.annotations = annotations
        self.panoramas = panoramas
        self.vocabulary = list(vocabulary)
        self.meta = dict(meta or {})
        self.goal_index = goal_index if goal_index is not None else build_goal_index(graph, annotations)
        self._runtimes: dict[str, GoalRuntime] = {}
        self._forward_table: np.ndarray | None = None
        self._lock = threading.Lock()

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        return self.graph.bbox

    def goal_runtime(self, address: str) -> GoalRuntime:
        with self._lock:
            rt = self._runtimes.get(address)
            if rt is not None:
                return rt
            entry = self.goal_index[address]
            framing = door_framing_wedges(self.annotations, entry.node, entry.door)
            if not framing:
                raise WorldValidationError(
                    f"door for address {address} is never fully containable "
                    f"in the FOV from its goal node {entry.node}"
                )
            hop = hop_distances_from(self.graph, entry.node)
            next_toward = [-1] * self.graph.num_nodes
            for n in range(self.graph.num_nodes):
                if n == entry.node or hop[n] < 0:
                    continue
                for nbr in self.graph.adjacency[n]:  # sorted: first hit = smallest id
                    if hop[nbr] == hop[n] - 1:
                        next_toward[n] = nbr
                        break
            rt = GoalRuntime(address, entry.node, entry.door, framing, hop, next_toward)
            self._runtimes[address] = rt
            return rt

    def forward_table(self) -> np.ndarray:
        """(N, 16) table of forward-transition targets, -1 where blocked."""
        with self._lock:
            if self._forward_table is None:
                n = self.graph.num_nodes
                table = np.full((n, NUM_WEDGES), -1, dtype=np.int32)
                for node in range(n):
                    for wedge in range(NUM_WEDGES):
                        tgt = forward_target(self.graph, Pose(node, wedge))
                        if tgt is not None:
                            table[node, wedge] = tgt
                self._forward_table = table
            return self._forward_table


def validate_world(world: LoadedWorld) -> None:
    """Fail fast with the first violated structural invariant, named."""
    graph = world.graph
    ok, stranded = is_connected(graph)
    if not ok:
        raise WorldValidationError(f"graph is disconnected: node {stranded} is unreachable from node 0")
    seen: dict[int, int] = {}
    for seg in graph.segments:
        for nid in seg.nodes:
            if nid in seen:
                raise WorldValidationError(
                    f"node {nid} appears in segments {seen[nid]} and {seg.id}; segments must partition nodes"
                )
            seen[nid] = seg.id
        for a, b in zip(seg.nodes, seg.nodes[1:]):
            if b not in graph.adjacency[a]:
                raise WorldValidationError(
                    f"segment {seg.id} lists consecutive nodes {a}, {b} that are not graph-adjacent"
                )
    if len(seen) != graph.num_nodes:
        missing = next(n for n in range(graph.num_nodes) if n not in seen)
        raise WorldValidationError(f"node {missing} belongs to no street segment")
    if graph.num_nodes > 1:
        for node in range(graph.num_nodes):
            if not graph.adjacency[node]:
                raise WorldValidationError(f"node {node} has no incident edges")
    for address in world.goal_index.addresses:
        world.goal_runtime(address)  # raises if door is never framable
