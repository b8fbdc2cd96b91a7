"""Ground-truth scene-text labels per panorama and FOV visibility tests.

Panorama column convention: column c corresponds to bearing c/W*360 - 180,
so the panorama is centered on north and wraps at due south. All label
coordinates live in the full-resolution pixel frame regardless of which
raster resolutions exist on disk.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .spatial_graph import Pose, WorldGraph

DEFAULT_FOV_DEG = 135.0
FULL_PANO_WIDTH = 3840
FULL_PANO_HEIGHT = 1280


@dataclass(frozen=True)
class ColumnInterval:
    """Half-open circular column interval [start, start + width) mod pano_width."""

    start: float
    width: float
    pano_width: int

    @property
    def end(self) -> float:
        return (self.start + self.width) % self.pano_width

    def contains_column(self, col: float) -> bool:
        return (col - self.start) % self.pano_width < self.width

    def contains_span(self, x0: float, x1: float) -> bool:
        """True if the contiguous column run x0..x1 (wrapping when x1 < x0) fits inside."""
        w = self.pano_width
        return (x0 - self.start) % w + (x1 - x0) % w < self.width


@dataclass(frozen=True)
class BoundingBox:
    """Pixel box; columns inclusive and circular (x0 > x1 wraps), rows y0 < y1."""

    x0: int
    x1: int
    y0: int
    y1: int

    def __post_init__(self) -> None:
        if not self.y0 < self.y1:
            raise ValueError(f"box rows must satisfy y0 < y1, got [{self.y0}, {self.y1}]")

    def col_span(self, pano_width: int) -> int:
        return (self.x1 - self.x0) % pano_width + 1

    def area(self, pano_width: int) -> int:
        return self.col_span(pano_width) * (self.y1 - self.y0)


@dataclass(frozen=True)
class HouseNumberLabel:
    box: BoundingBox
    text: str

    def __post_init__(self) -> None:
        if not (self.text.isdigit() and 1 <= len(self.text) <= 4):
            raise ValueError(f"house number must be a 1-4 digit string, got {self.text!r}")


@dataclass(frozen=True)
class StreetSignLabel:
    box: BoundingBox
    name: str


@dataclass(frozen=True)
class DoorPolygon:
    """Projected door outline with its address; column extent is cached for
    containment tests (min/max vertex columns, wraparound-aware)."""

    vertices: tuple[tuple[float, float], ...]
    house_number: str
    area: float
    x0: float
    x1: float

    def __post_init__(self) -> None:
        if len(self.vertices) < 3:
            raise ValueError("door polygon needs at least 3 vertices")
        if self.area <= 0:
            raise ValueError("door polygon area must be positive")


@dataclass(frozen=True)
class NodeAnnotations:
    house_numbers: tuple[HouseNumberLabel, ...] = ()
    street_signs: tuple[StreetSignLabel, ...] = ()
    doors: tuple[DoorPolygon, ...] = ()


@dataclass
class AnnotationSet:
    """Per-panorama labels plus the label coordinate frame dimensions."""

    per_node: dict[int, NodeAnnotations]
    pano_width: int = FULL_PANO_WIDTH
    pano_height: int = FULL_PANO_HEIGHT

    def node(self, node_id: int) -> NodeAnnotations:
        return self.per_node.get(node_id, NodeAnnotations())


@dataclass(frozen=True)
class GoalEntry:
    node: int
    door: DoorPolygon


@dataclass
class GoalIndex:
    """Address -> (goal node, door polygon); the goal node is the panorama
    where that address's door has the largest annotated area."""

    entries: dict[str, GoalEntry] = field(default_factory=dict)

    @property
    def addresses(self) -> list[str]:
        return sorted(self.entries)

    def __getitem__(self, address: str) -> GoalEntry:
        return self.entries[address]

    def __len__(self) -> int:
        return len(self.entries)


def fov_interval(pose: Pose, pano_width: int, fov: float = DEFAULT_FOV_DEG) -> ColumnInterval:
    """Column window of width pano_width * fov/360 centered on the heading."""
    if not 0.0 < fov < 360.0:
        raise ValueError(f"fov must be in (0, 360), got {fov}")
    center = (pose.bearing + 180.0) / 360.0 * pano_width % pano_width
    width = pano_width * fov / 360.0
    return ColumnInterval((center - width / 2.0) % pano_width, width, pano_width)


def visible_labels(
    annotations: AnnotationSet,
    pose: Pose,
    fov: float = DEFAULT_FOV_DEG,
) -> tuple[list[HouseNumberLabel], list[StreetSignLabel], list[DoorPolygon]]:
    """Labels of the pose's panorama fully inside the horizontal FOV.

    The observation crop keeps the panorama's full vertical extent, so only
    horizontal containment is tested. House numbers and signs come back
    sorted by descending box area (ties by ascending left column); doors by
    descending polygon area.
    """
    ann = annotations.node(pose.node)
    w = annotations.pano_width
    fov_cols = fov_interval(pose, w, fov)

    def box_visible(box: BoundingBox) -> bool:
        return fov_cols.contains_span(box.x0, box.x1)

    numbers = sorted(
        (l for l in ann.house_numbers if box_visible(l.box)),
        key=lambda l: (-l.box.area(w), l.box.x0),
    )
    signs = sorted(
        (l for l in ann.street_signs if box_visible(l.box)),
        key=lambda l: (-l.box.area(w), l.box.x0),
    )
    doors = sorted(
        (d for d in ann.doors if fov_cols.contains_span(d.x0, d.x1)),
        key=lambda d: -d.area,
    )
    return numbers, signs, doors


def door_framing_wedges(
    annotations: AnnotationSet, node: int, door: DoorPolygon, fov: float = DEFAULT_FOV_DEG
) -> frozenset[int]:
    """Wedges at `node` whose FOV fully contains the door's column extent."""
    from .spatial_graph import NUM_WEDGES

    w = annotations.pano_width
    ok = []
    for wedge in range(NUM_WEDGES):
        if fov_interval(Pose(node, wedge), w, fov).contains_span(door.x0, door.x1):
            ok.append(wedge)
    return frozenset(ok)


def build_goal_index(world: WorldGraph, annotations: AnnotationSet) -> GoalIndex:
    """Pick, per distinct house number, the node whose door polygon for that
    number has maximum area; ties break toward the smaller node id."""
    best: dict[str, tuple[float, int, DoorPolygon]] = {}
    for node_id in range(world.num_nodes):
        for door in annotations.node(node_id).doors:
            cur = best.get(door.house_number)
            if cur is None or door.area > cur[0] or (door.area == cur[0] and node_id < cur[1]):
                best[door.house_number] = (door.area, node_id, door)
    if not best:
        raise ValueError("world has no addressed doors; no goal tasks constructible")
    return GoalIndex(
        {addr: GoalEntry(node, door) for addr, (_, node, door) in best.items()}
    )
