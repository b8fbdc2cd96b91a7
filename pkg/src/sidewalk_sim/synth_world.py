"""Deterministic procedural generator of annotated desk-scale worlds.

Streets form a grid: `rows` east-west streets and `cols` north-south streets
crossing at shared intersection nodes, each street extending one stub
segment past its outermost crossing. Buildings line both sides of every
street segment with doors, house-number plates, and corner street signs;
panoramas are rendered by casting per-column rays against flat billboard
facades, and every annotation is computed from the same scene geometry that
painted the pixels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .annotations import (
    FULL_PANO_HEIGHT,
    FULL_PANO_WIDTH,
    AnnotationSet,
    BoundingBox,
    DoorPolygon,
    HouseNumberLabel,
    NodeAnnotations,
    StreetSignLabel,
)
from .font5x7 import GLYPH_COLS, GLYPH_ROWS, render_text
from .spatial_graph import GraphNode, StreetSegment, WorldGraph
from .world import LoadedWorld, PanoramaStore, validate_world

EYE_HEIGHT = 1.6
V_TOP_DEG = 60.0
V_RANGE_DEG = 120.0

FACADE_SETBACK = 6.0
BUILDING_MARGIN = 3.0  # keep building footprints clear of segment ends
DOOR_W, DOOR_H = 1.2, 2.3
PLATE_W, PLATE_Z0, PLATE_Z1 = 0.8, 2.45, 2.80
SIGN_W, SIGN_Z0, SIGN_Z1 = 1.3, 2.60, 2.95
LAYER_OFFSET = 0.03  # doors/plates float just in front of their facade

RENDER_DIST = 48.0
VIS_DIST = {"house_number": 10.0, "door": 14.0, "street_sign": 22.0}
MIN_WIDTH_DEG = {"house_number": 0.5, "door": 0.4, "street_sign": 0.4}
MIN_ROWS = {"house_number": 14, "door": 6, "street_sign": 6}

SKY = (168, 205, 233)
GROUND = (114, 114, 108)
FACADE_PALETTE = [
    (196, 148, 120), (176, 166, 146), (148, 120, 104), (204, 184, 150),
    (160, 140, 160), (138, 150, 132), (186, 130, 110), (170, 170, 180),
]
DOOR_PALETTE = [
    (70, 48, 36), (42, 58, 82), (88, 30, 30), (36, 70, 52), (60, 60, 66), (110, 76, 40),
]
SIGN_BG = (22, 94, 58)
SIGN_INK = (240, 240, 236)
PLATE_TEXT_SCALE = 4

DEFAULT_VOCABULARY = (
    "Alder St", "Birch Ave", "Cedar St", "Dogwood Ave", "Elm St", "Fir Ave",
    "Hazel St", "Juniper Ave", "Laurel St", "Maple Ave", "Willow St",
)


@dataclass(frozen=True)
class WorldSpec:
    """Recipe for one synthetic world; same spec + seed is byte-reproducible.

    `rows` counts east-west streets and `cols` north-south streets; parallel
    streets sit one segment length apart, so a rows x cols spec yields
    rows*cols intersections and rows*(cols+1) + cols*(rows+1) street segments.
    """

    seed: int = 0
    rows: int = 1
    cols: int = 1
    segment_length: float = 40.0
    node_spacing: float = 1.0
    addresses_per_side: int = 2
    vocabulary: tuple[str, ...] = DEFAULT_VOCABULARY
    low_size: tuple[int, int] = (224, 84)  # (width, height)
    full_size: tuple[int, int] = (FULL_PANO_WIDTH, FULL_PANO_HEIGHT)
    render_full: bool = False
    stubs: bool = True  # False: streets end at their outermost crossings (closed block)

    def validate(self) -> None:
        if self.rows < 0 or self.cols < 0 or self.rows + self.cols < 1:
            raise ValueError("need at least one street")
        if not self.stubs and (self.rows < 2 or self.cols < 2):
            raise ValueError("a stub-free (closed block) world needs rows >= 2 and cols >= 2")
        if self.node_spacing <= 0:
            raise ValueError("node_spacing must be positive")
        ratio = self.segment_length / self.node_spacing
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 2:
            raise ValueError("segment_length must be a multiple (>= 2) of node_spacing")
        if not self.vocabulary:
            raise ValueError("vocabulary must not be empty")


def sparsify(chain: list[tuple[float, float]], min_spacing: float = 1.0) -> list[tuple[float, float]]:
    """Thin an ordered pose chain to roughly one node per `min_spacing` meters.

    Greedy scan: keep the first node, then every node at least `min_spacing`
    of accumulated path distance past the last kept one; endpoints are always
    kept. Idempotent on already-sparse chains.
    """
    if not chain:
        raise ValueError("cannot sparsify an empty chain")
    kept = [0]
    acc = 0.0
    for i in range(1, len(chain)):
        acc += math.dist(chain[i - 1], chain[i])
        if acc >= min_spacing - 1e-9:
            kept.append(i)
            acc = 0.0
    if kept[-1] != len(chain) - 1:
        kept.append(len(chain) - 1)
    return [chain[i] for i in kept]


# --------------------------------------------------------------------------
# Scene model


@dataclass
class Billboard:
    """Vertical textured rectangle: a plan-view segment with a height range."""

    p0: tuple[float, float]
    p1: tuple[float, float]
    z0: float
    z1: float
    texture: np.ndarray  # (th, tw, 3) uint8; (1, 1, 3) for solid colors
    kind: str
    label: str | None = None
    text_region: tuple[float, float, float, float] | None = None  # u0, v0, u1, v1 (v from bottom)

    @property
    def midpoint(self) -> tuple[float, float]:
        return ((self.p0[0] + self.p1[0]) / 2.0, (self.p0[1] + self.p1[1]) / 2.0)

    @property
    def half_len(self) -> float:
        return math.dist(self.p0, self.p1) / 2.0


@dataclass
class SceneObject:
    """One annotatable thing: a billboard (or sub-rectangle of one) plus label."""

    kind: str  # "house_number" | "door" | "street_sign"
    label: str
    billboard: Billboard
    u0: float = 0.0
    v0: float = 0.0
    u1: float = 1.0
    v1: float = 1.0


@dataclass
class Scene:
    billboards: list[Billboard] = field(default_factory=list)
    objects: list[SceneObject] = field(default_factory=list)


@dataclass(frozen=True)
class _Street:
    idx: int
    name: str
    horizontal: bool
    offset: float  # y for horizontal streets, x for vertical
    lo: float
    hi: float

    def point(self, along: float, lateral: float = 0.0) -> tuple[float, float]:
        if self.horizontal:
            return (along, self.offset + lateral)
        return (self.offset + lateral, along)


def _solid(color: tuple[int, int, int]) -> np.ndarray:
    return np.array(color, dtype=np.uint8).reshape(1, 1, 3)


# --------------------------------------------------------------------------
# Graph construction


def _streets(spec: WorldSpec) -> list[_Street]:
    L = spec.segment_length
    out: list[_Street] = []
    vocab = spec.vocabulary
    for i in range(spec.rows):
        if spec.cols == 0:
            lo, hi = 0.0, L
        elif spec.stubs:
            lo, hi = -L, spec.cols * L
        else:
            lo, hi = 0.0, (spec.cols - 1) * L
        out.append(_Street(i, vocab[i % len(vocab)], True, i * L, lo, hi))
    for j in range(spec.cols):
        if spec.rows == 0:
            lo, hi = 0.0, L
        elif spec.stubs:
            lo, hi = -L, spec.rows * L
        else:
            lo, hi = 0.0, (spec.rows - 1) * L
        out.append(_Street(spec.rows + j, vocab[(spec.rows + j) % len(vocab)], False, j * L, lo, hi))
    return out


def _build_graph(spec: WorldSpec, streets: list[_Street]):
    """Nodes at `node_spacing` along every street, shared at crossings."""
    L = spec.segment_length
    coords: list[tuple[float, float]] = []
    cross_id: dict[tuple[int, int], int] = {}
    for i in range(spec.rows):
        for j in range(spec.cols):
            cross_id[(i, j)] = len(coords)
            coords.append((j * L, i * L))

    edges: list[tuple[int, int]] = []
    segments: list[StreetSegment] = []
    street_segments: dict[int, list[int]] = {s.idx: [] for s in streets}
    node_positions: dict[int, tuple[float, float]] = {}

    def crossing_at(street: _Street, along: float) -> int | None:
        k = round(along / L)
        if abs(k * L - along) > 1e-6:
            return None
        if street.horizontal:
            return cross_id.get((round(street.offset / L), k))
        return cross_id.get((k, round(street.offset / L)))

    for street in streets:
        steps = round((street.hi - street.lo) / spec.node_spacing)
        run: list[int] = []
        prev: int | None = None
        for k in range(steps + 1):
            along = street.lo + k * spec.node_spacing
            nid = crossing_at(street, along)
            if nid is None:
                nid = len(coords)
                coords.append(street.point(along))
                run.append(nid)
            else:
                if run:
                    sid = len(segments)
                    segments.append(StreetSegment(sid, street.name, tuple(run), "segment"))
                    street_segments[street.idx].append(sid)
                    run = []
            if prev is not None:
                edges.append((prev, nid))
            prev = nid
        if run:
            sid = len(segments)
            segments.append(StreetSegment(sid, street.name, tuple(run), "segment"))
            street_segments[street.idx].append(sid)

    horiz = {s.offset: s for s in streets if s.horizontal}
    vert = {s.offset: s for s in streets if not s.horizontal}
    for (i, j), nid in cross_id.items():
        sid = len(segments)
        name = f"{horiz[i * L].name} & {vert[j * L].name}"
        segments.append(StreetSegment(sid, name, (nid,), "intersection"))

    node_seg: dict[int, int] = {}
    for seg in segments:
        for nid in seg.nodes:
            node_seg[nid] = seg.id
    nodes = tuple(
        GraphNode(i, coords[i][0], coords[i][1], node_seg[i]) for i in range(len(coords))
    )
    xs = [c[0] for c in coords]
    ys = [c[1] for c in coords]
    pad = FACADE_SETBACK + 4.0
    bbox = (min(xs) - pad, min(ys) - pad, max(xs) + pad, max(ys) + pad)
    graph = WorldGraph(nodes, frozenset((min(a, b), max(a, b)) for a, b in edges), tuple(segments), bbox)
    return graph, street_segments


# --------------------------------------------------------------------------
# Scene construction


def _plate_texture(number: str) -> tuple[np.ndarray, tuple[float, float, float, float]]:
    text = render_text(number, scale=PLATE_TEXT_SCALE)
    hh, ww = text.shape[:2]
    mx, my = 10, 8
    canvas = np.empty((hh + 2 * my, ww + 2 * mx, 3), dtype=np.uint8)
    canvas[:] = np.array((246, 246, 240), dtype=np.uint8)
    canvas[my : my + hh, mx : mx + ww] = text
    th, tw = canvas.shape[:2]
    region = (mx / tw, 1.0 - (my + hh) / th, (mx + ww) / tw, 1.0 - my / th)
    return canvas, region


def _sign_texture(name: str) -> np.ndarray:
    text = render_text(name.upper(), scale=3, ink=SIGN_INK, background=SIGN_BG)
    hh, ww = text.shape[:2]
    mx, my = 9, 7
    canvas = np.empty((hh + 2 * my, ww + 2 * mx, 3), dtype=np.uint8)
    canvas[:] = np.array(SIGN_BG, dtype=np.uint8)
    canvas[my : my + hh, mx : mx + ww] = text
    return canvas


def _build_scene(
    spec: WorldSpec,
    streets: list[_Street],
    graph: WorldGraph,
    street_segments: dict[int, list[int]],
    rng: np.random.Generator,
) -> Scene:
    scene = Scene()
    for street in streets:
        axis_of = (lambda n: graph.nodes[n].x) if street.horizontal else (lambda n: graph.nodes[n].y)
        for side in (1.0, -1.0):
            house_index = 0
            for sid in street_segments[street.idx]:
                seg = graph.segments[sid]
                lo = axis_of(seg.nodes[0])
                hi = axis_of(seg.nodes[-1])
                usable = (hi - BUILDING_MARGIN) - (lo + BUILDING_MARGIN)
                count = spec.addresses_per_side
                if usable <= 2.0 or count <= 0:
                    continue
                pitch = usable / count
                width = float(min(7.0, max(2.0, pitch - 0.8)))
                for b in range(count):
                    center = lo + BUILDING_MARGIN + pitch * (b + 0.5)
                    base = 100 * (street.idx + 1)
                    number = base + (1 if side > 0 else 2) + 2 * house_index
                    house_index += 1
                    _add_building(scene, street, side, center, width, str(number), rng)
        for along, lateral_sign in _sign_spots(spec, street):
            _add_sign(scene, street, along, lateral_sign)
    return scene


def _add_building(
    scene: Scene,
    street: _Street,
    side: float,
    center: float,
    width: float,
    number: str,
    rng: np.random.Generator,
) -> None:
    height = float(rng.uniform(4.4, 6.2))
    facade_color = FACADE_PALETTE[int(rng.integers(len(FACADE_PALETTE)))]
    door_color = DOOR_PALETTE[int(rng.integers(len(DOOR_PALETTE)))]
    max_shift = max(0.0, width / 2.0 - DOOR_W / 2.0 - 0.3)
    door_shift = float(rng.uniform(-max_shift, max_shift)) if max_shift > 0 else 0.0

    lateral = side * FACADE_SETBACK
    near = side * (FACADE_SETBACK - LAYER_OFFSET)
    facade = Billboard(
        street.point(center - width / 2.0, lateral),
        street.point(center + width / 2.0, lateral),
        0.0,
        height,
        _solid(facade_color),
        "facade",
    )
    door = Billboard(
        street.point(center + door_shift - DOOR_W / 2.0, near),
        street.point(center + door_shift + DOOR_W / 2.0, near),
        0.0,
        DOOR_H,
        _solid(door_color),
        "door",
        label=number,
    )
    plate_tex, region = _plate_texture(number)
    plate = Billboard(
        street.point(center + door_shift - PLATE_W / 2.0, near),
        street.point(center + door_shift + PLATE_W / 2.0, near),
        PLATE_Z0,
        PLATE_Z1,
        plate_tex,
        "plate",
        label=number,
        text_region=region,
    )
    scene.billboards += [facade, door, plate]
    scene.objects.append(SceneObject("door", number, door))
    u0, v0, u1, v1 = region
    scene.objects.append(SceneObject("house_number", number, plate, u0, v0, u1, v1))


def _sign_spots(spec: WorldSpec, street: _Street):
    """(along, lateral_sign) placements: one sign past each crossing, plus one
    near each street end so intersection-free worlds still carry signs."""
    L = spec.segment_length
    spots: list[tuple[float, float]] = []
    crossings = []
    k0 = math.ceil((street.lo - 1e-9) / L)
    k1 = math.floor((street.hi + 1e-9) / L)
    limit = spec.cols if street.horizontal else spec.rows
    for k in range(k0, k1 + 1):
        if 0 <= k < limit:
            crossings.append(k * L)
    for x in crossings:
        spots.append((x + 3.2, 1.0))
    spots.append((street.lo + 2.0, -1.0))
    spots.append((street.hi - 2.0, -1.0))
    return spots


def _add_sign(scene: Scene, street: _Street, along: float, lateral_sign: float) -> None:
    lateral = lateral_sign * 3.2
    # the sign plate runs perpendicular to its street so it faces down-street
    if street.horizontal:
        p0 = (along, street.offset + lateral - SIGN_W / 2.0)
        p1 = (along, street.offset + lateral + SIGN_W / 2.0)
    else:
        p0 = (street.offset + lateral - SIGN_W / 2.0, along)
        p1 = (street.offset + lateral + SIGN_W / 2.0, along)
    sign = Billboard(p0, p1, SIGN_Z0, SIGN_Z1, _sign_texture(street.name), "sign", label=street.name)
    scene.billboards.append(sign)
    scene.objects.append(SceneObject("street_sign", street.name, sign))


# --------------------------------------------------------------------------
# Projection


def _bearing_to(camera: tuple[float, float], p: tuple[float, float]) -> float:
    return math.degrees(math.atan2(p[0] - camera[0], p[1] - camera[1])) % 360.0


def _col_of_bearing(b: float, width: int) -> float:
    return (b + 180.0) / 360.0 * width % width


def _row_of_elevation(el_deg: float, height: int) -> float:
    return (V_TOP_DEG - el_deg) / V_RANGE_DEG * height


def _ray_hit(
    camera: tuple[float, float],
    direction: tuple[float, float],
    p0: tuple[float, float],
    p1: tuple[float, float],
) -> float | None:
    """Plan-view distance along the ray to the segment, or None if missed."""
    ex, ey = p1[0] - p0[0], p1[1] - p0[1]
    denom = direction[0] * ey - direction[1] * ex
    if abs(denom) < 1e-12:
        return None
    rx, ry = p0[0] - camera[0], p0[1] - camera[1]
    t = (rx * ey - ry * ex) / denom
    s = (rx * direction[1] - ry * direction[0]) / denom
    if t <= 1e-9 or s < 0.0 or s > 1.0:
        return None
    return t


@dataclass
class _SubrectProjection:
    col_left: float  # continuous start column (wrapped)
    width_px: float
    width_deg: float
    az_left: float
    r0: int
    r1: int  # inclusive
    c0: int
    c1: int  # inclusive, wrapped
    t_min: float


def _project_subrect(
    camera: tuple[float, float],
    bb: Billboard,
    u0: float,
    v0: float,
    u1: float,
    v1: float,
    width: int,
    height: int,
) -> _SubrectProjection | None:
    q0 = (bb.p0[0] + (bb.p1[0] - bb.p0[0]) * u0, bb.p0[1] + (bb.p1[1] - bb.p0[1]) * u0)
    q1 = (bb.p0[0] + (bb.p1[0] - bb.p0[0]) * u1, bb.p0[1] + (bb.p1[1] - bb.p0[1]) * u1)
    zb = bb.z0 + (bb.z1 - bb.z0) * v0
    zt = bb.z0 + (bb.z1 - bb.z0) * v1
    d0 = math.dist(camera, q0)
    d1 = math.dist(camera, q1)
    if min(d0, d1) < 0.3:
        return None
    ex, ey = q1[0] - q0[0], q1[1] - q0[1]
    seg_len2 = ex * ex + ey * ey
    if seg_len2 < 1e-12:
        return None
    foot = ((camera[0] - q0[0]) * ex + (camera[1] - q0[1]) * ey) / seg_len2
    d_candidates = [d0, d1]
    if 0.0 < foot < 1.0:
        fx, fy = q0[0] + foot * ex, q0[1] + foot * ey
        d_candidates.append(math.dist(camera, (fx, fy)))
    d_min, d_max = min(d_candidates), max(d_candidates)

    az0 = _bearing_to(camera, q0)
    az1 = _bearing_to(camera, q1)
    diff = (az1 - az0) % 360.0
    if diff > 180.0:
        az_left, width_deg = az1, 360.0 - diff
    else:
        az_left, width_deg = az0, diff
    el_top = math.degrees(math.atan2(zt - EYE_HEIGHT, d_min if zt >= EYE_HEIGHT else d_max))
    el_bot = math.degrees(math.atan2(zb - EYE_HEIGHT, d_max if zb >= EYE_HEIGHT else d_min))

    col_left = _col_of_bearing(az_left, width)
    width_px = width_deg / 360.0 * width
    c0 = math.ceil(col_left - 0.5)
    c1 = math.floor(col_left + width_px - 0.5)
    r0 = math.ceil(_row_of_elevation(el_top, height) - 0.5)
    r1 = math.floor(_row_of_elevation(el_bot, height) - 0.5)
    if c1 < c0 or r1 < r0:
        return None
    r0 = max(0, r0)
    r1 = min(height - 1, r1)
    if r1 < r0:
        return None
    return _SubrectProjection(
        col_left=col_left % width,
        width_px=width_px,
        width_deg=width_deg,
        az_left=az_left,
        r0=r0,
        r1=r1,
        c0=c0 % width,
        c1=c1 % width,
        t_min=d_min,
    )


def _occluded(
    camera: tuple[float, float],
    obj: SceneObject,
    proj: _SubrectProjection,
    billboards: list[Billboard],
) -> bool:
    """True if any nearer billboard overlaps the object's rows somewhere in
    its azimuth span (sampled densely across the span)."""
    zb = obj.billboard.z0 + (obj.billboard.z1 - obj.billboard.z0) * obj.v0
    zt = obj.billboard.z0 + (obj.billboard.z1 - obj.billboard.z0) * obj.v1
    samples = max(9, int(proj.width_deg / 0.2))
    for frac in np.linspace(0.02, 0.98, samples):
        az = math.radians(proj.az_left + proj.width_deg * float(frac))
        direction = (math.sin(az), math.cos(az))
        t_obj = _ray_hit(camera, direction, obj.billboard.p0, obj.billboard.p1)
        if t_obj is None:
            continue
        obj_top = math.atan2(zt - EYE_HEIGHT, t_obj)
        obj_bot = math.atan2(zb - EYE_HEIGHT, t_obj)
        for bb in billboards:
            if bb is obj.billboard:
                continue
            t = _ray_hit(camera, direction, bb.p0, bb.p1)
            if t is None or t >= t_obj - 1e-6:
                continue
            occ_top = math.atan2(bb.z1 - EYE_HEIGHT, t)
            occ_bot = math.atan2(bb.z0 - EYE_HEIGHT, t)
            if occ_top > obj_bot + 1e-9 and occ_bot < obj_top - 1e-9:
                return True
    return False


def _door_polygon(
    camera: tuple[float, float],
    obj: SceneObject,
    proj: _SubrectProjection,
    width: int,
    height: int,
) -> DoorPolygon | None:
    bb = obj.billboard
    top_pts: list[tuple[float, float]] = []
    bot_pts: list[tuple[float, float]] = []
    for s in (0.0, 0.25, 0.5, 0.75, 1.0):
        px = bb.p0[0] + (bb.p1[0] - bb.p0[0]) * s
        py = bb.p0[1] + (bb.p1[1] - bb.p0[1]) * s
        d = math.dist(camera, (px, py))
        col = _col_of_bearing(_bearing_to(camera, (px, py)), width)
        top_pts.append((col, _row_of_elevation(math.degrees(math.atan2(bb.z1 - EYE_HEIGHT, d)), height)))
        bot_pts.append((col, _row_of_elevation(math.degrees(math.atan2(bb.z0 - EYE_HEIGHT, d)), height)))
    verts = top_pts + bot_pts[::-1]
    # shoelace in an unwrapped frame anchored at the left edge
    ref = proj.col_left
    unwrapped = [((c - ref) % width, r) for c, r in verts]
    area = 0.0
    for (x_a, y_a), (x_b, y_b) in zip(unwrapped, unwrapped[1:] + unwrapped[:1]):
        area += x_a * y_b - x_b * y_a
    area = abs(area) / 2.0
    if area <= 0.0:
        return None
    x1 = (proj.col_left + proj.width_px) % width
    return DoorPolygon(tuple(verts), obj.label, area, proj.col_left, x1)


def annotate_node(
    camera: tuple[float, float],
    scene: Scene,
    width: int = FULL_PANO_WIDTH,
    height: int = FULL_PANO_HEIGHT,
) -> NodeAnnotations:
    """Emit labels for every object fully visible and legible from `camera`."""
    numbers: list[HouseNumberLabel] = []
    signs: list[StreetSignLabel] = []
    doors: list[DoorPolygon] = []
    near = [
        bb
        for bb in scene.billboards
        if math.dist(camera, bb.midpoint) - bb.half_len < RENDER_DIST
    ]
    for obj in scene.objects:
        dist = math.dist(camera, obj.billboard.midpoint)
        if dist > VIS_DIST[obj.kind]:
            continue
        proj = _project_subrect(camera, obj.billboard, obj.u0, obj.v0, obj.u1, obj.v1, width, height)
        if proj is None or proj.width_deg < MIN_WIDTH_DEG[obj.kind]:
            continue
        if proj.r1 - proj.r0 + 1 < MIN_ROWS[obj.kind]:
            continue
        if _occluded(camera, obj, proj, near):
            continue
        box = BoundingBox(proj.c0, proj.c1, proj.r0, proj.r1 + 1)
        if obj.kind == "house_number":
            numbers.append(HouseNumberLabel(box, obj.label))
        elif obj.kind == "street_sign":
            signs.append(StreetSignLabel(box, obj.label))
        else:
            poly = _door_polygon(camera, obj, proj, width, height)
            if poly is not None:
                doors.append(poly)
    return NodeAnnotations(tuple(numbers), tuple(signs), tuple(doors))


# --------------------------------------------------------------------------
# Rendering


def render_panorama(
    camera: tuple[float, float],
    billboards: list[Billboard],
    width: int,
    height: int,
) -> np.ndarray:
    """Equirectangular (height, width, 3) uint8 raster seen from `camera`."""
    img = np.empty((height, width, 3), dtype=np.uint8)
    img[: height // 2] = np.array(SKY, dtype=np.uint8)
    img[height // 2 :] = np.array(GROUND, dtype=np.uint8)
    zbuf = np.full((height, width), np.inf)

    bearings = np.radians((np.arange(width) + 0.5) / width * 360.0 - 180.0)
    dir_x = np.sin(bearings)
    dir_y = np.cos(bearings)
    row_centers_el = np.radians(V_TOP_DEG - (np.arange(height) + 0.5) / height * V_RANGE_DEG)
    tan_el = np.tan(row_centers_el)

    for bb in billboards:
        if math.dist(camera, bb.midpoint) - bb.half_len > RENDER_DIST:
            continue
        ex, ey = bb.p1[0] - bb.p0[0], bb.p1[1] - bb.p0[1]
        rx, ry = bb.p0[0] - camera[0], bb.p0[1] - camera[1]
        denom = dir_x * ey - dir_y * ex
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (rx * ey - ry * ex) / denom
            s = (rx * dir_y - ry * dir_x) / denom
        valid = (np.abs(denom) > 1e-12) & (t > 1e-9) & (s >= 0.0) & (s <= 1.0)
        cols = np.nonzero(valid)[0]
        if cols.size == 0:
            continue
        th, tw = bb.texture.shape[:2]
        z_lo, z_hi = bb.z0, bb.z1
        for c in cols:
            tc = t[c]
            el_top = math.degrees(math.atan2(z_hi - EYE_HEIGHT, tc))
            el_bot = math.degrees(math.atan2(z_lo - EYE_HEIGHT, tc))
            r0 = max(0, math.ceil(_row_of_elevation(el_top, height) - 0.5))
            r1 = min(height - 1, math.floor(_row_of_elevation(el_bot, height) - 0.5))
            if r1 < r0:
                continue
            zslice = zbuf[r0 : r1 + 1, c]
            mask = tc < zslice
            if not mask.any():
                continue
            if th == 1 and tw == 1:
                img[r0 : r1 + 1, c][mask] = bb.texture[0, 0]
            else:
                z = EYE_HEIGHT + tc * tan_el[r0 : r1 + 1]
                v = np.clip((z - z_lo) / (z_hi - z_lo), 0.0, 1.0)
                ty = np.clip(((1.0 - v) * th).astype(np.int64), 0, th - 1)
                tx = min(int(s[c] * tw), tw - 1)
                img[r0 : r1 + 1, c][mask] = bb.texture[ty[mask], tx]
            zslice[mask] = tc
    return img


# --------------------------------------------------------------------------
# Readback self-check


def read_house_number(
    raster: np.ndarray,
    camera: tuple[float, float],
    plate: Billboard,
) -> str:
    """Recover the digits painted on a plate by template-matching the raster.

    Samples the raster at the projected position of every glyph cell and
    picks the digit whose 5x7 ink mask best matches; this checks that the
    rendered pixels truthfully realize the annotated geometry.
    """
    from .font5x7 import glyph_array

    assert plate.text_region is not None and plate.label is not None
    height, width = raster.shape[:2]
    u0, v0, u1, v1 = plate.text_region
    n = len(plate.label)
    total_cols = n * GLYPH_COLS + (n - 1)  # glyph cells plus 1-cell gaps
    digits = []
    templates = {d: glyph_array(d) for d in "0123456789"}
    for i in range(n):
        cell_lo = i * (GLYPH_COLS + 1) / total_cols
        observed = np.zeros((GLYPH_ROWS, GLYPH_COLS), dtype=float)
        for gr in range(GLYPH_ROWS):
            for gc in range(GLYPH_COLS):
                dark = 0
                hits = 0
                for ox, oy in ((0.3, 0.3), (0.7, 0.3), (0.3, 0.7), (0.7, 0.7), (0.5, 0.5)):
                    u = u0 + (u1 - u0) * (cell_lo + (gc + ox) / total_cols)
                    v = v1 - (v1 - v0) * (gr + oy) / GLYPH_ROWS
                    px = plate.p0[0] + (plate.p1[0] - plate.p0[0]) * u
                    py = plate.p0[1] + (plate.p1[1] - plate.p0[1]) * u
                    z = plate.z0 + (plate.z1 - plate.z0) * v
                    d = math.dist(camera, (px, py))
                    col = int(_col_of_bearing(_bearing_to(camera, (px, py)), width)) % width
                    el = math.degrees(math.atan2(z - EYE_HEIGHT, d))
                    row = int(_row_of_elevation(el, height))
                    if 0 <= row < height:
                        lum = int(raster[row, col].astype(np.int64).sum())
                        dark += lum < 3 * 128
                        hits += 1
                observed[gr, gc] = dark / hits if hits else 0.0
        best, best_score = "?", -1.0
        for d, tpl in templates.items():
            score = float(np.sum(np.where(tpl, observed, 1.0 - observed)))
            if score > best_score:
                best, best_score = d, score
        digits.append(best)
    return "".join(digits)


# --------------------------------------------------------------------------
# Top-level generation


def build_scene(spec: WorldSpec):
    """Deterministically rebuild the graph and scene for a spec (no rendering)."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    streets = _streets(spec)
    graph, street_segments = _build_graph(spec, streets)
    scene = _build_scene(spec, streets, graph, street_segments, rng)
    return graph, scene


def generate(spec: WorldSpec) -> LoadedWorld:
    """Build, render, annotate, and validate a world entirely in memory."""
    graph, scene = build_scene(spec)
    per_node: dict[int, NodeAnnotations] = {}
    panos_low: dict[int, np.ndarray] = {}
    panos_full: dict[int, np.ndarray] = {}
    full_w, full_h = spec.full_size
    low_w, low_h = spec.low_size
    for node in range(graph.num_nodes):
        cam = graph.node_xy(node)
        per_node[node] = annotate_node(cam, scene, full_w, full_h)
        panos_low[node] = render_panorama(cam, scene.billboards, low_w, low_h)
        if spec.render_full:
            panos_full[node] = render_panorama(cam, scene.billboards, full_w, full_h)
    annotations = AnnotationSet(per_node, full_w, full_h)
    meta = {
        "format_version": 1,
        "seed": spec.seed,
        "spec": {
            "seed": spec.seed,
            "rows": spec.rows,
            "cols": spec.cols,
            "segment_length": spec.segment_length,
            "node_spacing": spec.node_spacing,
            "addresses_per_side": spec.addresses_per_side,
            "render_full": spec.render_full,
        },
        "low_size": list(spec.low_size),
        "full_size": list(spec.full_size),
    }
    world = LoadedWorld(
        graph,
        annotations,
        PanoramaStore(panos_low, panos_full if panos_full else None),
        list(spec.vocabulary),
        meta=meta,
    )
    validate_world(world)
    from .env_core import derived_horizon

    world.meta["horizon"] = derived_horizon(world, use_cache=False)
    return world
