"""On-disk world bundle format.

Layout:
    graph.json         nodes, edges, segments, bounding box
    annotations.json   per-node labels in full-resolution pixel coordinates
    panoramas/         lossless PNG rasters, one per node per resolution
    meta.json          format version, vocabulary, cached horizon, content hash

The content hash covers every file (and the meta minus the hash itself);
the loader rejects any mismatch before touching the contents.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .annotations import (
    AnnotationSet,
    BoundingBox,
    DoorPolygon,
    HouseNumberLabel,
    NodeAnnotations,
    StreetSignLabel,
)
from .spatial_graph import GraphNode, StreetSegment, WorldGraph
from .world import LoadedWorld, PanoramaStore, WorldValidationError, validate_world

FORMAT_VERSION = 1


def _dump_json(data) -> bytes:
    return (json.dumps(data, sort_keys=True, separators=(",", ":")) + "\n").encode()


def _graph_doc(graph: WorldGraph) -> dict:
    return {
        "nodes": [[n.id, n.x, n.y, n.segment] for n in graph.nodes],
        "edges": sorted([list(e) for e in graph.edges]),
        "segments": [
            {"id": s.id, "name": s.name, "kind": s.kind, "nodes": list(s.nodes)}
            for s in graph.segments
        ],
        "bbox": list(graph.bbox),
    }


def _annotations_doc(ann: AnnotationSet) -> dict:
    nodes = {}
    for nid in sorted(ann.per_node):
        na = ann.per_node[nid]
        if not (na.house_numbers or na.street_signs or na.doors):
            continue
        nodes[str(nid)] = {
            "house_numbers": [
                {"box": [l.box.x0, l.box.x1, l.box.y0, l.box.y1], "text": l.text}
                for l in na.house_numbers
            ],
            "street_signs": [
                {"box": [l.box.x0, l.box.x1, l.box.y0, l.box.y1], "name": l.name}
                for l in na.street_signs
            ],
            "doors": [
                {
                    "vertices": [[c, r] for c, r in d.vertices],
                    "house_number": d.house_number,
                    "area": d.area,
                    "x0": d.x0,
                    "x1": d.x1,
                }
                for d in na.doors
            ],
        }
    return {"pano_width": ann.pano_width, "pano_height": ann.pano_height, "nodes": nodes}


def _content_hash(files: dict[str, bytes], meta_without_hash: dict) -> str:
    h = hashlib.sha256()
    for name in sorted(files):
        h.update(name.encode())
        h.update(b"\0")
        h.update(files[name])
        h.update(b"\0")
    h.update(_dump_json(meta_without_hash))
    return h.hexdigest()


def _png_bytes(arr: np.ndarray) -> bytes:
    from io import BytesIO

    from PIL import Image

    buf = BytesIO()
    Image.fromarray(arr).save(buf, format="PNG")
    return buf.getvalue()


def save_bundle(world: LoadedWorld, path: str | Path) -> Path:
    """Serialize a world to a bundle directory; returns the directory path."""
    root = Path(path)
    (root / "panoramas").mkdir(parents=True, exist_ok=True)

    files: dict[str, bytes] = {
        "graph.json": _dump_json(_graph_doc(world.graph)),
        "annotations.json": _dump_json(_annotations_doc(world.annotations)),
    }
    for node in range(world.graph.num_nodes):
        files[f"panoramas/{node:05d}_low.png"] = _png_bytes(world.panoramas.low(node))
        if world.panoramas.has_full(node):
            files[f"panoramas/{node:05d}_full.png"] = _png_bytes(world.panoramas.full(node))

    meta = dict(world.meta)
    meta["format_version"] = FORMAT_VERSION
    meta["vocabulary"] = list(world.vocabulary)
    meta.pop("content_hash", None)
    meta["content_hash"] = _content_hash(files, meta)

    for name, blob in files.items():
        (root / name).write_bytes(blob)
    (root / "meta.json").write_bytes(_dump_json(meta))
    return root


def load_world(path: str | Path) -> LoadedWorld:
    """Load and fully validate a bundle; fails fast naming the first violation."""
    root = Path(path)
    meta_path = root / "meta.json"
    if not meta_path.exists():
        raise WorldValidationError(f"no world bundle at {root} (missing meta.json)")
    meta = json.loads(meta_path.read_text())
    if meta.get("format_version") != FORMAT_VERSION:
        raise WorldValidationError(
            f"unsupported format version {meta.get('format_version')} (expected {FORMAT_VERSION})"
        )

    files: dict[str, bytes] = {
        "graph.json": (root / "graph.json").read_bytes(),
        "annotations.json": (root / "annotations.json").read_bytes(),
    }
    for pano in sorted((root / "panoramas").glob("*.png")):
        files[f"panoramas/{pano.name}"] = pano.read_bytes()
    expected = meta.get("content_hash")
    meta_wo = {k: v for k, v in meta.items() if k != "content_hash"}
    actual = _content_hash(files, meta_wo)
    if actual != expected:
        raise WorldValidationError(
            f"content hash mismatch: meta says {expected}, files hash to {actual}"
        )

    gdoc = json.loads(files["graph.json"])
    nodes = tuple(GraphNode(int(i), float(x), float(y), int(seg)) for i, x, y, seg in gdoc["nodes"])
    segments = tuple(
        StreetSegment(int(s["id"]), s["name"], tuple(int(n) for n in s["nodes"]), s["kind"])
        for s in gdoc["segments"]
    )
    graph = WorldGraph(
        nodes,
        frozenset((min(a, b), max(a, b)) for a, b in gdoc["edges"]),
        segments,
        tuple(gdoc["bbox"]),
    )

    adoc = json.loads(files["annotations.json"])
    per_node: dict[int, NodeAnnotations] = {}
    for key, na in adoc["nodes"].items():
        per_node[int(key)] = NodeAnnotations(
            tuple(
                HouseNumberLabel(BoundingBox(*l["box"]), l["text"]) for l in na["house_numbers"]
            ),
            tuple(StreetSignLabel(BoundingBox(*l["box"]), l["name"]) for l in na["street_signs"]),
            tuple(
                DoorPolygon(
                    tuple((float(c), float(r)) for c, r in d["vertices"]),
                    d["house_number"],
                    float(d["area"]),
                    float(d["x0"]),
                    float(d["x1"]),
                )
                for d in na["doors"]
            ),
        )
    annotations = AnnotationSet(per_node, int(adoc["pano_width"]), int(adoc["pano_height"]))

    from PIL import Image

    low: dict[int, np.ndarray] = {}
    full_paths: dict[int, Path] = {}
    for pano in sorted((root / "panoramas").glob("*.png")):
        stem = pano.stem  # e.g. 00042_low
        node_str, kind = stem.split("_")
        node = int(node_str)
        if kind == "low":
            low[node] = np.asarray(Image.open(pano).convert("RGB"))
        else:
            full_paths[node] = pano
    missing = [n for n in range(graph.num_nodes) if n not in low]
    if missing:
        raise WorldValidationError(f"node {missing[0]} has no low-res panorama")

    world = LoadedWorld(
        graph,
        annotations,
        PanoramaStore(low, full_paths=full_paths),
        list(meta.get("vocabulary", [])),
        meta=meta,
    )
    validate_world(world)
    return world
