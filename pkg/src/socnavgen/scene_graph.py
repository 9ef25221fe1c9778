"""Semantic scene graphs over 2D occupancy maps.

A scene graph is the annotated location that grounds every later stage:
nodes are labelled places with pixel and world coordinates, edges are typed
connections between them.  Graphs are immutable after loading and safe to
share between pipeline stages.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

logger = logging.getLogger(__name__)


class SceneGraphError(Exception):
    """Base class for scene-graph failures."""


class ParseError(SceneGraphError):
    """Document could not be parsed; message carries line/field context."""


class ValidationError(SceneGraphError):
    """Structural rules violated. ``violations`` lists every problem found."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class OutOfBounds(SceneGraphError):
    pass


class UnknownNode(SceneGraphError):
    def __init__(self, node_id: str):
        self.node_id = node_id
        super().__init__(f"unknown node {node_id}")


class EmptyPath(SceneGraphError):
    pass


@dataclass(frozen=True)
class MapMeta:
    """Parameters tying the occupancy image to the world frame.

    ``origin`` is the world position (meters) of the image's bottom-left
    corner.  Image y grows downward, world y grows upward.
    """

    image_path: str
    resolution: float
    origin: tuple[float, float]
    image_width: int
    image_height: int
    occupied_threshold: int = 127

    def validate(self) -> list[str]:
        problems = []
        if not self.resolution > 0:
            problems.append(f"meta.resolution must be > 0, got {self.resolution}")
        if self.image_width < 1 or self.image_height < 1:
            problems.append(
                f"meta image dimensions must be >= 1, got "
                f"{self.image_width}x{self.image_height}"
            )
        if not 0 <= self.occupied_threshold <= 255:
            problems.append(
                f"meta.occupied_threshold must be in [0,255], got {self.occupied_threshold}"
            )
        return problems


def pixel_to_world(meta: MapMeta, pixel: tuple[int, int]) -> tuple[float, float]:
    """Map a pixel-lattice coordinate to world meters.

    The lattice is corner-addressed: px in [0, width], py in [0, height],
    with py == height landing on the origin row.
    """
    px, py = pixel
    if not (0 <= px <= meta.image_width and 0 <= py <= meta.image_height):
        raise OutOfBounds(
            f"pixel ({px},{py}) outside image "
            f"{meta.image_width}x{meta.image_height}"
        )
    x = meta.origin[0] + px * meta.resolution
    y = meta.origin[1] + (meta.image_height - py) * meta.resolution
    return (x, y)


def world_to_pixel(meta: MapMeta, world: tuple[float, float]) -> tuple[int, int]:
    """Inverse of :func:`pixel_to_world` by nearest lattice point."""
    px = round((world[0] - meta.origin[0]) / meta.resolution)
    py = meta.image_height - round((world[1] - meta.origin[1]) / meta.resolution)
    if not (0 <= px <= meta.image_width and 0 <= py <= meta.image_height):
        raise OutOfBounds(f"world ({world[0]},{world[1]}) maps outside the image")
    return (px, py)


@dataclass(frozen=True)
class GraphNode:
    id: str
    name: str
    semantic_type: str
    pixel: tuple[int, int]
    world: tuple[float, float]

    @staticmethod
    def create(meta: MapMeta, id: str, name: str, semantic_type: str,
               pixel: tuple[int, int]) -> "GraphNode":
        return GraphNode(id=id, name=name, semantic_type=semantic_type,
                         pixel=(int(pixel[0]), int(pixel[1])),
                         world=pixel_to_world(meta, pixel))


@dataclass(frozen=True)
class GraphEdge:
    """Undirected typed edge between two node ids."""

    endpoints: tuple[str, str]
    semantic_type: str

    @property
    def key(self) -> tuple[str, str]:
        a, b = self.endpoints
        return (a, b) if a <= b else (b, a)


@dataclass
class SceneGraph:
    meta: MapMeta
    nodes: list[GraphNode]
    edges: list[GraphEdge]
    schema_note: str = ""

    def __post_init__(self) -> None:
        self._by_id = {n.id: n for n in self.nodes}
        self._adjacency: dict[str, list[str]] = {n.id: [] for n in self.nodes}
        for e in self.edges:
            a, b = e.endpoints
            if a in self._adjacency and b in self._adjacency:
                self._adjacency[a].append(b)
                self._adjacency[b].append(a)
        for nbrs in self._adjacency.values():
            nbrs.sort()

    def node(self, node_id: str) -> GraphNode:
        try:
            return self._by_id[node_id]
        except KeyError:
            raise UnknownNode(node_id) from None

    def has_node(self, node_id: str) -> bool:
        return node_id in self._by_id

    def neighbors(self, node_id: str) -> list[str]:
        if node_id not in self._adjacency:
            raise UnknownNode(node_id)
        return self._adjacency[node_id]

    def has_edge(self, a: str, b: str) -> bool:
        return b in self._adjacency.get(a, ())

    def node_ids(self) -> list[str]:
        return [n.id for n in self.nodes]

    def validate(self) -> list[str]:
        """Return every structural violation (empty list means valid)."""
        problems = self.meta.validate()
        seen_ids: set[str] = set()
        for n in self.nodes:
            if n.id in seen_ids:
                problems.append(f"duplicate node id {n.id}")
            seen_ids.add(n.id)
            px, py = n.pixel
            if not (0 <= px <= self.meta.image_width and 0 <= py <= self.meta.image_height):
                problems.append(
                    f"node {n.id} pixel ({px},{py}) outside image "
                    f"{self.meta.image_width}x{self.meta.image_height}"
                )
            else:
                expect = pixel_to_world(self.meta, n.pixel)
                if n.world != expect:
                    problems.append(f"node {n.id} world {n.world} != derived {expect}")
        seen_pairs: set[tuple[str, str]] = set()
        for e in self.edges:
            a, b = e.endpoints
            if a == b:
                problems.append(f"edge {a}-{b} endpoints must be distinct")
            for end in (a, b):
                if end not in seen_ids:
                    problems.append(f"edge {a}-{b} references missing node {end}")
            if e.key in seen_pairs:
                problems.append(f"duplicate edge on pair {e.key[0]}-{e.key[1]}")
            seen_pairs.add(e.key)
        return problems

    def is_connected(self) -> bool:
        if not self.nodes:
            return True
        seen = {self.nodes[0].id}
        stack = [self.nodes[0].id]
        while stack:
            for nbr in self._adjacency[stack.pop()]:
                if nbr not in seen:
                    seen.add(nbr)
                    stack.append(nbr)
        return len(seen) == len(self.nodes)


def is_path_continuous(
    g: SceneGraph, path: list[str]
) -> tuple[bool, tuple[str, str] | None]:
    """Check that every consecutive pair of nodes shares an edge.

    Returns (True, None) for continuous paths (length-1 paths count), or
    (False, first_offending_pair) so callers can build a precise re-query
    message.
    """
    if not path:
        raise EmptyPath("path has no nodes")
    for node_id in path:
        if not g.has_node(node_id):
            raise UnknownNode(node_id)
    for a, b in zip(path, path[1:]):
        if not g.has_edge(a, b):
            return (False, (a, b))
    return (True, None)


def shortest_path(g: SceneGraph, a: str, b: str) -> list[str]:
    """Minimum-hop path from a to b by BFS.

    Neighbors are expanded in lexicographic id order, which makes the result
    deterministic and tie-broken toward the smallest neighbor id.  Returns
    [] when the nodes are disconnected.
    """
    g.node(a)
    g.node(b)
    if a == b:
        return [a]
    parent: dict[str, str] = {a: a}
    frontier = [a]
    while frontier:
        nxt: list[str] = []
        for u in frontier:
            for v in g.neighbors(u):
                if v not in parent:
                    parent[v] = u
                    if v == b:
                        path = [b]
                        while path[-1] != a:
                            path.append(parent[path[-1]])
                        path.reverse()
                        return path
                    nxt.append(v)
        frontier = nxt
    return []


def _meta_from_doc(doc: dict) -> MapMeta:
    try:
        origin = doc["origin"]
        return MapMeta(
            image_path=str(doc["image_path"]),
            resolution=float(doc["resolution"]),
            origin=(float(origin[0]), float(origin[1])),
            image_width=int(doc["image_width"]),
            image_height=int(doc["image_height"]),
            occupied_threshold=int(doc.get("occupied_threshold", 127)),
        )
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ParseError(f"bad meta section: {exc!r}") from exc


def graph_from_doc(doc: dict) -> SceneGraph:
    """Build and validate a SceneGraph from a parsed JSON document."""
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    for key in ("meta", "nodes", "edges"):
        if key not in doc:
            raise ParseError(f"missing top-level key '{key}'")
    meta = _meta_from_doc(doc["meta"])
    meta_problems = meta.validate()
    if meta_problems:
        raise ValidationError(meta_problems)

    nodes: list[GraphNode] = []
    pre_problems: list[str] = []
    for i, nd in enumerate(doc["nodes"]):
        try:
            pixel = (int(nd["pixel"][0]), int(nd["pixel"][1]))
            node_id = str(nd["id"])
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise ParseError(f"bad node at index {i}: {exc!r}") from exc
        if 0 <= pixel[0] <= meta.image_width and 0 <= pixel[1] <= meta.image_height:
            world = pixel_to_world(meta, pixel)
        else:
            world = (float("nan"), float("nan"))
            pre_problems.append(
                f"node {node_id} pixel ({pixel[0]},{pixel[1]}) outside image "
                f"{meta.image_width}x{meta.image_height}"
            )
        nodes.append(GraphNode(id=node_id, name=str(nd.get("name", node_id)),
                               semantic_type=str(nd.get("semantic_type", "place")),
                               pixel=pixel, world=world))

    edges: list[GraphEdge] = []
    for i, ed in enumerate(doc["edges"]):
        try:
            endpoints = (str(ed["endpoints"][0]), str(ed["endpoints"][1]))
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise ParseError(f"bad edge at index {i}: {exc!r}") from exc
        edges.append(GraphEdge(endpoints=endpoints,
                               semantic_type=str(ed.get("semantic_type", "connection"))))

    g = SceneGraph(meta=meta, nodes=nodes, edges=edges,
                   schema_note=str(doc.get("schema_note", "")))
    problems = [p for p in g.validate() if p not in pre_problems] + pre_problems
    if problems:
        raise ValidationError(problems)
    if not g.is_connected() and len(g.nodes) > 1:
        logger.warning("scene graph is disconnected (%d nodes)", len(g.nodes))
    return g


def graph_to_doc(g: SceneGraph) -> dict:
    """Canonical document form; world coordinates are derived, not stored."""
    return {
        "meta": {
            "image_path": g.meta.image_path,
            "resolution": g.meta.resolution,
            "origin": [g.meta.origin[0], g.meta.origin[1]],
            "image_width": g.meta.image_width,
            "image_height": g.meta.image_height,
            "occupied_threshold": g.meta.occupied_threshold,
        },
        "nodes": [
            {"id": n.id, "name": n.name, "semantic_type": n.semantic_type,
             "pixel": [n.pixel[0], n.pixel[1]]}
            for n in g.nodes
        ],
        "edges": [
            {"endpoints": [e.endpoints[0], e.endpoints[1]],
             "semantic_type": e.semantic_type}
            for e in g.edges
        ],
        "schema_note": g.schema_note,
    }


def serialize_scene_graph(g: SceneGraph) -> str:
    return json.dumps(graph_to_doc(g), indent=2, ensure_ascii=False) + "\n"


def load_scene_graph(file: str | Path) -> SceneGraph:
    """Load, parse and validate a scene-graph JSON file."""
    path = Path(file)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"{path}: invalid JSON at line {exc.lineno} col {exc.colno}: {exc.msg}"
        ) from exc
    return graph_from_doc(doc)


def save_scene_graph(g: SceneGraph, file: str | Path) -> None:
    Path(file).write_text(serialize_scene_graph(g), encoding="utf-8")
