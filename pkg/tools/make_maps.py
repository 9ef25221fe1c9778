"""Regenerate the committed map assets (images + scene graphs).

Run from the repo root:  python3 tools/make_maps.py
Outputs are deterministic; re-running must not change committed bytes.
"""
from __future__ import annotations

import sys
from pathlib import Path

from PIL import Image, ImageDraw

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from socnavgen.scene_graph import (  # noqa: E402
    GraphEdge,
    GraphNode,
    MapMeta,
    SceneGraph,
    pixel_to_world,
    save_scene_graph,
    world_to_pixel,
)

RES = 0.05
FREE = 254
WALL = 0


def blank(width_m: float, height_m: float):
    w = int(round(width_m / RES))
    h = int(round(height_m / RES))
    img = Image.new("L", (w, h), FREE)
    draw = ImageDraw.Draw(img)
    # Border walls, 2 cells thick.
    draw.rectangle([0, 0, w - 1, h - 1], outline=WALL, width=2)
    return img, draw, w, h


def rect_world(draw, meta: MapMeta, x0, y0, x1, y1):
    """Fill a world-frame rectangle as obstacle."""
    px0, py0 = world_to_pixel(meta, (x0, y1))  # top-left in image coords
    px1, py1 = world_to_pixel(meta, (x1, y0))
    draw.rectangle([px0, py0, px1 - 1, py1 - 1], fill=WALL)


def build_graph(meta: MapMeta, nodes_def, edges_def, schema_note: str) -> SceneGraph:
    nodes = []
    for node_id, name, sem, (wx, wy) in nodes_def:
        pixel = world_to_pixel(meta, (wx, wy))
        dx, dy = pixel_to_world(meta, pixel)
        assert abs(dx - wx) < 1e-9 and abs(dy - wy) < 1e-9, (node_id, pixel)
        nodes.append(GraphNode.create(meta, node_id, name, sem, pixel))
    edges = [GraphEdge(endpoints=(a, b), semantic_type=sem) for a, b, sem in edges_def]
    return SceneGraph(meta=meta, nodes=nodes, edges=edges, schema_note=schema_note)


def annotate(img: Image.Image, g: SceneGraph, out_path: Path):
    rgb = img.convert("RGB")
    draw = ImageDraw.Draw(rgb)
    for n in g.nodes:
        px, py = n.pixel
        draw.ellipse([px - 4, py - 4, px + 4, py + 4], fill=(200, 30, 30))
        draw.text((px + 6, py - 6), n.id, fill=(20, 20, 160))
    for e in g.edges:
        a = g.node(e.endpoints[0]).pixel
        b = g.node(e.endpoints[1]).pixel
        draw.line([a, b], fill=(30, 140, 30), width=1)
    rgb.save(out_path)


def make_warehouse(out_dir: Path):
    img, draw, w, h = blank(12.0, 12.0)
    meta = MapMeta(image_path="map.png", resolution=RES, origin=(-6.0, -6.0),
                   image_width=w, image_height=h, occupied_threshold=127)
    # Shelf blocks between the aisles, plus a storage block in the south-east.
    rect_world(draw, meta, -2.2, 0.8, -0.8, 2.4)
    rect_world(draw, meta, 0.8, 0.8, 2.2, 2.4)
    rect_world(draw, meta, 1.0, -3.5, 3.0, -1.5)

    nodes = [
        ("dock", "Inbound dock", "area", (-4.5, -4.0)),
        ("staging", "Staging area", "area", (-3.0, -4.0)),
        ("charging", "Charging station", "station", (0.0, -4.0)),
        ("corridor_w", "West corridor junction", "junction", (-3.0, 0.0)),
        ("corridor_c", "Central corridor junction", "junction", (0.0, 0.0)),
        ("corridor_e", "East corridor junction", "junction", (3.0, 0.0)),
        ("aisle1_n", "Aisle 1 north end", "junction", (-3.0, 3.0)),
        ("aisle2_n", "Aisle 2 north end", "junction", (0.0, 3.0)),
        ("aisle3_n", "Aisle 3 north end", "junction", (3.0, 3.0)),
        ("breakroom", "Break room", "room", (-4.5, 3.0)),
        ("office", "Floor office", "room", (4.5, 3.0)),
        ("packing", "Packing station", "workstation", (4.5, 0.0)),
    ]
    edges = [
        ("dock", "staging", "dock area"),
        ("staging", "charging", "corridor"),
        ("staging", "corridor_w", "aisle"),
        ("corridor_w", "corridor_c", "corridor"),
        ("corridor_c", "corridor_e", "corridor"),
        ("corridor_e", "packing", "corridor"),
        ("corridor_w", "aisle1_n", "aisle"),
        ("corridor_c", "aisle2_n", "aisle"),
        ("corridor_e", "aisle3_n", "aisle"),
        ("aisle1_n", "aisle2_n", "walkway"),
        ("aisle2_n", "aisle3_n", "walkway"),
        ("aisle1_n", "breakroom", "doorway"),
        ("aisle3_n", "office", "doorway"),
        ("charging", "corridor_c", "aisle"),
    ]
    g = build_graph(meta, nodes, edges,
                    "Nodes are named warehouse places (areas, junctions, rooms, "
                    "workstations); edges are walkable connections typed by what "
                    "they cross (corridor, aisle, walkway, doorway, dock area).")
    out_dir.mkdir(parents=True, exist_ok=True)
    img.save(out_dir / "map.png")
    save_scene_graph(g, out_dir / "scenegraph.json")
    annotate(img, g, out_dir / "map_annotated.png")


def make_office(out_dir: Path):
    img, draw, w, h = blank(12.0, 8.0)
    meta = MapMeta(image_path="map.png", resolution=RES, origin=(-6.0, -4.0),
                   image_width=w, image_height=h, occupied_threshold=127)
    rect_world(draw, meta, -4.5, -3.0, -3.5, -1.0)
    rect_world(draw, meta, 3.5, 1.0, 4.5, 3.0)
    rect_world(draw, meta, -1.5, -3.0, 1.5, -2.5)

    nodes = [
        ("reception", "Reception desk", "area", (-5.0, 0.0)),
        ("lobby", "Lift lobby", "area", (-5.0, 2.0)),
        ("elevator", "Elevator doors", "door", (-3.5, 2.0)),
        ("corr_w", "Corridor west", "junction", (-2.5, 0.0)),
        ("corr_c", "Corridor center", "junction", (0.0, 0.0)),
        ("corr_e", "Corridor east", "junction", (2.5, 0.0)),
        ("meeting", "Meeting room", "room", (5.0, 0.0)),
        ("kitchen", "Kitchen alcove", "room", (0.0, 2.0)),
        ("office_a", "Office A door", "door", (-2.5, -2.0)),
        ("office_b", "Office B door", "door", (2.5, -2.0)),
    ]
    edges = [
        ("reception", "corr_w", "hallway"),
        ("corr_w", "corr_c", "hallway"),
        ("corr_c", "corr_e", "hallway"),
        ("corr_e", "meeting", "hallway"),
        ("corr_c", "kitchen", "alcove"),
        ("corr_w", "office_a", "doorway"),
        ("corr_e", "office_b", "doorway"),
        ("reception", "lobby", "hallway"),
        ("lobby", "elevator", "doorway"),
    ]
    g = build_graph(meta, nodes, edges,
                    "Office places: junctions along the main corridor, door "
                    "nodes for rooms, the lift lobby and kitchen alcove; edges "
                    "are hallways, doorways and the kitchen alcove opening.")
    out_dir.mkdir(parents=True, exist_ok=True)
    img.save(out_dir / "map.png")
    save_scene_graph(g, out_dir / "scenegraph.json")
    annotate(img, g, out_dir / "map_annotated.png")


def make_corridor(out_dir: Path):
    img, draw, w, h = blank(12.0, 6.0)
    meta = MapMeta(image_path="map.png", resolution=RES, origin=(-6.0, -3.0),
                   image_width=w, image_height=h, occupied_threshold=127)
    nodes = [
        ("west", "West end", "junction", (-5.0, 0.0)),
        ("mid", "Midpoint", "junction", (0.0, 0.0)),
        ("east", "East end", "junction", (5.0, 0.0)),
        ("mid_n", "North side of midpoint", "spot", (0.0, 0.7)),
        ("mid_s", "South side of midpoint", "spot", (0.0, -0.7)),
    ]
    edges = [
        ("west", "mid", "corridor"),
        ("mid", "east", "corridor"),
        ("mid", "mid_n", "open floor"),
        ("mid", "mid_s", "open floor"),
    ]
    g = build_graph(meta, nodes, edges,
                    "A plain corridor with a midpoint and two standing spots "
                    "beside it; used for planner comparison fixtures.")
    out_dir.mkdir(parents=True, exist_ok=True)
    img.save(out_dir / "map.png")
    save_scene_graph(g, out_dir / "scenegraph.json")
    annotate(img, g, out_dir / "map_annotated.png")


def main():
    maps = REPO / "assets" / "maps"
    make_warehouse(maps / "warehouse")
    make_office(maps / "office")
    make_corridor(maps / "corridor")
    print(f"maps written under {maps}")


if __name__ == "__main__":
    main()
