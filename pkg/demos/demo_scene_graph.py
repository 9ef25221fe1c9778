"""Demo: load an annotated map, query it, and check path continuity.

Usage:
    python3 demos/demo_scene_graph.py
"""
from pathlib import Path

from socnavgen.scene_graph import is_path_continuous, load_scene_graph, shortest_path

REPO = Path(__file__).resolve().parents[1]


def main():
    g = load_scene_graph(REPO / "assets/maps/warehouse/scenegraph.json")
    print(f"warehouse graph: {len(g.nodes)} nodes, {len(g.edges)} edges")
    for n in g.nodes[:4]:
        print(f"  {n.id:12s} {n.semantic_type:12s} world=({n.world[0]:5.2f}, {n.world[1]:5.2f})")

    route = shortest_path(g, "dock", "office")
    print(f"\nshortest dock -> office: {' -> '.join(route)}")

    ok, pair = is_path_continuous(g, ["dock", "staging", "corridor_w"])
    print(f"[dock, staging, corridor_w] continuous: {ok}")
    ok, pair = is_path_continuous(g, ["dock", "corridor_c"])
    print(f"[dock, corridor_c] continuous: {ok} (offending pair: {pair})")


if __name__ == "__main__":
    main()
