from __future__ import annotations

import json
import random

import pytest

from socnavgen.scene_graph import (
    EmptyPath,
    MapMeta,
    OutOfBounds,
    ParseError,
    UnknownNode,
    ValidationError,
    graph_from_doc,
    is_path_continuous,
    load_scene_graph,
    pixel_to_world,
    save_scene_graph,
    serialize_scene_graph,
    shortest_path,
    world_to_pixel,
)

META = MapMeta(image_path="map.png", resolution=0.05, origin=(-10.0, -10.0),
               image_width=400, image_height=400)


def doc_for(nodes, edges, meta=None):
    m = meta or META
    return {
        "meta": {
            "image_path": m.image_path, "resolution": m.resolution,
            "origin": list(m.origin), "image_width": m.image_width,
            "image_height": m.image_height,
            "occupied_threshold": m.occupied_threshold,
        },
        "nodes": [{"id": i, "name": i, "semantic_type": "place",
                   "pixel": list(px)} for i, px in nodes],
        "edges": [{"endpoints": [a, b], "semantic_type": "hallway"}
                  for a, b in edges],
        "schema_note": "",
    }


def line_graph(ids):
    nodes = [(i, (10 * (k + 1), 10)) for k, i in enumerate(ids)]
    edges = list(zip(ids, ids[1:]))
    return graph_from_doc(doc_for(nodes, edges))


class TestPixelWorld:
    def test_origin_pixel(self):
        assert pixel_to_world(META, (0, 400)) == (-10.0, -10.0)

    def test_center_pixel(self):
        assert pixel_to_world(META, (200, 200)) == (0.0, 0.0)

    def test_out_of_bounds(self):
        with pytest.raises(OutOfBounds):
            pixel_to_world(META, (401, 0))
        with pytest.raises(OutOfBounds):
            pixel_to_world(META, (-1, 0))

    def test_round_trip_random_pixels(self):
        rng = random.Random(1)
        for _ in range(500):
            p = (rng.randint(0, 400), rng.randint(0, 400))
            assert world_to_pixel(META, pixel_to_world(META, p)) == p

    def test_injective_on_lattice(self):
        seen = set()
        for px in range(0, 401, 40):
            for py in range(0, 401, 40):
                w = pixel_to_world(META, (px, py))
                assert w not in seen
                seen.add(w)


class TestLoadValidate:
    def test_minimal_graph(self, tmp_path):
        f = tmp_path / "g.json"
        f.write_text(json.dumps(doc_for([("A", (5, 5))], [])))
        g = load_scene_graph(f)
        assert len(g.nodes) == 1 and not g.edges

    def test_dangling_edge_names_node(self):
        with pytest.raises(ValidationError) as exc:
            graph_from_doc(doc_for([("A", (5, 5))], [("A", "Z")]))
        assert "Z" in str(exc.value)

    def test_all_violations_reported(self):
        doc = doc_for([("A", (5, 5)), ("A", (6, 6)), ("B", (9999, 5))],
                      [("A", "A"), ("A", "Q")])
        with pytest.raises(ValidationError) as exc:
            graph_from_doc(doc)
        text = str(exc.value)
        assert "duplicate node id A" in text
        assert "outside image" in text
        assert "distinct" in text
        assert "Q" in text

    def test_duplicate_edge_rejected(self):
        doc = doc_for([("A", (5, 5)), ("B", (9, 5))], [("A", "B"), ("B", "A")])
        with pytest.raises(ValidationError) as exc:
            graph_from_doc(doc)
        assert "duplicate edge" in str(exc.value)

    def test_malformed_json_has_line_context(self, tmp_path):
        f = tmp_path / "bad.json"
        f.write_text('{"meta": \n oops}')
        with pytest.raises(ParseError) as exc:
            load_scene_graph(f)
        assert "line 2" in str(exc.value)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            load_scene_graph(tmp_path / "nope.json")

    def test_disconnected_warns_not_errors(self, caplog):
        doc = doc_for([("A", (5, 5)), ("B", (9, 5))], [])
        with caplog.at_level("WARNING"):
            g = graph_from_doc(doc)
        assert len(g.nodes) == 2
        assert any("disconnected" in r.message for r in caplog.records)

    def test_warehouse_fixture_round_trip_is_byte_identical(
        self, warehouse_graph_file, tmp_path
    ):
        original = warehouse_graph_file.read_text(encoding="utf-8")
        g = load_scene_graph(warehouse_graph_file)
        assert serialize_scene_graph(g) == original
        out = tmp_path / "copy.json"
        save_scene_graph(g, out)
        assert out.read_text(encoding="utf-8") == original

    def test_structural_round_trip(self, warehouse_graph):
        doc = json.loads(serialize_scene_graph(warehouse_graph))
        g2 = graph_from_doc(doc)
        assert [n.id for n in g2.nodes] == [n.id for n in warehouse_graph.nodes]
        assert [e.endpoints for e in g2.edges] == [
            e.endpoints for e in warehouse_graph.edges
        ]
        assert g2.meta == warehouse_graph.meta


class TestContinuity:
    def test_simple_true(self):
        g = line_graph(["A", "B", "C"])
        assert is_path_continuous(g, ["A", "B", "C"]) == (True, None)

    def test_missing_edge_reports_pair(self):
        g = line_graph(["A", "B", "C"])
        ok, pair = is_path_continuous(g, ["A", "C"])
        assert not ok and pair == ("A", "C")

    def test_single_node_path(self):
        g = line_graph(["A", "B"])
        assert is_path_continuous(g, ["A"]) == (True, None)

    def test_unknown_node(self):
        g = line_graph(["A", "B"])
        with pytest.raises(UnknownNode):
            is_path_continuous(g, ["A", "Z"])

    def test_empty_path(self):
        g = line_graph(["A", "B"])
        with pytest.raises(EmptyPath):
            is_path_continuous(g, [])


def random_graph(rng: random.Random, max_nodes: int = 50):
    n = rng.randint(2, max_nodes)
    ids = [f"n{i}" for i in range(n)]
    nodes = [(i, (rng.randint(0, 400), rng.randint(0, 400))) for i in ids]
    pairs = set()
    for _ in range(rng.randint(n - 1, 3 * n)):
        a, b = rng.sample(ids, 2)
        pairs.add((a, b) if a < b else (b, a))
    return graph_from_doc(doc_for(nodes, sorted(pairs))), ids, pairs


def brute_force_continuous(path, pairs):
    """Independent oracle: checks each consecutive pair against the edge set."""
    for a, b in zip(path, path[1:]):
        key = (a, b) if a < b else (b, a)
        if key not in pairs:
            return False
    return True


class TestContinuityOracle:
    def test_200_random_graphs_agree_with_oracle(self):
        rng = random.Random(42)
        for _ in range(200):
            g, ids, pairs = random_graph(rng)
            adj = {i: list(g.neighbors(i)) for i in ids}
            # A valid random walk and a shuffled (likely broken) path.
            start = rng.choice(ids)
            walk = [start]
            for _ in range(rng.randint(1, 12)):
                nbrs = adj[walk[-1]]
                if not nbrs:
                    break
                walk.append(rng.choice(nbrs))
            shuffled = rng.sample(ids, min(len(ids), rng.randint(2, 8)))
            for path in (walk, shuffled):
                got, _ = is_path_continuous(g, path)
                assert got == brute_force_continuous(path, pairs)


def floyd_warshall_hops(ids, pairs):
    inf = float("inf")
    dist = {a: {b: (0 if a == b else inf) for b in ids} for a in ids}
    for a, b in pairs:
        dist[a][b] = dist[b][a] = 1
    for k in ids:
        for i in ids:
            dik = dist[i][k]
            if dik == inf:
                continue
            for j in ids:
                alt = dik + dist[k][j]
                if alt < dist[i][j]:
                    dist[i][j] = alt
    return dist


class TestShortestPath:
    def test_self_path(self):
        g = line_graph(["A", "B"])
        assert shortest_path(g, "A", "A") == ["A"]

    def test_line(self):
        g = line_graph(["A", "B", "C"])
        assert shortest_path(g, "A", "C") == ["A", "B", "C"]

    def test_unknown(self):
        g = line_graph(["A", "B"])
        with pytest.raises(UnknownNode):
            shortest_path(g, "A", "Z")

    def test_disconnected_empty(self):
        doc = doc_for([("A", (5, 5)), ("B", (9, 5))], [])
        g = graph_from_doc(doc)
        assert shortest_path(g, "A", "B") == []

    def test_hops_match_floyd_warshall(self):
        rng = random.Random(7)
        for _ in range(25):
            g, ids, pairs = random_graph(rng, max_nodes=20)
            dist = floyd_warshall_hops(ids, pairs)
            for _ in range(10):
                a, b = rng.choice(ids), rng.choice(ids)
                path = shortest_path(g, a, b)
                if dist[a][b] == float("inf"):
                    assert path == []
                else:
                    assert len(path) - 1 == dist[a][b]
                    assert is_path_continuous(g, path)[0]

    def test_result_satisfies_continuity(self, warehouse_graph):
        path = shortest_path(warehouse_graph, "dock", "office")
        assert len(path) >= 2
        assert is_path_continuous(warehouse_graph, path) == (True, None)
