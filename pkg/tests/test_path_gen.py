from __future__ import annotations

import json

import pytest

from socnavgen.corpus import load_corpus_inputs
from socnavgen.llm_gateway import RetriesExhausted, estimate_request_tokens
from socnavgen.path_gen import (
    InputError,
    build_path_prompt,
    edit_paths,
    generate_paths,
    graph_listing,
    plan_from_doc,
    plan_to_doc,
    plan_to_world,
    validate_plan,
)
from socnavgen.scenario_proposal import PedestrianSpec, ScenarioSpec, spec_from_doc
from socnavgen.scene_graph import UnknownNode


def spec_for(ped_ids, groups=None):
    return ScenarioSpec(
        scenario_description="Workers move around while the robot delivers.",
        pedestrians=[
            PedestrianSpec(ped_id=p, role="worker",
                           behavior_description="Walks around.",
                           group_id=(groups or {}).get(p))
            for p in ped_ids
        ],
        expected_robot_behavior="Drive politely.",
    )


def paths_text(doc):
    return "Here you go.\n```json\n" + json.dumps(doc) + "\n```"


WAREHOUSE_DOC = {
    "robot_nodes": ["dock", "staging", "corridor_w", "corridor_c"],
    "pedestrians": [
        {"ped_id": "p1", "nodes": ["breakroom", "aisle1_n", "corridor_w"],
         "encounter_node": "corridor_w"},
    ],
    "groups": {},
    "rationale": "r",
}


class TestPrompt:
    def test_adjacency_lists_every_edge_once(self, warehouse_graph):
        text = graph_listing(warehouse_graph)
        for e in warehouse_graph.edges:
            line = f"- {e.endpoints[0]} -- {e.endpoints[1]} ({e.semantic_type})"
            assert text.count(line) == 1
        assert len([ln for ln in text.splitlines() if " -- " in ln]) == len(
            warehouse_graph.edges)

    def test_prompt_deterministic(self, warehouse_graph):
        spec = spec_for(["p1"])
        assert build_path_prompt(warehouse_graph, spec) == build_path_prompt(
            warehouse_graph, spec)

    def test_prompt_token_budget_bound(self, warehouse_graph):
        # Regression bound for this module's prompt size (image excluded).
        spec = spec_for(["p1", "p2"])
        req = build_path_prompt(warehouse_graph, spec)
        tokens = estimate_request_tokens(req)
        assert 1500 <= tokens <= 6000

    def test_image_attached_when_given(self, warehouse_graph, warehouse_graph_file):
        img = warehouse_graph_file.parent / "map.png"
        req = build_path_prompt(warehouse_graph, spec_for(["p1"]),
                                map_image=str(img))
        assert req.image is not None and req.image.path == str(img)


class TestValidation:
    def test_valid_doc_accepted(self, warehouse_graph):
        plan = plan_from_doc(WAREHOUSE_DOC, warehouse_graph, spec_for(["p1"]))
        assert plan.robot_nodes[0] == "dock"

    def test_discontinuous_names_pair(self, warehouse_graph):
        doc = dict(WAREHOUSE_DOC, pedestrians=[
            {"ped_id": "p1", "nodes": ["breakroom", "corridor_w"]}])
        with pytest.raises(ValueError) as exc:
            plan_from_doc(doc, warehouse_graph, spec_for(["p1"]))
        assert "no edge between breakroom and corridor_w" in str(exc.value)

    def test_unknown_node_named(self, warehouse_graph):
        doc = dict(WAREHOUSE_DOC, robot_nodes=["dock", "Atrium"])
        with pytest.raises(ValueError) as exc:
            plan_from_doc(doc, warehouse_graph, spec_for(["p1"]))
        assert "Atrium" in str(exc.value)

    def test_missing_pedestrian_named(self, warehouse_graph):
        with pytest.raises(ValueError) as exc:
            plan_from_doc(WAREHOUSE_DOC, warehouse_graph, spec_for(["p1", "p2"]))
        assert "no path given for pedestrian p2" in str(exc.value)

    def test_robot_needs_two_nodes(self, warehouse_graph):
        doc = dict(WAREHOUSE_DOC, robot_nodes=["dock"])
        with pytest.raises(ValueError) as exc:
            plan_from_doc(doc, warehouse_graph, spec_for(["p1"]))
        assert "at least 2" in str(exc.value)

    def test_encounter_defaults_to_first_shared_node(self, warehouse_graph):
        doc = dict(WAREHOUSE_DOC, pedestrians=[
            {"ped_id": "p1", "nodes": ["breakroom", "aisle1_n", "corridor_w"]}])
        plan = plan_from_doc(doc, warehouse_graph, spec_for(["p1"]))
        assert plan.pedestrians[0].encounter_node == "corridor_w"

    def test_no_shared_node_keeps_none(self, warehouse_graph):
        doc = dict(WAREHOUSE_DOC, pedestrians=[
            {"ped_id": "p1", "nodes": ["office", "aisle3_n"]}])
        plan = plan_from_doc(doc, warehouse_graph, spec_for(["p1"]))
        assert plan.pedestrians[0].encounter_node is None

    def test_encounter_not_on_robot_path_rejected(self, warehouse_graph):
        doc = dict(WAREHOUSE_DOC, pedestrians=[
            {"ped_id": "p1", "nodes": ["breakroom", "aisle1_n"],
             "encounter_node": "aisle1_n"}])
        with pytest.raises(ValueError) as exc:
            plan_from_doc(doc, warehouse_graph, spec_for(["p1"]))
        assert "not on the robot's path" in str(exc.value)

    def test_group_consistency_checked(self, warehouse_graph):
        doc = dict(WAREHOUSE_DOC,
                   pedestrians=[
                       {"ped_id": "p1",
                        "nodes": ["breakroom", "aisle1_n", "corridor_w"],
                        "group_id": "g1"}],
                   groups={"g1": ["p1", "ghost"]})
        with pytest.raises(ValueError) as exc:
            plan_from_doc(doc, warehouse_graph, spec_for(["p1"], {"p1": "g1"}))
        assert "ghost" in str(exc.value)

    def test_single_member_group_rejected(self, warehouse_graph):
        doc = dict(WAREHOUSE_DOC,
                   pedestrians=[
                       {"ped_id": "p1",
                        "nodes": ["breakroom", "aisle1_n", "corridor_w"],
                        "group_id": "g1"}],
                   groups={"g1": ["p1"]})
        with pytest.raises(ValueError) as exc:
            plan_from_doc(doc, warehouse_graph, spec_for(["p1"]))
        assert "at least 2 members" in str(exc.value)

    def test_standing_pedestrian_single_node_allowed(self, warehouse_graph):
        doc = dict(WAREHOUSE_DOC, pedestrians=[
            {"ped_id": "p1", "nodes": ["aisle1_n"]}])
        plan = plan_from_doc(doc, warehouse_graph, spec_for(["p1"]))
        assert plan.pedestrians[0].nodes == ("aisle1_n",)


class TestGenerate:
    def test_first_response_valid(self, warehouse_graph, scripted_gateway_factory):
        gw = scripted_gateway_factory([paths_text(WAREHOUSE_DOC)])
        plan = generate_paths(warehouse_graph, spec_for(["p1"]), gw)
        assert gw.calls == 1
        assert validate_plan(plan, warehouse_graph, spec_for(["p1"])) == []

    def test_repair_quotes_offending_pair(self, warehouse_graph,
                                          scripted_gateway_factory):
        bad = dict(WAREHOUSE_DOC, pedestrians=[
            {"ped_id": "p1", "nodes": ["breakroom", "corridor_w"]}])
        gw = scripted_gateway_factory([paths_text(bad), paths_text(WAREHOUSE_DOC)])
        plan = generate_paths(warehouse_graph, spec_for(["p1"]), gw)
        assert plan.pedestrians[0].nodes == ("breakroom", "aisle1_n", "corridor_w")
        repair = gw.transport.requests[1].turns[-1][1]
        assert "breakroom" in repair and "corridor_w" in repair

    def test_unknown_node_then_exhaustion(self, warehouse_graph,
                                          scripted_gateway_factory):
        bad = dict(WAREHOUSE_DOC, robot_nodes=["dock", "Atrium"])
        gw = scripted_gateway_factory([paths_text(bad)] * 3)
        with pytest.raises(RetriesExhausted) as exc:
            generate_paths(warehouse_graph, spec_for(["p1"]), gw, max_attempts=3)
        assert len(exc.value.errors) == 3
        assert all("Atrium" in e for e in exc.value.errors)


class TestEdit:
    def _plan(self, warehouse_graph):
        return plan_from_doc(WAREHOUSE_DOC, warehouse_graph, spec_for(["p1"]))

    def test_empty_instruction_no_call(self, warehouse_graph,
                                       scripted_gateway_factory):
        gw = scripted_gateway_factory([])
        with pytest.raises(InputError):
            edit_paths(self._plan(warehouse_graph), "  ", warehouse_graph,
                       spec_for(["p1"]), gw)
        assert gw.calls == 0

    def test_successful_edit(self, warehouse_graph, scripted_gateway_factory):
        longer = dict(WAREHOUSE_DOC,
                      robot_nodes=["dock", "staging", "charging", "corridor_c",
                                   "corridor_w"],
                      pedestrians=[{
                          "ped_id": "p1",
                          "nodes": ["breakroom", "aisle1_n", "corridor_w"],
                          "encounter_node": "corridor_w"}])
        gw = scripted_gateway_factory([paths_text(longer)])
        plan = self._plan(warehouse_graph)
        result = edit_paths(plan, "Make the robot's path longer",
                            warehouse_graph, spec_for(["p1"]), gw)
        assert result.applied
        assert len(result.plan.robot_nodes) > len(plan.robot_nodes)
        prompt = gw.transport.requests[0].turns[0][1]
        assert "Make the robot's path longer" in prompt
        assert json.dumps(plan_to_doc(plan), indent=2) in prompt

    def test_failed_edit_preserves_plan(self, warehouse_graph,
                                        scripted_gateway_factory):
        gw = scripted_gateway_factory(["garbage"] * 3)
        plan = self._plan(warehouse_graph)
        result = edit_paths(plan, "do something impossible", warehouse_graph,
                            spec_for(["p1"]), gw, max_attempts=3)
        assert not result.applied
        assert result.plan == plan
        assert len(result.errors) == 3


class TestWorldPlan:
    def test_single_node_pedestrian(self, warehouse_graph):
        doc = dict(WAREHOUSE_DOC, pedestrians=[
            {"ped_id": "p1", "nodes": ["aisle1_n"]}])
        plan = plan_from_doc(doc, warehouse_graph, spec_for(["p1"]))
        world = plan_to_world(plan, warehouse_graph)
        assert world.pedestrian_waypoints["p1"] == (
            warehouse_graph.node("aisle1_n").world,)

    def test_transforms_match_independent_recomputation(self, warehouse_graph):
        plan = plan_from_doc(WAREHOUSE_DOC, warehouse_graph, spec_for(["p1"]))
        world = plan_to_world(plan, warehouse_graph)
        meta = warehouse_graph.meta
        for node_id, (wx, wy) in zip(plan.robot_nodes, world.robot_waypoints):
            px, py = warehouse_graph.node(node_id).pixel
            # Second, independent statement of the affine transform.
            assert wx == meta.origin[0] + px * meta.resolution
            assert wy == meta.origin[1] + (meta.image_height - py) * meta.resolution

    def test_lengths_and_order_preserved(self, warehouse_graph):
        plan = plan_from_doc(WAREHOUSE_DOC, warehouse_graph, spec_for(["p1"]))
        world = plan_to_world(plan, warehouse_graph)
        assert len(world.robot_waypoints) == len(plan.robot_nodes)
        assert len(world.pedestrian_waypoints["p1"]) == 3

    def test_stale_plan_unknown_node(self, warehouse_graph, corridor_graph):
        plan = plan_from_doc(WAREHOUSE_DOC, warehouse_graph, spec_for(["p1"]))
        with pytest.raises(UnknownNode):
            plan_to_world(plan, corridor_graph)


class TestCommittedFixtures:
    def test_path_repair_chain_replays(self, replay_gateway, repo_root,
                                       tmp_path):
        from socnavgen.bundle import ScenarioBundle

        inputs = load_corpus_inputs(repo_root / "fixtures" / "corpus_inputs.json")
        chain = inputs["chains"]["path_repair"]
        spec = spec_from_doc(chain["spec"])
        bundle = ScenarioBundle(tmp_path / "b")
        bundle.init_from_graph(
            repo_root / "assets" / "maps" / chain["map"] / "scenegraph.json")
        g = bundle.load_graph()
        plan = generate_paths(g, spec, replay_gateway, max_attempts=3,
                              map_image=str(bundle.prompt_image_path()))
        assert validate_plan(plan, g, spec) == []
