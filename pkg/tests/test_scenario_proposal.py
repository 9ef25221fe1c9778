from __future__ import annotations

import json

import pytest

from socnavgen.corpus import load_corpus_inputs, metadata_from_doc
from socnavgen.llm_gateway import RetriesExhausted
from socnavgen.scenario_proposal import (
    ScenarioMetadata,
    ScenarioSpec,
    PedestrianSpec,
    build_proposal_prompt,
    load_proposal_examples,
    load_prompt_text,
    propose_scenario,
    spec_from_doc,
    spec_to_doc,
)

META = ScenarioMetadata(
    social_context="A busy distribution warehouse during the morning shift",
    task="Carry a bin of parts to packing",
    location_description="A warehouse with a dock and a corridor.",
)

ELEVATOR_ROUGH = (
    "The Robot approaches an elevator to go to a different floor to deliver "
    "supplies. The elevator opens and has a few people in it. 2 people leave "
    "the elevator while one of them is startled by the robot and keeps "
    "looking at it and doesn't leave the elevator"
)


def proposal_text(peds=1):
    doc = {
        "scenario_description": "A worker crosses the corridor as the robot passes.",
        "pedestrians": [
            {"ped_id": f"p{i+1}", "role": "worker",
             "behavior_description": "Crosses the corridor."}
            for i in range(peds)
        ],
        "expected_robot_behavior": "Slow and yield at the crossing.",
    }
    return "```json\n" + json.dumps(doc) + "\n```"


class TestPrompt:
    def test_deterministic(self):
        caps = load_prompt_text("capabilities.txt")
        examples = load_proposal_examples()
        a = build_proposal_prompt(META, caps, examples)
        b = build_proposal_prompt(META, caps, examples)
        assert a == b

    def test_rough_scenario_section_present_iff_given(self):
        caps = load_prompt_text("capabilities.txt")
        examples = load_proposal_examples()
        without = build_proposal_prompt(META, caps, examples)
        with_rough = build_proposal_prompt(
            ScenarioMetadata(social_context=META.social_context, task=META.task,
                             location_description=META.location_description,
                             rough_scenario="Two people cross."),
            caps, examples)
        assert "must adhere" not in without.turns[0][1]
        assert "must adhere" in with_rough.turns[0][1]
        assert "Two people cross." in with_rough.turns[0][1]

    def test_elevator_case_study_metadata_embedded_verbatim(self):
        meta = ScenarioMetadata(
            social_context="A multi-floor hospital",
            task="Deliver supplies to a different floor",
            location_description="A hospital lobby with an elevator bank.",
            rough_scenario=ELEVATOR_ROUGH,
        )
        req = build_proposal_prompt(meta, load_prompt_text("capabilities.txt"),
                                    load_proposal_examples())
        assert ELEVATOR_ROUGH in req.turns[0][1]

    def test_three_handcrafted_examples_ship(self):
        examples = load_proposal_examples()
        assert len(examples) == 3
        req = build_proposal_prompt(META, "caps", examples)
        for ex in examples:
            assert ex["output"]["scenario_description"] in req.turns[0][1]

    def test_naive_mode_drops_examples_and_capabilities(self):
        caps = load_prompt_text("capabilities.txt")
        structured = build_proposal_prompt(META, caps, load_proposal_examples())
        naive = build_proposal_prompt(META, "", [])
        assert "Worked examples" not in naive.turns[0][1]
        assert caps.split(".")[0] not in naive.system_prompt
        assert len(naive.turns[0][1]) < len(structured.turns[0][1])


class TestValidation:
    def test_spec_round_trip(self):
        spec = ScenarioSpec(
            scenario_description="d",
            pedestrians=[PedestrianSpec(ped_id="p1", role="r",
                                        behavior_description="b",
                                        group_id="g1")],
            expected_robot_behavior="e", guided=True)
        assert spec_from_doc(spec_to_doc(spec)) == spec

    def test_empty_metadata_rejected(self):
        with pytest.raises(ValueError):
            ScenarioMetadata(social_context=" ", task="t",
                             location_description="l")

    def test_pedestrian_cap(self):
        spec = ScenarioSpec(
            scenario_description="d",
            pedestrians=[PedestrianSpec(ped_id=f"p{i}", role="r",
                                        behavior_description="b")
                         for i in range(11)],
            expected_robot_behavior="e")
        assert any("cap" in p for p in spec.validate())

    def test_duplicate_ped_ids(self):
        spec = ScenarioSpec(
            scenario_description="d",
            pedestrians=[PedestrianSpec(ped_id="p1", role="r",
                                        behavior_description="b")] * 2,
            expected_robot_behavior="e")
        assert any("duplicate" in p for p in spec.validate())


class TestPropose:
    def test_valid_first_response(self, scripted_gateway_factory):
        gw = scripted_gateway_factory([proposal_text(peds=2)])
        spec = propose_scenario(META, gw)
        assert len(spec.pedestrians) == 2
        assert not spec.guided

    def test_guided_flag_tracks_rough(self, scripted_gateway_factory):
        meta = ScenarioMetadata(social_context="c", task="t",
                                location_description="l", rough_scenario="r")
        gw = scripted_gateway_factory([proposal_text()])
        assert propose_scenario(meta, gw).guided is True

    def test_zero_pedestrians_repaired(self, scripted_gateway_factory):
        gw = scripted_gateway_factory([proposal_text(peds=0), proposal_text(peds=1)])
        spec = propose_scenario(META, gw)
        assert len(spec.pedestrians) == 1
        repair_turn = gw.transport.requests[1].turns[-1][1]
        assert "at least one pedestrian" in repair_turn

    def test_exhaustion_after_three(self, scripted_gateway_factory):
        gw = scripted_gateway_factory(["no json"] * 3)
        with pytest.raises(RetriesExhausted) as exc:
            propose_scenario(META, gw, max_attempts=3)
        assert len(exc.value.errors) == 3


class TestCommittedFixtures:
    def test_proposal_repair_chain_replays(self, replay_gateway, repo_root):
        inputs = load_corpus_inputs(repo_root / "fixtures" / "corpus_inputs.json")
        meta = metadata_from_doc(inputs["chains"]["proposal_repair"]["metadata"])
        spec = propose_scenario(meta, replay_gateway, max_attempts=3)
        assert len(spec.pedestrians) == 1
        assert spec.guided
