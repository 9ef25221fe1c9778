"""Regenerate the committed LLM fixture store (fixtures/llm).

Every fixture is produced by running the real pipeline functions in record
mode against a scripted responder, so request digests always match what the
pipeline will ask for in replay. Run this after changing prompt templates,
corpus inputs, or map assets, then commit the result.

Run from the repo root:  python3 tools/regen_fixtures.py
"""
from __future__ import annotations

import json
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from socnavgen.behavior import build_bt_prompt, default_library, generate_bt  # noqa: E402
from socnavgen.bundle import ScenarioBundle  # noqa: E402
from socnavgen.corpus import corpus_cases, load_corpus_inputs, metadata_from_doc, run_case  # noqa: E402
from socnavgen.llm_gateway import ChatRequest, ChatResponse, LLMGateway, RetriesExhausted  # noqa: E402
from socnavgen.path_gen import edit_paths, generate_paths  # noqa: E402
from socnavgen.pipeline import stage_behaviors, stage_paths, stage_propose  # noqa: E402
from socnavgen.scenario_proposal import load_prompt_text, propose_scenario, spec_from_doc  # noqa: E402

FIXTURES = REPO / "fixtures" / "llm"
INPUTS = load_corpus_inputs(REPO / "fixtures" / "corpus_inputs.json")
MAPS = {name: REPO / "assets" / "maps" / name / "scenegraph.json"
        for name in ("warehouse", "office")}
LIB = default_library()


class Script:
    def __init__(self, texts):
        self.texts = list(texts)
        self.served = 0

    def __call__(self, req: ChatRequest) -> ChatResponse:
        if not self.texts:
            raise AssertionError("script exhausted")
        self.served += 1
        return ChatResponse(text=self.texts.pop(0))


def gateway_for(texts) -> tuple[LLMGateway, Script]:
    script = Script(texts)
    return LLMGateway(mode="record", fixtures_dir=FIXTURES, transport=script), script


def J(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False)


def prose_json(prose: str, obj) -> str:
    return f"{prose}\n\n```json\n{J(obj)}\n```"


def prose_xml(prose: str, xml: str) -> str:
    return f"{prose}\n\n```xml\n{xml}\n```"


# ---------------------------------------------------------------------------
# Behavior tree shapes reused across cases
# ---------------------------------------------------------------------------

def bt_yield(dist=2.0, secs=2.0) -> str:
    return (f'<Fallback><Sequence><IsRobotNearby dist_m="{dist}"/>'
            f'<StopAndWait secs="{secs}"/></Sequence><RegularNav/></Fallback>')


def bt_stare(dist=4.0, look=3.0, wait=2.0) -> str:
    return (f'<Fallback><Sequence><IsRobotVisible dist_m="{dist}"/>'
            f'<LookAtRobot secs="{look}"/><StopAndWait secs="{wait}"/>'
            f'</Sequence><RegularNav/></Fallback>')


def bt_block_wave(dist=2.5, block=4.0) -> str:
    return (f'<Fallback><Sequence><IsRobotNearby dist_m="{dist}"/>'
            f'<BlockRobot secs="{block}"/><MakeGesture code="2" target="robot"/>'
            f'<RegularNav/></Sequence><RegularNav/></Fallback>')


def bt_follow(dist=6.0, secs=6.0) -> str:
    return (f'<Fallback><Sequence><IsRobotVisible dist_m="{dist}"/>'
            f'<FollowRobot secs="{secs}"/></Sequence><RegularNav/></Fallback>')


# ---------------------------------------------------------------------------
# Warehouse happy path (main fixture scenario)
# ---------------------------------------------------------------------------

HAPPY_PROPOSAL = {
    "scenario_description": (
        "The robot picks up a bin of parts at the inbound dock, rolls through "
        "the staging area onto the central corridor and east to the packing "
        "station. As it nears the central junction, two pickers walking "
        "together from the break room cross the corridor on their way past "
        "aisle two to the charging bay, so the robot meets a two-person group "
        "cutting across its route. A supervisor stands at the north end of "
        "aisle one and watches the robot whenever it is in view. Right after "
        "the pickers cross, the first picker waves the robot through."),
    "pedestrians": [
        {"ped_id": "p1", "role": "picker",
         "behavior_description": (
             "Walks with p2 from the break room along the north walkway and "
             "down aisle two, crossing the central junction toward the "
             "charging bay; pauses briefly if the robot is very close, then "
             "waves the robot through (proceed gesture) after crossing."),
         "group_id": "g1"},
        {"ped_id": "p2", "role": "picker",
         "behavior_description": (
             "Walks beside p1 the whole way to the charging bay and does not "
             "yield to the robot."),
         "group_id": "g1"},
        {"ped_id": "p3", "role": "supervisor",
         "behavior_description": (
             "Stands at the north end of aisle one; whenever the robot is "
             "visible within five meters she stops and looks at it until it "
             "passes, never leaving her spot.")},
    ],
    "expected_robot_behavior": (
        "Slow before the central junction, let the pair cross without "
        "splitting them, keep about a meter of clearance from the aisle-one "
        "area where the supervisor stands, then continue east and dock at "
        "the packing station."),
}

HAPPY_PATHS = {
    "robot_nodes": ["dock", "staging", "corridor_w", "corridor_c",
                    "corridor_e", "packing"],
    "pedestrians": [
        {"ped_id": "p1", "nodes": ["breakroom", "aisle1_n", "aisle2_n",
                                   "corridor_c", "charging"],
         "group_id": "g1", "encounter_node": "corridor_c"},
        {"ped_id": "p2", "nodes": ["breakroom", "aisle1_n", "aisle2_n",
                                   "corridor_c", "charging"],
         "group_id": "g1", "encounter_node": "corridor_c"},
        {"ped_id": "p3", "nodes": ["aisle1_n"]},
    ],
    "groups": {"g1": ["p1", "p2"]},
    "rationale": (
        "The robot takes the direct dock-to-packing corridor route. The "
        "picker pair walks the north walkway and descends aisle two so their "
        "crossing lands on the central junction, which both their path and "
        "the robot's share, making it the encounter node. The supervisor "
        "stands at aisle one's north end with line of sight down the aisle."),
}

HAPPY_BTS = {
    "p1": ('<Fallback><Sequence><IsRobotNearby dist_m="1.5"/>'
           '<StopAndWait secs="1.0"/><MakeGesture code="2" target="robot"/>'
           '</Sequence><RegularNav/></Fallback>'),
    "p2": bt_yield(1.2, 0.5),
    "p3": ('<Fallback><Sequence><IsRobotVisible dist_m="5.0"/>'
           '<LookAtRobot secs="3.0"/></Sequence><RegularNav/></Fallback>'),
}

HAPPY_EDIT_PATHS = {
    "robot_nodes": ["dock", "staging", "charging", "corridor_c", "corridor_w",
                    "corridor_c", "corridor_e", "packing"],
    "pedestrians": HAPPY_PATHS["pedestrians"],
    "groups": {"g1": ["p1", "p2"]},
    "rationale": (
        "To lengthen the route the robot swings past the charging bay and "
        "then out to the west junction and back before heading east; every "
        "leg is an edge and the pedestrian paths and encounter nodes stay "
        "unchanged."),
}


def record_happy_path(workdir: Path) -> None:
    texts = [
        prose_json("Here is a precise scenario for that warehouse situation.",
                   HAPPY_PROPOSAL),
        prose_json("Tracing each hop along the edge list, these routes stage "
                   "the crossing at the central junction.", HAPPY_PATHS),
        prose_xml("A yield-then-wave behavior for the first picker:",
                  HAPPY_BTS["p1"]),
        prose_xml("The second picker only hesitates when the robot is on top "
                  "of her:", HAPPY_BTS["p2"]),
        prose_xml("The supervisor watches whenever the robot is in sight:",
                  HAPPY_BTS["p3"]),
        prose_json("Extending the robot's route with the north walkway detour "
                   "keeps every hop on an edge.", HAPPY_EDIT_PATHS),
    ]
    gw, script = gateway_for(texts)
    meta = metadata_from_doc(INPUTS["happy_path"]["metadata"])
    bundle = ScenarioBundle(workdir / "happy")
    bundle.init_from_graph(MAPS["warehouse"])
    stage_propose(bundle, meta, gw, max_attempts=3)
    stage_paths(bundle, gw, max_attempts=3)
    stage_behaviors(bundle, gw, max_attempts=3)
    g = bundle.load_graph()
    spec = bundle.load_spec()
    plan = bundle.load_plan(g, spec)
    result = edit_paths(plan, INPUTS["happy_path"]["edit_instruction"], g, spec,
                        gw, max_attempts=3)
    assert result.applied, result.errors
    assert not script.texts, f"{len(script.texts)} unused happy-path texts"
    print(f"happy path: {script.served} fixtures")


def record_edit_fail(workdir: Path) -> None:
    bads = [
        prose_json("Routing through the vents:", {
            "robot_nodes": ["dock", "vents", "packing"],
            "pedestrians": HAPPY_PATHS["pedestrians"],
            "groups": {"g1": ["p1", "p2"]},
            "rationale": "Straight through the ceiling."}),
        prose_json("Perhaps via the roof instead:", {
            "robot_nodes": ["dock", "roof_hatch", "packing"],
            "pedestrians": HAPPY_PATHS["pedestrians"],
            "groups": {"g1": ["p1", "p2"]},
            "rationale": "Over the top."}),
        "There is no safe way to route the robot through the ceiling vents.",
    ]
    gw, script = gateway_for(bads)
    bundle = ScenarioBundle(workdir / "happy")
    g = bundle.load_graph()
    spec = bundle.load_spec()
    # The stored plan is the edited one; the failing edit applies to it.
    plan = bundle.load_plan(g, spec)
    result = edit_paths(plan, INPUTS["chains"]["edit_fail"]["instruction"],
                        g, spec, gw, max_attempts=3)
    assert not result.applied and result.plan == plan
    assert not script.texts
    print(f"edit-fail chain: {script.served} fixtures")


# ---------------------------------------------------------------------------
# Repair chains
# ---------------------------------------------------------------------------

def record_path_chains(workdir: Path) -> None:
    # Repairable: first attempt contains a hop with no edge, second is fixed.
    chain = INPUTS["chains"]["path_repair"]
    spec = spec_from_doc(chain["spec"])
    bundle = ScenarioBundle(workdir / "path_repair")
    bundle.init_from_graph(MAPS[chain["map"]])
    g = bundle.load_graph()
    bad = prose_json("Routes for the night patrol:", {
        "robot_nodes": ["dock", "staging", "corridor_w", "corridor_c",
                        "corridor_e", "aisle3_n", "office"],
        "pedestrians": [{"ped_id": "p1",
                         "nodes": ["breakroom", "corridor_w"],
                         "encounter_node": "corridor_w"}],
        "groups": {},
        "rationale": "The restocker cuts from the break room to the corridor."})
    good = prose_json("Corrected: the restocker must go through aisle one's "
                      "north end first.", {
        "robot_nodes": ["dock", "staging", "corridor_w", "corridor_c",
                        "corridor_e", "aisle3_n", "office"],
        "pedestrians": [{"ped_id": "p1",
                         "nodes": ["breakroom", "aisle1_n", "corridor_w"],
                         "encounter_node": "corridor_w"}],
        "groups": {},
        "rationale": "Break room connects to aisle one, then the corridor."})
    gw, script = gateway_for([bad, good])
    image = bundle.prompt_image_path()
    plan = generate_paths(g, spec, gw, max_attempts=3, map_image=str(image))
    assert plan.pedestrians[0].nodes == ("breakroom", "aisle1_n", "corridor_w")
    assert not script.texts
    print(f"path repair chain: {script.served} fixtures")

    # Always bad: three attempts, three different violations.
    chain = INPUTS["chains"]["path_always_bad"]
    spec = spec_from_doc(chain["spec"])
    bundle = ScenarioBundle(workdir / "path_always_bad")
    bundle.init_from_graph(MAPS[chain["map"]])
    g = bundle.load_graph()
    visitors = lambda p1, p2: [  # noqa: E731
        {"ped_id": "p1", "nodes": p1},
        {"ped_id": "p2", "nodes": p2},
    ]
    bads = [
        prose_json("Visitor routes:", {
            "robot_nodes": ["reception", "corr_c", "corr_e", "meeting"],
            "pedestrians": visitors(["reception", "corr_w"],
                                    ["reception", "corr_w"]),
            "groups": {}, "rationale": "Straight down the corridor."}),
        prose_json("Adjusted:", {
            "robot_nodes": ["reception", "corr_w", "corr_c", "corr_e", "meeting"],
            "pedestrians": visitors(["Atrium", "corr_w"],
                                    ["reception", "corr_w"]),
            "groups": {}, "rationale": "Start them in the atrium."}),
        prose_json("One more try:", {
            "robot_nodes": ["reception", "corr_w", "corr_c", "corr_e", "meeting"],
            "pedestrians": visitors(["reception", "corr_w"],
                                    ["lobby", "corr_w"]),
            "groups": {}, "rationale": "Second visitor from the lobby."}),
    ]
    gw, script = gateway_for(bads)
    image = bundle.prompt_image_path()
    try:
        generate_paths(g, spec, gw, max_attempts=3, map_image=str(image))
    except RetriesExhausted as exc:
        assert len(exc.errors) == 3
    else:
        raise AssertionError("always-bad path chain unexpectedly validated")
    assert not script.texts
    print(f"path always-bad chain: {script.served} fixtures")


def record_bt_chains() -> None:
    from socnavgen.scenario_proposal import PedestrianSpec

    chain = INPUTS["chains"]["bt_repair"]
    ped = PedestrianSpec(**chain["ped"])
    texts = [
        prose_xml("A staring behavior:", "<Sequence><Stare/></Sequence>"),
        prose_xml("Using only library nodes this time:",
                  ('<Fallback><Sequence><IsRobotNearby dist_m="3.0"/>'
                   '<LookAtRobot secs="3.0"/><StopAndWait secs="1.0"/>'
                   '</Sequence><RegularNav/></Fallback>')),
    ]
    gw, script = gateway_for(texts)
    tree = generate_bt(ped, LIB, gw, max_attempts=3)
    assert tree.owner == "p1"
    assert not script.texts
    print(f"bt repair chain: {script.served} fixtures")

    chain = INPUTS["chains"]["bt_always_bad"]
    ped = PedestrianSpec(**chain["ped"])
    texts = [
        prose_xml("A dance behavior:", "<Dance/>"),
        prose_xml("With a gesture flourish:",
                  '<MakeGesture code="two" target="robot"/>'),
        prose_xml("Fallback plan:", "<Fallback></Fallback>"),
    ]
    gw, script = gateway_for(texts)
    try:
        generate_bt(ped, LIB, gw, max_attempts=3)
    except RetriesExhausted as exc:
        assert len(exc.errors) == 3
    else:
        raise AssertionError("always-bad bt chain unexpectedly validated")
    assert not script.texts
    print(f"bt always-bad chain: {script.served} fixtures")


def record_proposal_chain() -> None:
    chain = INPUTS["chains"]["proposal_repair"]
    meta = metadata_from_doc(chain["metadata"])
    empty = prose_json("A calm corridor scene:", {
        "scenario_description": "The robot carries coffee along the corridor "
                                "while the home is quiet.",
        "pedestrians": [],
        "expected_robot_behavior": "Drive smoothly to the hall."})
    fixed = prose_json("Adding the resident the scenario needs:", {
        "scenario_description": (
            "The robot carries coffee from the kitchen along the connecting "
            "corridor to the sitting hall while a resident with a walking "
            "frame moves slowly along the handrail in the same direction."),
        "pedestrians": [
            {"ped_id": "p1", "role": "resident",
             "behavior_description": (
                 "Walks very slowly along the handrail side of the corridor "
                 "toward the sitting hall, ignoring the robot."),
             "group_id": None}],
        "expected_robot_behavior": (
            "Follow the slow resident patiently and overtake only on the "
            "open side with generous clearance.")})
    gw, script = gateway_for([empty, fixed])
    spec = propose_scenario(meta, gw, max_attempts=3)
    assert len(spec.pedestrians) == 1
    assert not script.texts
    print(f"proposal repair chain: {script.served} fixtures")


# ---------------------------------------------------------------------------
# Structured/naive corpus
# ---------------------------------------------------------------------------

def corpus_proposal(case_id: str) -> dict:
    warehouse = case_id.startswith("warehouse")
    place = "warehouse floor" if warehouse else "office corridor"
    robot_goal = "packing station" if warehouse else "meeting room"
    defs = {
        "group_crossing": {
            "scenario_description": (
                f"Two colleagues walk together across the {place} while the "
                f"robot carries its load toward the {robot_goal}; their route "
                "cuts straight across the robot's at the central junction."),
            "pedestrians": [
                {"ped_id": "p1", "role": "worker", "group_id": "g1",
                 "behavior_description": "Walks side by side with p2 across "
                 "the robot's route, chatting; pauses only if the robot gets "
                 "very close."},
                {"ped_id": "p2", "role": "worker", "group_id": "g1",
                 "behavior_description": "Stays at p1's side the whole way "
                 "and does not yield."}],
            "expected_robot_behavior": (
                "Slow down and pass behind or in front of the pair as a "
                "whole, never cutting between them."),
        },
        "sudden_exit": {
            "scenario_description": (
                f"While the robot crosses the {place}, a worker steps out of "
                "a side room directly into its path, is startled, and freezes "
                "staring at the robot until it has passed."),
            "pedestrians": [
                {"ped_id": "p1", "role": "worker",
                 "behavior_description": "Steps out of the side room into "
                 "the robot's path; when the robot is close, stops, stares "
                 "at it for a few seconds, then continues."}],
            "expected_robot_behavior": (
                "Brake immediately when the person appears, leave them room, "
                "and resume smoothly once they move on."),
        },
        "block_and_wave": {
            "scenario_description": (
                f"A worker plants themselves in the robot's way on the "
                f"{place}, holds it up for a few seconds, then waves it "
                "through and steps aside."),
            "pedestrians": [
                {"ped_id": "p1", "role": "worker",
                 "behavior_description": "Blocks the robot when it comes "
                 "near, waits a few seconds, then makes a proceed gesture at "
                 "the robot and walks away."}],
            "expected_robot_behavior": (
                "Stop without crowding the blocker, wait for the proceed "
                "gesture, then continue at normal speed."),
        },
        "follower": {
            "scenario_description": (
                f"A curious onlooker spots the robot on the {place} and "
                "follows close behind it for part of its route before "
                "peeling away."),
            "pedestrians": [
                {"ped_id": "p1", "role": "onlooker",
                 "behavior_description": "When the robot is visible, follows "
                 "a short distance behind it for several seconds, then "
                 "resumes their own route."}],
            "expected_robot_behavior": (
                "Maintain steady speed and course despite being followed, "
                "without sudden stops."),
        },
        "doorway_exit": {
            "scenario_description": (
                f"As the robot passes a doorway off the {place}, two people "
                "come out together; one walks on, the other is startled and "
                "stays by the doorway staring at the robot."),
            "pedestrians": [
                {"ped_id": "p1", "role": "worker",
                 "behavior_description": "Comes out of the doorway and walks "
                 "off along their own route, yielding briefly if the robot "
                 "is very close."},
                {"ped_id": "p2", "role": "worker",
                 "behavior_description": "Comes out behind p1, startles at "
                 "the robot, and stays by the doorway looking at it."}],
            "expected_robot_behavior": (
                "Give the doorway a wide berth, let the pair emerge, and "
                "pass the startled person with clear margin."),
        },
    }
    key = case_id.split("_", 1)[1]
    return defs[key]


CORPUS_PATHS = {
    "warehouse_group_crossing": {
        "robot_nodes": ["dock", "staging", "corridor_w", "corridor_c",
                        "corridor_e", "packing"],
        "pedestrians": [
            {"ped_id": "p1", "nodes": ["breakroom", "aisle1_n", "aisle2_n",
                                       "corridor_c", "charging"],
             "group_id": "g1", "encounter_node": "corridor_c"},
            {"ped_id": "p2", "nodes": ["breakroom", "aisle1_n", "aisle2_n",
                                       "corridor_c", "charging"],
             "group_id": "g1", "encounter_node": "corridor_c"}],
        "groups": {"g1": ["p1", "p2"]},
        "rationale": "The pair crosses the robot at the central junction."},
    "warehouse_sudden_exit": {
        "robot_nodes": ["dock", "staging", "corridor_w", "corridor_c",
                        "corridor_e", "packing"],
        "pedestrians": [
            {"ped_id": "p1", "nodes": ["office", "aisle3_n", "corridor_e"],
             "encounter_node": "corridor_e"}],
        "groups": {},
        "rationale": "The worker steps out of the floor office into the east "
                     "junction just as the robot arrives."},
    "warehouse_block_and_wave": {
        "robot_nodes": ["dock", "staging", "corridor_w", "corridor_c",
                        "corridor_e", "packing"],
        "pedestrians": [
            {"ped_id": "p1", "nodes": ["charging", "corridor_c"],
             "encounter_node": "corridor_c"}],
        "groups": {},
        "rationale": "The blocker comes up from the charging bay to meet the "
                     "robot at the central junction."},
    "warehouse_follower": {
        "robot_nodes": ["dock", "staging", "corridor_w", "corridor_c",
                        "corridor_e", "packing"],
        "pedestrians": [
            {"ped_id": "p1", "nodes": ["staging", "corridor_w", "corridor_c"],
             "encounter_node": "corridor_w"}],
        "groups": {},
        "rationale": "The onlooker picks the robot up at staging and trails "
                     "it along the corridor."},
    "warehouse_doorway_exit": {
        "robot_nodes": ["dock", "staging", "corridor_w", "corridor_c",
                        "corridor_e", "packing"],
        "pedestrians": [
            {"ped_id": "p1", "nodes": ["breakroom", "aisle1_n", "corridor_w",
                                       "staging"],
             "encounter_node": "corridor_w"},
            {"ped_id": "p2", "nodes": ["breakroom", "aisle1_n", "corridor_w"],
             "encounter_node": "corridor_w"}],
        "groups": {},
        "rationale": "Both emerge from the break room door; p2 stops at the "
                     "west junction where the robot passes."},
    "office_group_crossing": {
        "robot_nodes": ["reception", "corr_w", "corr_c", "corr_e", "meeting"],
        "pedestrians": [
            {"ped_id": "p1", "nodes": ["kitchen", "corr_c", "corr_e",
                                       "office_b"],
             "group_id": "g1", "encounter_node": "corr_c"},
            {"ped_id": "p2", "nodes": ["kitchen", "corr_c", "corr_e",
                                       "office_b"],
             "group_id": "g1", "encounter_node": "corr_c"}],
        "groups": {"g1": ["p1", "p2"]},
        "rationale": "The pair leaves the kitchen and crosses the corridor "
                     "center on the way to office B."},
    "office_sudden_exit": {
        "robot_nodes": ["reception", "corr_w", "corr_c", "corr_e", "meeting"],
        "pedestrians": [
            {"ped_id": "p1", "nodes": ["office_b", "corr_e"],
             "encounter_node": "corr_e"}],
        "groups": {},
        "rationale": "The worker steps out of office B into the east "
                     "junction in front of the robot."},
    "office_block_and_wave": {
        "robot_nodes": ["reception", "corr_w", "corr_c", "corr_e", "meeting"],
        "pedestrians": [
            {"ped_id": "p1", "nodes": ["kitchen", "corr_c"],
             "encounter_node": "corr_c"}],
        "groups": {},
        "rationale": "The blocker comes out of the kitchen alcove to stand "
                     "at the corridor center."},
    "office_follower": {
        "robot_nodes": ["reception", "corr_w", "corr_c", "corr_e", "meeting"],
        "pedestrians": [
            {"ped_id": "p1", "nodes": ["reception", "corr_w", "corr_c"],
             "encounter_node": "corr_w"}],
        "groups": {},
        "rationale": "The onlooker starts at reception and trails the robot "
                     "down the corridor."},
    "office_doorway_exit": {
        "robot_nodes": ["reception", "corr_w", "corr_c", "corr_e", "meeting"],
        "pedestrians": [
            {"ped_id": "p1", "nodes": ["elevator", "lobby", "reception",
                                       "corr_w", "office_a"],
             "encounter_node": "corr_w"},
            {"ped_id": "p2", "nodes": ["elevator", "lobby", "reception",
                                       "corr_w"],
             "encounter_node": "corr_w"}],
        "groups": {},
        "rationale": "Both come out of the elevator; p1 heads to office A "
                     "while p2 stops at the west junction, staring."},
}

CORPUS_BTS = {
    "group_crossing": {"p1": bt_yield(1.5, 1.0), "p2": bt_yield(1.2, 0.5)},
    "sudden_exit": {"p1": bt_stare(3.0, 3.0, 2.0)},
    "block_and_wave": {"p1": bt_block_wave()},
    "follower": {"p1": bt_follow()},
    "doorway_exit": {"p1": bt_yield(2.0, 1.5), "p2": bt_stare(4.0, 4.0, 2.0)},
}

# Structured mode: one committed failure (first-shot discontinuous paths).
STRUCTURED_FAILS = {
    "office_follower": ("paths", prose_json("Routes:", {
        "robot_nodes": ["reception", "corr_w", "corr_c", "corr_e", "meeting"],
        "pedestrians": [
            {"ped_id": "p1", "nodes": ["reception", "corr_c"],
             "encounter_node": "corr_c"}],
        "groups": {},
        "rationale": "The onlooker cuts straight to the corridor center."})),
}

# Naive mode: two full passes, the rest fail with typical first-shot errors.
NAIVE_PASS = {"warehouse_group_crossing", "office_block_and_wave"}

NAIVE_FAILS = {
    "warehouse_sudden_exit": ("propose",
        "Someone could walk out of the office and be surprised by the robot "
        "as it drives past. The robot should stop and let them recover "
        "before continuing toward packing. That would make a good test of "
        "its reactions."),
    "warehouse_block_and_wave": ("paths", prose_json("Paths:", {
        "robot_nodes": ["dock", "corridor", "packing"],
        "pedestrians": [{"ped_id": "p1", "nodes": ["charging", "corridor"]}]})),
    "warehouse_follower": ("behaviors",
        prose_xml("Follower behavior:", "<FollowRobot/>")),
    "warehouse_doorway_exit": ("propose", prose_json("Scenario:", {
        "scenario_description": "People come out of a doorway near the robot.",
        "pedestrians": [],
        "expected_robot_behavior": "Avoid them."})),
    "office_group_crossing": ("paths", prose_json("Paths:", {
        "robot_nodes": ["reception", "corr_w", "corr_c", "corr_e", "meeting"],
        "pedestrians": [
            {"ped_id": "p1", "nodes": ["kitchen", "office_b"], "group_id": "g1"},
            {"ped_id": "p2", "nodes": ["kitchen", "office_b"], "group_id": "g1"}],
        "groups": {"g1": ["p1", "p2"]}})),
    "office_sudden_exit": ("propose", prose_json("Scenario:", {
        "scenario_description": "A worker steps out of office B in front of "
                                "the robot and freezes.",
        "pedestrians": [{"ped_id": "p1", "role": "worker",
                         "behavior_description": "Steps out and freezes."}]})),
    "office_follower": ("behaviors",
        prose_xml("Follower behavior:", "<Sequence></Sequence>")),
    "office_doorway_exit": ("paths", prose_json("Paths:", {
        "robot_nodes": ["reception", "meeting"],
        "pedestrians": [
            {"ped_id": "p1", "nodes": ["elevator", "lobby", "reception"]},
            {"ped_id": "p2", "nodes": ["elevator", "lobby", "reception"]}]})),
}

NAIVE_PROPOSALS = {
    "warehouse_group_crossing": {
        "scenario_description": "Two workers cross the warehouse corridor "
                                "together while the robot carries a bin to "
                                "packing.",
        "pedestrians": [
            {"ped_id": "p1", "role": "worker", "group_id": "g1",
             "behavior_description": "Crosses the corridor with p2."},
            {"ped_id": "p2", "role": "worker", "group_id": "g1",
             "behavior_description": "Crosses the corridor with p1."}],
        "expected_robot_behavior": "Do not drive between the two workers."},
    "warehouse_block_and_wave": {
        "scenario_description": "A worker blocks the robot in the corridor, "
                                "then waves it on.",
        "pedestrians": [{"ped_id": "p1", "role": "worker",
                         "behavior_description": "Blocks the robot, then "
                         "waves it through."}],
        "expected_robot_behavior": "Wait for the wave, then continue."},
    "warehouse_follower": {
        "scenario_description": "A curious worker follows the robot along "
                                "the corridor.",
        "pedestrians": [{"ped_id": "p1", "role": "worker",
                         "behavior_description": "Follows the robot for a "
                         "while."}],
        "expected_robot_behavior": "Keep steady speed."},
    "office_group_crossing": {
        "scenario_description": "Two workers cross the office corridor "
                                "together in front of the robot.",
        "pedestrians": [
            {"ped_id": "p1", "role": "worker", "group_id": "g1",
             "behavior_description": "Crosses the corridor with p2."},
            {"ped_id": "p2", "role": "worker", "group_id": "g1",
             "behavior_description": "Crosses the corridor with p1."}],
        "expected_robot_behavior": "Go around the pair."},
    "office_block_and_wave": {
        "scenario_description": "A worker blocks the robot in the office "
                                "corridor, then waves it on.",
        "pedestrians": [{"ped_id": "p1", "role": "worker",
                         "behavior_description": "Blocks the robot, then "
                         "waves it through and leaves."}],
        "expected_robot_behavior": "Wait for the wave, then continue."},
    "office_follower": {
        "scenario_description": "A worker follows the robot down the office "
                                "corridor.",
        "pedestrians": [{"ped_id": "p1", "role": "worker",
                         "behavior_description": "Follows the robot closely."}],
        "expected_robot_behavior": "Keep steady speed."},
    "office_doorway_exit": {
        "scenario_description": "Two people come out of the elevator as the "
                                "robot passes; one stops to stare at it.",
        "pedestrians": [
            {"ped_id": "p1", "role": "worker",
             "behavior_description": "Leaves the elevator and walks away."},
            {"ped_id": "p2", "role": "worker",
             "behavior_description": "Leaves the elevator and stares at the "
             "robot."}],
        "expected_robot_behavior": "Give them space."},
}

NAIVE_PATHS = {
    "warehouse_group_crossing": {
        "robot_nodes": ["dock", "staging", "corridor_w", "corridor_c",
                        "corridor_e", "packing"],
        "pedestrians": [
            {"ped_id": "p1", "nodes": ["charging", "corridor_c", "aisle2_n"],
             "group_id": "g1"},
            {"ped_id": "p2", "nodes": ["charging", "corridor_c", "aisle2_n"],
             "group_id": "g1"}],
        "groups": {"g1": ["p1", "p2"]}},
    "warehouse_follower": {
        "robot_nodes": ["dock", "staging", "corridor_w", "corridor_c",
                        "corridor_e", "packing"],
        "pedestrians": [
            {"ped_id": "p1", "nodes": ["staging", "corridor_w", "corridor_c"]}]},
    "office_block_and_wave": {
        "robot_nodes": ["reception", "corr_w", "corr_c", "corr_e", "meeting"],
        "pedestrians": [{"ped_id": "p1", "nodes": ["kitchen", "corr_c"]}]},
    "office_follower": {
        "robot_nodes": ["reception", "corr_w", "corr_c", "corr_e", "meeting"],
        "pedestrians": [{"ped_id": "p1", "nodes": ["reception", "corr_w"]}]},
}

NAIVE_BTS = {
    "warehouse_group_crossing": {"p1": "<RegularNav/>", "p2": "<RegularNav/>"},
    "office_block_and_wave": {"p1": bt_block_wave(2.0, 3.0)},
}


def texts_for_case(case_id: str, mode: str) -> tuple[list[str], str | None]:
    """(ordered response texts, expected failing stage or None)."""
    key = case_id.split("_", 1)[1]
    if mode == "structured":
        fail = STRUCTURED_FAILS.get(case_id)
        texts = [prose_json("Here is the precise scenario.",
                            corpus_proposal(case_id))]
        if fail and fail[0] == "propose":
            return [fail[1]], "propose"
        if fail and fail[0] == "paths":
            return texts + [fail[1]], "paths"
        texts.append(prose_json("Checking every hop against the edge list:",
                                CORPUS_PATHS[case_id]))
        if fail and fail[0] == "behaviors":
            return texts + [fail[1]], "behaviors"
        for ped in corpus_proposal(case_id)["pedestrians"]:
            texts.append(prose_xml(f"Behavior for {ped['ped_id']}:",
                                   CORPUS_BTS[key][ped["ped_id"]]))
        return texts, None

    fail = NAIVE_FAILS.get(case_id)
    if fail and fail[0] == "propose":
        return [fail[1]], "propose"
    proposal = NAIVE_PROPOSALS[case_id]
    texts = [prose_json("Scenario:", proposal)]
    if fail and fail[0] == "paths":
        return texts + [fail[1]], "paths"
    texts.append(prose_json("Paths:", NAIVE_PATHS[case_id]))
    if fail and fail[0] == "behaviors":
        return texts + [fail[1]], "behaviors"
    for ped in proposal["pedestrians"]:
        texts.append(prose_xml(f"Behavior for {ped['ped_id']}:",
                               NAIVE_BTS[case_id][ped["ped_id"]]))
    return texts, None


def record_corpus(workdir: Path) -> None:
    cases = corpus_cases(INPUTS)
    total = 0
    for mode in ("structured", "naive"):
        for case in cases:
            texts, expect_fail = texts_for_case(case.case_id, mode)
            gw, script = gateway_for(texts)
            outcome = run_case(case, MAPS[case.map_name], gw, mode,
                               workdir / "corpus")
            assert outcome.failed_stage == expect_fail, (
                case.case_id, mode, outcome.failed_stage, expect_fail,
                outcome.error)
            assert not script.texts, (case.case_id, mode, script.texts)
            total += script.served
    print(f"corpus: {total} fixtures")


def main() -> None:
    if FIXTURES.exists():
        shutil.rmtree(FIXTURES)
    FIXTURES.mkdir(parents=True)
    with tempfile.TemporaryDirectory() as td:
        workdir = Path(td)
        record_happy_path(workdir)
        record_edit_fail(workdir)
        record_path_chains(workdir)
        record_bt_chains()
        record_proposal_chain()
        record_corpus(workdir)
    count = len(list(FIXTURES.glob("*.json")))
    print(f"total fixture files: {count}")


if __name__ == "__main__":
    main()
