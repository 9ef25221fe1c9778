"""Regenerate the committed planner-comparison fixture bundles.

Two handcrafted bundles on the corridor map: a single person standing just
off the robot's straight line, and a two-person group straddling it.

Run from the repo root:  python3 tools/make_fixture_bundles.py
"""
from __future__ import annotations

import sys
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from socnavgen.behavior import default_library, parse_bt  # noqa: E402
from socnavgen.bundle import ScenarioBundle  # noqa: E402
from socnavgen.path_gen import PathPlan, PedestrianPath  # noqa: E402
from socnavgen.scenario_proposal import PedestrianSpec, ScenarioSpec  # noqa: E402
from socnavgen.sim.engine import SimConfig  # noqa: E402

CORRIDOR = REPO / "assets" / "maps" / "corridor" / "scenegraph.json"
OUT = REPO / "fixtures" / "bundles"

LIB = default_library()
STAND = "<RegularNav/>"


def write_bundle(name: str, spec: ScenarioSpec, plan: PathPlan,
                 trees: dict[str, str]) -> None:
    bundle = ScenarioBundle(OUT / name)
    bundle.init_from_graph(CORRIDOR)
    bundle.write_spec(spec)
    bundle.write_plan(plan)
    for ped_id, xml in trees.items():
        bundle.write_tree(ped_id, parse_bt(xml, LIB, owner=ped_id), LIB)
    bundle.write_simconfig(SimConfig(max_duration=40.0, seed=7))
    problems = bundle.validate()
    assert not problems, problems
    print(f"wrote {bundle.root}")


def human_on_path() -> None:
    spec = ScenarioSpec(
        scenario_description=(
            "The robot crosses the corridor from the west end to the east end "
            "while a worker stands just north of the midpoint, sorting a cart, "
            "ignoring the robot."),
        pedestrians=[PedestrianSpec(
            ped_id="p1", role="worker",
            behavior_description="Stands beside the midpoint and does not move.")],
        expected_robot_behavior=(
            "The robot should keep a comfortable lateral distance from the "
            "standing worker instead of brushing past."),
        guided=True,
    )
    plan = PathPlan(
        robot_nodes=("west", "mid", "east"),
        pedestrians=(PedestrianPath(ped_id="p1", nodes=("mid_n",)),),
        groups={},
    )
    write_bundle("human_on_path", spec, plan, {"p1": STAND})


def group_crossing() -> None:
    spec = ScenarioSpec(
        scenario_description=(
            "Two colleagues stand talking across the corridor midpoint, one on "
            "each side, while the robot drives from the west end to the east "
            "end."),
        pedestrians=[
            PedestrianSpec(ped_id="p1", role="colleague",
                           behavior_description="Stands north of the midpoint, "
                           "talking with p2.", group_id="g1"),
            PedestrianSpec(ped_id="p2", role="colleague",
                           behavior_description="Stands south of the midpoint, "
                           "talking with p1.", group_id="g1"),
        ],
        expected_robot_behavior=(
            "The robot should go around the talking pair rather than cutting "
            "between them."),
        guided=True,
    )
    plan = PathPlan(
        robot_nodes=("west", "mid", "east"),
        pedestrians=(
            PedestrianPath(ped_id="p1", nodes=("mid_n",), group_id="g1"),
            PedestrianPath(ped_id="p2", nodes=("mid_s",), group_id="g1"),
        ),
        groups={"g1": ("p1", "p2")},
    )
    write_bundle("group_crossing", spec, plan, {"p1": STAND, "p2": STAND})


if __name__ == "__main__":
    human_on_path()
    group_crossing()
