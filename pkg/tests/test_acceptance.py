"""Acceptance suite: one test per release criterion, at pinned tolerances.

Run with `pytest tests/test_acceptance.py -v -s` to see one line per
criterion. Everything here replays committed fixtures or runs the
deterministic simulator; nothing touches the network.
"""
from __future__ import annotations

import contextlib
import math
import random
import shutil
import tempfile
import time
from pathlib import Path

import pytest

from simhelpers import blank_world, graph_on, make_engine, make_plan
from test_behavior import random_tree
from test_scene_graph import brute_force_continuous, random_graph
from socnavgen.behavior import (
    BadParams,
    BehaviorTree,
    MultipleRoots,
    UnknownNode,
    XmlError,
    default_library,
    generate_bt,
    parse_bt,
    serialize_bt,
)
from socnavgen.bundle import ScenarioBundle, run_scenario
from socnavgen.corpus import (
    compare_modes,
    corpus_cases,
    load_corpus_inputs,
    metadata_from_doc,
)
from socnavgen.llm_gateway import (
    ChatRequest,
    ChatResponse,
    CostModel,
    LLMGateway,
    RetriesExhausted,
)
from socnavgen.metrics import (
    compute_metrics,
    group_space_intrusion,
    personal_space_intrusion,
    point_in_inflated_hull,
)
from socnavgen.path_gen import generate_paths, validate_plan
from socnavgen.pipeline import run_pipeline, stage_edit_paths
from socnavgen.scenario_proposal import PedestrianSpec, spec_from_doc
from socnavgen.scene_graph import is_path_continuous
from socnavgen.sim.engine import SimConfig
from socnavgen.sim.planners import (
    FrozenPlanner,
    ScriptedArrivalPlanner,
    make_planner,
)
from socnavgen.sim.sfm import Neighbor, SfmParams, sfm_accel

REPO = Path(__file__).resolve().parents[1]
INPUTS = load_corpus_inputs(REPO / "fixtures" / "corpus_inputs.json")
MAPS = {n: REPO / "assets" / "maps" / n / "scenegraph.json"
        for n in ("warehouse", "office")}
LIB = default_library()


@contextlib.contextmanager
def criterion(name: str):
    try:
        yield
    except BaseException:
        print(f"[ACCEPTANCE] {name}: FAIL")
        raise
    print(f"[ACCEPTANCE] {name}: PASS")


def offline_gateway() -> LLMGateway:
    def no_net(req: ChatRequest) -> ChatResponse:
        raise AssertionError("acceptance must run with zero network access")

    return LLMGateway(mode="replay", fixtures_dir=REPO / "fixtures" / "llm",
                      transport=no_net)


def assert_no_tunneling(trace) -> None:
    prev = None
    for rec in trace.ticks:
        if prev is not None:
            for a0, a1 in zip(prev.agents, rec.agents):
                step = math.hypot(a1.x - a0.x, a1.y - a0.y)
                cap = 1.5 * max(a0.desired_speed, a1.desired_speed) * 0.05
                assert step <= cap + 1e-9, (rec.tick, a1.id, step, cap)
        prev = rec


def test_path_validation_oracle():
    with criterion("path-validation oracle (200 graphs, 100% agreement, <5s)"):
        started = time.monotonic()
        rng = random.Random(1234)
        checked = 0
        for _ in range(200):
            g, ids, pairs = random_graph(rng)
            adj = {i: list(g.neighbors(i)) for i in ids}
            start = rng.choice(ids)
            walk = [start]
            for _ in range(rng.randint(1, 15)):
                nbrs = adj[walk[-1]]
                if not nbrs:
                    break
                walk.append(rng.choice(nbrs))
            broken = list(walk)
            if len(broken) >= 2:
                # Injected discontinuity: replace one hop with a random node.
                k = rng.randrange(1, len(broken))
                broken[k] = rng.choice(ids)
            shuffled = rng.sample(ids, min(len(ids), rng.randint(2, 10)))
            for path in (walk, broken, shuffled):
                got, offending = is_path_continuous(g, path)
                assert got == brute_force_continuous(path, pairs)
                if not got:
                    a, b = offending
                    assert not g.has_edge(a, b)
                checked += 1
        assert checked == 600
        assert time.monotonic() - started < 5.0


def test_repair_loop_fixture_chains():
    with criterion("repair loop (chains fixed by attempt<=3, exhaustion at 3)"):
        gw = offline_gateway()
        # Discontinuous-path chain repaired on the second attempt.
        chain = INPUTS["chains"]["path_repair"]
        spec = spec_from_doc(chain["spec"])
        with tempfile.TemporaryDirectory() as td:
            bundle = ScenarioBundle(Path(td) / "b")
            bundle.init_from_graph(MAPS[chain["map"]])
            g = bundle.load_graph()
            plan = generate_paths(g, spec, gw, max_attempts=3,
                                  map_image=str(bundle.prompt_image_path()))
            assert validate_plan(plan, g, spec) == []
        # Bad-BT chain repaired on the second attempt.
        ped = PedestrianSpec(**INPUTS["chains"]["bt_repair"]["ped"])
        tree = generate_bt(ped, LIB, gw, max_attempts=3)
        assert tree.owner == ped.ped_id
        # Always-bad chains exhaust at exactly attempt 3.
        chain = INPUTS["chains"]["path_always_bad"]
        spec = spec_from_doc(chain["spec"])
        with tempfile.TemporaryDirectory() as td:
            bundle = ScenarioBundle(Path(td) / "b")
            bundle.init_from_graph(MAPS[chain["map"]])
            g = bundle.load_graph()
            with pytest.raises(RetriesExhausted) as exc:
                generate_paths(g, spec, gw, max_attempts=3,
                               map_image=str(bundle.prompt_image_path()))
            assert len(exc.value.errors) == 3
        ped = PedestrianSpec(**INPUTS["chains"]["bt_always_bad"]["ped"])
        with pytest.raises(RetriesExhausted) as exc:
            generate_bt(ped, LIB, gw, max_attempts=3)
        assert len(exc.value.errors) == 3


def test_structured_vs_naive_prompting():
    with criterion("structured vs naive (gap >= 20 percentage points)"):
        gw = offline_gateway()
        with tempfile.TemporaryDirectory() as td:
            result = compare_modes(corpus_cases(INPUTS), MAPS, gw, td)
        structured = result["rates"]["structured"]
        naive = result["rates"]["naive"]
        assert structured > naive
        assert structured - naive >= 0.20


def test_token_budget_and_cost():
    with criterion("token budget in [10k, 20k], pipeline cost < $0.30"):
        gw = offline_gateway()
        meta = metadata_from_doc(INPUTS["happy_path"]["metadata"])
        with tempfile.TemporaryDirectory() as td:
            run_pipeline(MAPS["warehouse"], meta, Path(td) / "wh", gw, seed=7)
        assert 10_000 <= gw.input_tokens <= 20_000, gw.input_tokens
        cost = CostModel().cost(gw.input_tokens, gw.output_tokens)
        assert cost < 0.30, cost


def test_bt_round_trip_and_fuzz():
    with criterion("BT round-trip (fixtures + 1000 random; fuzz rejected)"):
        # Committed fixture trees.
        fixture_xmls = sorted((REPO / "fixtures" / "bundles").rglob("*.xml"))
        assert fixture_xmls
        for xml_file in fixture_xmls:
            t = parse_bt(xml_file.read_text(encoding="utf-8"), LIB)
            assert parse_bt(serialize_bt(t, LIB), LIB) == t
        # 1000 random valid trees.
        rng = random.Random(31337)
        for _ in range(1000):
            t = BehaviorTree(root=random_tree(rng))
            xml = serialize_bt(t, LIB)
            assert parse_bt(xml, LIB) == t
        # Invalid trees rejected with the correct error class, every time.
        cases = [
            ("<Sequence><Dance/></Sequence>", UnknownNode),
            ("<Prance/>", UnknownNode),
            ('<WaitForGesture code="two" timeout_s="5"/>', BadParams),
            ('<StopAndWait/>', BadParams),
            ('<MakeGesture code="2"/>', BadParams),
            ("<Fallback></Fallback>", BadParams),
            ('<RegularNav turbo="1"/>', BadParams),
            ('<TimeExpired secs="1"><RegularNav/></TimeExpired>', BadParams),
            ("<RegularNav/><RegularNav/>", MultipleRoots),
            ("<Sequence><RegularNav/>", XmlError),
            ("not xml at all", XmlError),
        ]
        for xml, err in cases:
            with pytest.raises(err):
                parse_bt(xml, LIB)


def _fresh_bundle(name: str, td: Path) -> ScenarioBundle:
    return ScenarioBundle(
        shutil.copytree(REPO / "fixtures" / "bundles" / name, td / name))


def test_simulator_determinism():
    with criterion("determinism (10 identical trace hashes, <30s)"):
        started = time.monotonic()
        gw = offline_gateway()
        meta = metadata_from_doc(INPUTS["happy_path"]["metadata"])
        with tempfile.TemporaryDirectory() as td:
            bundle = run_pipeline(MAPS["warehouse"], meta, Path(td) / "wh", gw,
                                  seed=7)
            hashes = set()
            trace = None
            for _ in range(10):
                trace, _ = run_scenario(bundle, make_planner("baseline"),
                                        save=False)
                hashes.add(trace.sha256())
            assert len(hashes) == 1, hashes
            assert_no_tunneling(trace)
        assert time.monotonic() - started < 30.0


def test_encounter_synchronization():
    with criterion("encounter sync (gap<=2.0s in >=95/100; exact timeout)"):
        def lattice(v: float) -> float:
            return round(v / 0.05) * 0.05

        rng = random.Random(2024)
        within = 0
        for seed in range(100):
            d = lattice(rng.uniform(2.5, 6.5))
            arrive = rng.uniform(8.0, 14.0)
            world = blank_world(16.0, 16.0)
            g = graph_on(world, {"west": (-6.0, 0.0), "mid": (0.0, 0.0),
                                 "north": (0.0, d)},
                         [("west", "mid"), ("mid", "north")])
            plan = make_plan(["west", "mid"], [{
                "ped_id": "p1", "nodes": ["north", "mid"],
                "encounter_node": "mid"}])
            cfg = SimConfig(max_duration=30.0, seed=seed, robot_max_speed=2.5)
            eng = make_engine(world, g, plan,
                              ScriptedArrivalPlanner(arrive_at=arrive), cfg)
            eng.run()
            sync = eng.syncs["p1"]
            if sync.ped_reached_tick is None or sync.robot_reached_tick is None:
                continue
            gap = abs(sync.ped_reached_tick - sync.robot_reached_tick) * cfg.dt
            if gap <= cfg.encounter_tolerance:
                within += 1
        assert within >= 95, within

        # Frozen robot: unconditional release after exactly T_max of holding.
        world = blank_world(16.0, 16.0)
        g = graph_on(world, {"west": (-6.0, 0.0), "mid": (0.0, 0.0),
                             "north": (0.0, 4.0)},
                     [("west", "mid"), ("mid", "north")])
        plan = make_plan(["west", "mid"], [{
            "ped_id": "p1", "nodes": ["north", "mid"],
            "encounter_node": "mid"}])
        cfg = SimConfig(max_duration=40.0)
        eng = make_engine(world, g, plan, FrozenPlanner(), cfg)
        trace = eng.run()
        releases = trace.events("release")
        assert len(releases) == 1
        tick, ev = releases[0]
        assert ev["cause"] == "timeout"
        held_ticks = int(round(cfg.hold_timeout / cfg.dt))
        assert tick == held_ticks + 1
        start = trace.config["agents_initial"][1]
        for rec in trace.ticks[:held_ticks]:
            ped = rec.agents[1]
            assert (ped.x, ped.y) == (start["x"], start["y"])


def test_sfm_sanity():
    with criterion("SFM sanity (goal zero, mirror exact, no tunneling)"):
        params = SfmParams()
        assert sfm_accel(pos=(3.0, -2.0), vel=(0.0, 0.0), goal=(3.0, -2.0),
                         desired_speed=1.0, radius=0.3, neighbors=[],
                         world=None, params=params) == (0.0, 0.0)
        a1 = sfm_accel(pos=(-1.0, 0.0), vel=(1.2, 0.0), goal=(6.0, 0.0),
                       desired_speed=1.2, radius=0.3,
                       neighbors=[Neighbor(x=1.0, y=0.0, radius=0.3)],
                       world=None, params=params)
        a2 = sfm_accel(pos=(1.0, 0.0), vel=(-1.2, 0.0), goal=(-6.0, 0.0),
                       desired_speed=1.2, radius=0.3,
                       neighbors=[Neighbor(x=-1.0, y=0.0, radius=0.3)],
                       world=None, params=params)
        assert a1[0] == -a2[0] and a1[1] == a2[1] == 0.0
        # No tunneling over the committed fixture-bundle runs.
        with tempfile.TemporaryDirectory() as td:
            for name in ("human_on_path", "group_crossing"):
                bundle = _fresh_bundle(name, Path(td))
                for planner in ("baseline", "social", "group"):
                    trace, _ = run_scenario(bundle, make_planner(planner),
                                            save=False)
                    assert_no_tunneling(trace)


def test_planner_separation():
    with criterion("planner separation (social > baseline; group GSI = 0)"):
        with tempfile.TemporaryDirectory() as td:
            bundle = _fresh_bundle("human_on_path", Path(td))
            _, base = run_scenario(bundle, make_planner("baseline"), save=False)
            _, social = run_scenario(bundle, make_planner("social"), save=False)
            assert social.min_distance_to_human > base.min_distance_to_human
        with tempfile.TemporaryDirectory() as td:
            bundle = _fresh_bundle("group_crossing", Path(td))
            _, base = run_scenario(bundle, make_planner("baseline"), save=False)
            _, group = run_scenario(bundle, make_planner("group"), save=False)
            assert base.group_space_intrusion > 0.0
            assert group.group_space_intrusion == 0.0


def test_metrics_oracles():
    with criterion("metrics oracles (hull brute force; monotone; 0.37 exact)"):
        shapely = pytest.importorskip("shapely.geometry")
        rng = random.Random(77)
        for _ in range(1000):
            members = [(rng.uniform(-3, 3), rng.uniform(-3, 3))
                       for _ in range(rng.randint(2, 5))]
            point = (rng.uniform(-4, 4), rng.uniform(-4, 4))
            inflation = 0.5
            hull = shapely.MultiPoint(members).convex_hull
            if abs(hull.distance(shapely.Point(point)) - inflation) <= 1e-9:
                continue
            assert point_in_inflated_hull(point, members, inflation) == \
                hull.buffer(inflation).covers(shapely.Point(point))

        from test_metrics import make_trace

        rows = [{"p1": (0.5, 0.0)} if i < 37 else {"p1": (5.0, 0.0)}
                for i in range(100)]
        trace = make_trace([(0, 0)] * 100, rows)
        assert personal_space_intrusion(trace) == 0.37
        rng = random.Random(5)
        rows = [{"p1": (rng.uniform(0, 3), rng.uniform(0, 3))}
                for _ in range(150)]
        trace = make_trace([(1.5, 1.5)] * 150, rows)
        values = [personal_space_intrusion(trace, r)
                  for r in (0.2, 0.5, 1.0, 1.5, 2.5, 4.0)]
        assert values == sorted(values)
        assert group_space_intrusion(trace, groups={}) == 0.0


def test_end_to_end_replay():
    with criterion("end-to-end replay (<60s, zero network, clean bundle)"):
        started = time.monotonic()
        gw = offline_gateway()
        meta = metadata_from_doc(INPUTS["happy_path"]["metadata"])
        with tempfile.TemporaryDirectory() as td:
            bundle = run_pipeline(MAPS["warehouse"], meta, Path(td) / "wh", gw,
                                  seed=7)
            assert bundle.validate() == []
            result = stage_edit_paths(
                bundle, INPUTS["happy_path"]["edit_instruction"], gw)
            assert result.applied
            assert len(result.plan.robot_nodes) > 6
            trace, report = run_scenario(bundle, make_planner("baseline"))
            assert trace.termination_reason == "goal_reached"
            assert report.success
            assert compute_metrics(trace) == report
            # Replay-mode artifacts exist and validate.
            assert bundle.validate() == []
            assert (bundle.root / "traces" / "baseline_seed7.jsonl").exists()
        assert time.monotonic() - started < 60.0
