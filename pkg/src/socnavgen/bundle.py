"""Scenario bundles: the on-disk directory packaging one scenario.

Layout: scenegraph.json, scenario.json, paths.json, bt/<ped_id>.xml,
simconfig.json, plus traces/<run>.jsonl and metrics/<run>.json once runs
exist. All JSON is written canonically (2-space indent, insertion order,
trailing newline) so identical pipelines produce byte-identical bundles.
"""
from __future__ import annotations

import json
import shutil
from pathlib import Path

import yaml

from . import scene_graph as sg
from .behavior import BehaviorTree, NodeLibrary, default_library, parse_bt, serialize_bt
from .metrics import MetricsReport, compute_metrics
from .path_gen import PathPlan, plan_from_doc, plan_to_doc, plan_to_world, validate_plan
from .scenario_proposal import ScenarioSpec, spec_from_doc, spec_to_doc
from .sim.engine import SimConfig, SimEngine
from .sim.planners import RobotPlanner
from .sim.trace import SimTrace
from .sim.world import WorldModel

GRAPH_FILE = "scenegraph.json"
SCENARIO_FILE = "scenario.json"
PATHS_FILE = "paths.json"
SIMCONFIG_FILE = "simconfig.json"
BT_DIR = "bt"
TRACES_DIR = "traces"
METRICS_DIR = "metrics"


class BundleInvalid(Exception):
    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


def write_json(path: str | Path, doc: dict) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n",
                          encoding="utf-8")


def read_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


class ScenarioBundle:
    def __init__(self, root: str | Path):
        self.root = Path(root)

    @property
    def name(self) -> str:
        return self.root.name

    def path(self, *parts: str) -> Path:
        return self.root.joinpath(*parts)

    # -- initialization ----------------------------------------------------

    def init_from_graph(self, graph_file: str | Path) -> sg.SceneGraph:
        """Create the bundle directory and pull in the graph plus its map
        image(s); image_path is rewritten to the copied basename."""
        g = sg.load_scene_graph(graph_file)
        self.root.mkdir(parents=True, exist_ok=True)
        src_dir = Path(graph_file).resolve().parent
        image_src = Path(g.meta.image_path)
        if not image_src.is_absolute():
            image_src = src_dir / image_src
        if not image_src.exists():
            raise BundleInvalid([f"map image {image_src} not found"])
        shutil.copyfile(image_src, self.root / image_src.name)
        annotated = image_src.with_name(image_src.stem + "_annotated.png")
        if annotated.exists():
            shutil.copyfile(annotated, self.root / annotated.name)
        meta = sg.MapMeta(
            image_path=image_src.name,
            resolution=g.meta.resolution,
            origin=g.meta.origin,
            image_width=g.meta.image_width,
            image_height=g.meta.image_height,
            occupied_threshold=g.meta.occupied_threshold,
        )
        g = sg.SceneGraph(meta=meta, nodes=g.nodes, edges=g.edges,
                          schema_note=g.schema_note)
        self.write_graph(g)
        return g

    # -- readers -------------------------------------------------------------

    def load_graph(self) -> sg.SceneGraph:
        return sg.load_scene_graph(self.path(GRAPH_FILE))

    def load_spec(self) -> ScenarioSpec:
        return spec_from_doc(read_json(self.path(SCENARIO_FILE)))

    def load_plan(self, g: sg.SceneGraph | None = None,
                  spec: ScenarioSpec | None = None) -> PathPlan:
        g = g or self.load_graph()
        spec = spec or self.load_spec()
        return plan_from_doc(read_json(self.path(PATHS_FILE)), g, spec,
                             fill_encounters=False)

    def load_trees(self, lib: NodeLibrary | None = None) -> dict[str, BehaviorTree]:
        lib = lib or default_library()
        trees = {}
        for xml_file in sorted(self.path(BT_DIR).glob("*.xml")):
            ped_id = xml_file.stem
            trees[ped_id] = parse_bt(xml_file.read_text(encoding="utf-8"), lib,
                                     owner=ped_id)
        return trees

    def load_simconfig(self) -> SimConfig:
        path = self.path(SIMCONFIG_FILE)
        if not path.exists():
            return SimConfig()
        return SimConfig.from_doc(read_json(path))

    def map_image_path(self) -> Path:
        g = self.load_graph()
        return self.path(g.meta.image_path)

    def prompt_image_path(self) -> Path | None:
        """Annotated map when present, otherwise the plain map image."""
        plain = self.map_image_path()
        annotated = plain.with_name(plain.stem + "_annotated.png")
        if annotated.exists():
            return annotated
        return plain if plain.exists() else None

    # -- writers -------------------------------------------------------------

    def write_graph(self, g: sg.SceneGraph) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        sg.save_scene_graph(g, self.path(GRAPH_FILE))

    def write_spec(self, spec: ScenarioSpec) -> None:
        write_json(self.path(SCENARIO_FILE), spec_to_doc(spec))

    def write_plan(self, plan: PathPlan) -> None:
        write_json(self.path(PATHS_FILE), plan_to_doc(plan))

    def write_simconfig(self, cfg: SimConfig) -> None:
        write_json(self.path(SIMCONFIG_FILE), cfg.to_doc())

    def write_tree(self, ped_id: str, tree: BehaviorTree,
                   lib: NodeLibrary | None = None) -> None:
        self.path(BT_DIR).mkdir(parents=True, exist_ok=True)
        self.path(BT_DIR, f"{ped_id}.xml").write_text(
            serialize_bt(tree, lib), encoding="utf-8"
        )

    def save_run(self, run_id: str, trace: SimTrace, report: MetricsReport) -> None:
        self.path(TRACES_DIR).mkdir(parents=True, exist_ok=True)
        self.path(METRICS_DIR).mkdir(parents=True, exist_ok=True)
        trace.save(self.path(TRACES_DIR, f"{run_id}.jsonl"))
        write_json(self.path(METRICS_DIR, f"{run_id}.json"), report.to_doc())

    def list_runs(self) -> list[str]:
        if not self.path(TRACES_DIR).exists():
            return []
        return sorted(p.stem for p in self.path(TRACES_DIR).glob("*.jsonl"))

    # -- validation ----------------------------------------------------------

    def validate(self) -> list[str]:
        """Cross-file consistency check; empty list means runnable."""
        problems: list[str] = []
        if not self.root.is_dir():
            return [f"bundle directory {self.root} does not exist"]
        for required in (GRAPH_FILE, SCENARIO_FILE, PATHS_FILE):
            if not self.path(required).exists():
                problems.append(f"missing {required}")
        if problems:
            return problems
        try:
            g = self.load_graph()
        except sg.SceneGraphError as exc:
            return [f"{GRAPH_FILE}: {exc}"]
        if not self.path(g.meta.image_path).exists():
            problems.append(f"map image {g.meta.image_path} missing from bundle")
        try:
            spec = self.load_spec()
        except (ValueError, KeyError) as exc:
            return problems + [f"{SCENARIO_FILE}: {exc}"]
        try:
            plan = self.load_plan(g, spec)
        except (ValueError, KeyError) as exc:
            return problems + [f"{PATHS_FILE}: {exc}"]
        problems.extend(validate_plan(plan, g, spec))
        lib = default_library()
        for ped in spec.pedestrians:
            bt_path = self.path(BT_DIR, f"{ped.ped_id}.xml")
            if not bt_path.exists():
                problems.append(f"missing behavior tree for pedestrian {ped.ped_id}")
                continue
            try:
                parse_bt(bt_path.read_text(encoding="utf-8"), lib, owner=ped.ped_id)
            except Exception as exc:  # noqa: BLE001
                problems.append(f"bt/{ped.ped_id}.xml: {exc}")
        return problems


def run_scenario(bundle: ScenarioBundle, planner: RobotPlanner,
                 cfg: SimConfig | None = None, run_id: str | None = None,
                 save: bool = True) -> tuple[SimTrace, MetricsReport]:
    """Validate, simulate and score one bundle run."""
    violations = bundle.validate()
    if violations:
        raise BundleInvalid(violations)
    g = bundle.load_graph()
    spec = bundle.load_spec()
    plan = bundle.load_plan(g, spec)
    trees = bundle.load_trees()
    cfg = cfg or bundle.load_simconfig()
    world = WorldModel.load(g.meta, base_dir=bundle.root)
    engine = SimEngine(world, plan, plan_to_world(plan, g), trees, planner, cfg,
                       bundle_id=bundle.name)
    trace = engine.run()
    report = compute_metrics(trace)
    if save:
        run_id = run_id or f"{trace.config['planner']}_seed{cfg.seed}"
        bundle.save_run(run_id, trace, report)
    return trace, report


def export_hunav(bundle: ScenarioBundle, out_dir: str | Path) -> Path:
    """Write the agents YAML document plus behavior-tree XML copies.

    One entry per pedestrian with its world-frame goal list and a reference
    to the copied BT file, in the loader-parameter shape external human-nav
    simulators consume.
    """
    violations = bundle.validate()
    if violations:
        raise BundleInvalid(violations)
    g = bundle.load_graph()
    spec = bundle.load_spec()
    plan = bundle.load_plan(g, spec)
    cfg = bundle.load_simconfig()
    out = Path(out_dir)
    (out / "bt").mkdir(parents=True, exist_ok=True)

    group_index = {gid: i + 1 for i, gid in enumerate(sorted(plan.groups))}
    agents: dict = {}
    ped_ids = []
    for i, ped in enumerate(plan.pedestrians, start=1):
        wps = [g.node(n).world for n in ped.nodes]
        goal_names = [f"g{j}" for j in range(len(wps))]
        entry: dict = {
            "id": i,
            "skin": 0,
            "group_id": group_index.get(ped.group_id, -1),
            "max_vel": cfg.ped_desired_speed,
            "radius": cfg.ped_radius,
            "behavior_file": f"bt/{ped.ped_id}.xml",
            "init_pose": {"x": wps[0][0], "y": wps[0][1], "z": 0.0, "h": 0.0},
            "goal_radius": cfg.arrival_radius,
            "cyclic_goals": False,
            "goals": goal_names,
        }
        for name, (wx, wy) in zip(goal_names, wps):
            entry[name] = {"x": wx, "y": wy, "h": 0.0}
        agents[ped.ped_id] = entry
        ped_ids.append(ped.ped_id)
        shutil.copyfile(bundle.path(BT_DIR, f"{ped.ped_id}.xml"),
                        out / "bt" / f"{ped.ped_id}.xml")

    doc = {
        "hunav_loader": {
            "ros__parameters": {
                "map": bundle.name,
                "publish_people": True,
                "agents": ped_ids,
                **agents,
            }
        }
    }
    agents_path = out / "agents.yaml"
    agents_path.write_text(yaml.safe_dump(doc, sort_keys=False), encoding="utf-8")
    return agents_path
