"""Scene-graph path assignment for the robot and every pedestrian.

Validation is the heart of this module: model output is only accepted when
every path is continuous on the graph, encounter nodes sit on both relevant
paths, and group bookkeeping is consistent. Failure messages always name the
exact offending pair or id so the re-query can be specific.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .llm_gateway import (
    ChatRequest,
    ChatResponse,
    ImageAttachment,
    LLMGateway,
    RetriesExhausted,
    extract_structured,
)
from .scenario_proposal import ScenarioSpec, load_prompt_text
from .scene_graph import SceneGraph, is_path_continuous

PATH_KEYS = ["robot_nodes", "pedestrians"]


class InputError(Exception):
    pass


@dataclass(frozen=True)
class PedestrianPath:
    ped_id: str
    nodes: tuple[str, ...]
    group_id: str | None = None
    encounter_node: str | None = None
    hold_node: str | None = None

    def hold_or_default(self) -> str:
        return self.hold_node if self.hold_node is not None else self.nodes[0]


@dataclass(frozen=True)
class PathPlan:
    robot_nodes: tuple[str, ...]
    pedestrians: tuple[PedestrianPath, ...]
    groups: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def pedestrian(self, ped_id: str) -> PedestrianPath:
        for p in self.pedestrians:
            if p.ped_id == ped_id:
                return p
        raise KeyError(ped_id)


@dataclass(frozen=True)
class WorldPlan:
    robot_waypoints: tuple[tuple[float, float], ...]
    pedestrian_waypoints: dict[str, tuple[tuple[float, float], ...]]
    encounter_points: dict[str, tuple[float, float]]


@dataclass(frozen=True)
class EditResult:
    plan: PathPlan
    applied: bool
    attempts: int
    errors: tuple[str, ...] = ()


def _check_path(g: SceneGraph, nodes: list[str], label: str) -> list[str]:
    problems = []
    if not nodes:
        return [f"{label} has no nodes"]
    for node_id in nodes:
        if not g.has_node(node_id):
            problems.append(f"{label} uses unknown node {node_id}")
    if problems:
        return problems
    ok, pair = is_path_continuous(g, nodes)
    if not ok:
        problems.append(
            f"{label} is discontinuous: no edge between {pair[0]} and {pair[1]}"
        )
    return problems


def validate_plan(plan: PathPlan, g: SceneGraph, spec: ScenarioSpec) -> list[str]:
    """Every violation in one pass; empty list means the plan is sound."""
    problems = _check_path(g, list(plan.robot_nodes), "robot path")
    if len(plan.robot_nodes) < 2:
        problems.append("robot path needs at least 2 nodes")

    want = {p.ped_id for p in spec.pedestrians}
    got = {p.ped_id for p in plan.pedestrians}
    for missing in sorted(want - got):
        problems.append(f"no path given for pedestrian {missing}")
    for extra in sorted(got - want):
        problems.append(f"path given for unknown pedestrian {extra}")
    if len(got) != len(plan.pedestrians):
        problems.append("duplicate pedestrian path entries")

    for ped in plan.pedestrians:
        label = f"path for pedestrian {ped.ped_id}"
        problems.extend(_check_path(g, list(ped.nodes), label))
        if ped.encounter_node is not None:
            if ped.encounter_node not in ped.nodes:
                problems.append(
                    f"encounter node {ped.encounter_node} for {ped.ped_id} "
                    "is not on that pedestrian's path"
                )
            if ped.encounter_node not in plan.robot_nodes:
                problems.append(
                    f"encounter node {ped.encounter_node} for {ped.ped_id} "
                    "is not on the robot's path"
                )
        if ped.hold_node is not None and ped.nodes and ped.hold_node not in ped.nodes:
            problems.append(
                f"hold node {ped.hold_node} for {ped.ped_id} is not on its path"
            )

    by_id = {p.ped_id: p for p in plan.pedestrians}
    for gid, members in plan.groups.items():
        if len(members) < 2:
            problems.append(f"group {gid} needs at least 2 members")
        for m in members:
            if m not in by_id:
                problems.append(f"group {gid} lists unknown pedestrian {m}")
            elif by_id[m].group_id != gid:
                problems.append(
                    f"pedestrian {m} is listed in group {gid} but carries "
                    f"group_id {by_id[m].group_id!r}"
                )
    for ped in plan.pedestrians:
        if ped.group_id is not None and ped.ped_id not in plan.groups.get(ped.group_id, ()):
            problems.append(
                f"pedestrian {ped.ped_id} carries group_id {ped.group_id} "
                "but is missing from the groups table"
            )
    return problems


def _default_encounter(robot_nodes: tuple[str, ...], ped_nodes: tuple[str, ...]) -> str | None:
    robot_set = set(robot_nodes)
    for node in ped_nodes:
        if node in robot_set:
            return node
    return None


def plan_from_doc(doc: dict, g: SceneGraph, spec: ScenarioSpec,
                  fill_encounters: bool = True) -> PathPlan:
    """Build a validated PathPlan from a parsed document.

    Omitted encounter nodes default to the first node shared with the robot
    path (when one exists), so first-cut model output stays usable.
    """
    robot_nodes = tuple(str(n) for n in doc.get("robot_nodes", []))
    peds = []
    for i, entry in enumerate(doc.get("pedestrians", [])):
        if not isinstance(entry, dict) or "ped_id" not in entry or "nodes" not in entry:
            raise ValueError(f"pedestrians[{i}] must be an object with ped_id and nodes")
        nodes = tuple(str(n) for n in entry["nodes"])
        encounter = entry.get("encounter_node")
        if encounter is None and fill_encounters:
            encounter = _default_encounter(robot_nodes, nodes)
        peds.append(PedestrianPath(
            ped_id=str(entry["ped_id"]),
            nodes=nodes,
            group_id=(str(entry["group_id"]) if entry.get("group_id") else None),
            encounter_node=(str(encounter) if encounter else None),
            hold_node=(str(entry["hold_node"]) if entry.get("hold_node") else None),
        ))
    groups_doc = doc.get("groups") or {}
    groups = {str(gid): tuple(str(m) for m in members)
              for gid, members in groups_doc.items()}
    if not groups:
        # Groups may be implied by per-pedestrian group ids alone.
        implied: dict[str, list[str]] = {}
        for p in peds:
            if p.group_id is not None:
                implied.setdefault(p.group_id, []).append(p.ped_id)
        groups = {gid: tuple(ms) for gid, ms in implied.items()}
    plan = PathPlan(robot_nodes=robot_nodes, pedestrians=tuple(peds), groups=groups)
    problems = validate_plan(plan, g, spec)
    if problems:
        raise ValueError("; ".join(problems))
    return plan


def plan_to_doc(plan: PathPlan) -> dict:
    return {
        "robot_nodes": list(plan.robot_nodes),
        "pedestrians": [
            {"ped_id": p.ped_id, "nodes": list(p.nodes), "group_id": p.group_id,
             "encounter_node": p.encounter_node, "hold_node": p.hold_node}
            for p in plan.pedestrians
        ],
        "groups": {gid: list(ms) for gid, ms in plan.groups.items()},
    }


def graph_listing(g: SceneGraph) -> str:
    """Textual serialization of the graph: nodes, then each edge exactly once."""
    lines = ["Nodes:"]
    for n in g.nodes:
        lines.append(
            f"- {n.id}: {n.name} ({n.semantic_type}) at "
            f"({n.world[0]:.2f}, {n.world[1]:.2f}) m"
        )
    lines.append("Edges (undirected, each listed once):")
    for e in g.edges:
        lines.append(f"- {e.endpoints[0]} -- {e.endpoints[1]} ({e.semantic_type})")
    return "\n".join(lines)


def build_path_prompt(g: SceneGraph, spec: ScenarioSpec,
                      examples_text: str | None = None,
                      map_image: str | None = None,
                      model_id: str = "", naive: bool = False) -> ChatRequest:
    from .llm_gateway import DEFAULT_MODEL

    ped_lines = "\n".join(
        f"- {p.ped_id} ({p.role}): {p.behavior_description}"
        + (f" [group {p.group_id}]" if p.group_id else "")
        for p in spec.pedestrians
    )
    if naive:
        system = ("You plan routes for a robot and pedestrians on a named-place "
                  "graph. Answer with a fenced json block containing robot_nodes "
                  "and pedestrians (ped_id, nodes).")
        user = (f"{graph_listing(g)}\n\nScenario: {spec.scenario_description}\n\n"
                f"Pedestrians:\n{ped_lines}\n\nGive the paths.")
        return ChatRequest(system_prompt=system, turns=(("user", user),),
                           model_id=model_id or DEFAULT_MODEL)

    system = load_prompt_text("paths_system.txt")
    examples = examples_text if examples_text is not None else load_prompt_text(
        "paths_examples.txt"
    )
    user = (
        f"{examples}\n\n"
        "Now the real location and scenario.\n\n"
        f"{graph_listing(g)}\n\n"
        f"Scenario description: {spec.scenario_description}\n\n"
        f"Pedestrians to route:\n{ped_lines}\n\n"
        "Expected robot behavior (context only): "
        f"{spec.expected_robot_behavior}\n\n"
        "Reply with the single fenced json block described in the rules "
        "(robot_nodes, pedestrians, groups, rationale)."
    )
    image = None
    if map_image:
        image = ImageAttachment(
            path=map_image,
            caption="Annotated location map; labelled dots are scene-graph nodes.",
        )
    return ChatRequest(system_prompt=system, turns=(("user", user),), image=image,
                       model_id=model_id or DEFAULT_MODEL)


def _plan_validator(g: SceneGraph, spec: ScenarioSpec):
    def validate(resp: ChatResponse) -> PathPlan:
        doc = extract_structured(resp, PATH_KEYS)
        return plan_from_doc(doc, g, spec)
    return validate


def generate_paths(g: SceneGraph, spec: ScenarioSpec, gateway: LLMGateway,
                   max_attempts: int = 3, map_image: str | None = None,
                   model_id: str = "", naive: bool = False) -> PathPlan:
    req = build_path_prompt(g, spec, map_image=map_image, model_id=model_id,
                            naive=naive)
    plan, _ = gateway.query_with_repair(req, _plan_validator(g, spec), max_attempts)
    return plan


def build_edit_prompt(plan: PathPlan, instruction: str, g: SceneGraph,
                      spec: ScenarioSpec, model_id: str = "") -> ChatRequest:
    from .llm_gateway import DEFAULT_MODEL

    system = load_prompt_text("paths_system.txt")
    user = (
        f"{graph_listing(g)}\n\n"
        f"Scenario description: {spec.scenario_description}\n\n"
        "Current accepted path plan:\n"
        "```json\n" + json.dumps(plan_to_doc(plan), indent=2) + "\n```\n\n"
        f"Edit request from the user: {instruction}\n\n"
        "Apply the edit with the smallest change that satisfies it, keep "
        "everything else as close to the current plan as possible, and reply "
        "with the full updated plan as a single fenced json block "
        "(robot_nodes, pedestrians, groups, rationale)."
    )
    return ChatRequest(system_prompt=system, turns=(("user", user),),
                       model_id=model_id or DEFAULT_MODEL)


def edit_paths(plan: PathPlan, instruction: str, g: SceneGraph, spec: ScenarioSpec,
               gateway: LLMGateway, max_attempts: int = 3,
               model_id: str = "") -> EditResult:
    """Natural-language path edit; transactional on failure.

    The input plan is returned untouched when every attempt fails, so callers
    can always keep rendering the last good plan.
    """
    if not instruction.strip():
        raise InputError("edit instruction is empty")
    req = build_edit_prompt(plan, instruction, g, spec, model_id=model_id)
    try:
        new_plan, attempts = gateway.query_with_repair(
            req, _plan_validator(g, spec), max_attempts
        )
    except RetriesExhausted as exc:
        return EditResult(plan=plan, applied=False, attempts=max_attempts,
                          errors=tuple(exc.errors))
    return EditResult(plan=new_plan, applied=True, attempts=attempts)


def plan_to_world(plan: PathPlan, g: SceneGraph) -> WorldPlan:
    """Ground node sequences in world meters, preserving order and length."""
    robot = tuple(g.node(n).world for n in plan.robot_nodes)
    ped_wp = {p.ped_id: tuple(g.node(n).world for n in p.nodes)
              for p in plan.pedestrians}
    encounters = {p.ped_id: g.node(p.encounter_node).world
                  for p in plan.pedestrians if p.encounter_node is not None}
    return WorldPlan(robot_waypoints=robot, pedestrian_waypoints=ped_wp,
                     encounter_points=encounters)
