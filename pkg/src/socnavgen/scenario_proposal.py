"""Turn rough scenario metadata into a precise, validated scenario spec.

Prompt text lives in plain files under ``socnavgen/data/prompts`` so users
can tune wording without touching code; assembly here is a pure function of
its inputs, which keeps record/replay digests stable.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from .llm_gateway import (
    ChatRequest,
    ChatResponse,
    LLMGateway,
    extract_structured,
)

PEDESTRIAN_CAP = 10

PROPOSAL_KEYS = ["scenario_description", "pedestrians", "expected_robot_behavior"]


def load_prompt_text(name: str) -> str:
    return resources.files("socnavgen.data.prompts").joinpath(name).read_text(
        encoding="utf-8"
    )


def load_proposal_examples() -> list[dict]:
    raw = resources.files("socnavgen.data.prompts").joinpath(
        "proposal_examples.json"
    ).read_text(encoding="utf-8")
    return json.loads(raw)


@dataclass(frozen=True)
class ScenarioMetadata:
    social_context: str
    task: str
    location_description: str
    rough_scenario: str | None = None

    def __post_init__(self) -> None:
        for name in ("social_context", "task", "location_description"):
            if not getattr(self, name).strip():
                raise ValueError(f"metadata field {name} must be non-empty")


@dataclass(frozen=True)
class PedestrianSpec:
    ped_id: str
    role: str
    behavior_description: str
    group_id: str | None = None


@dataclass
class ScenarioSpec:
    scenario_description: str
    pedestrians: list[PedestrianSpec]
    expected_robot_behavior: str
    guided: bool = False

    def validate(self) -> list[str]:
        problems = []
        if not self.scenario_description.strip():
            problems.append("scenario_description must be non-empty")
        if not self.expected_robot_behavior.strip():
            problems.append("expected_robot_behavior must be non-empty")
        if not self.pedestrians:
            problems.append("scenario must include at least one pedestrian")
        if len(self.pedestrians) > PEDESTRIAN_CAP:
            problems.append(
                f"scenario has {len(self.pedestrians)} pedestrians, cap is {PEDESTRIAN_CAP}"
            )
        seen = set()
        for ped in self.pedestrians:
            if not ped.ped_id.strip():
                problems.append("pedestrian ped_id must be non-empty")
            if ped.ped_id in seen:
                problems.append(f"duplicate ped_id {ped.ped_id}")
            seen.add(ped.ped_id)
            if not ped.behavior_description.strip():
                problems.append(f"pedestrian {ped.ped_id} behavior_description is empty")
        return problems


def spec_to_doc(spec: ScenarioSpec) -> dict:
    return {
        "scenario_description": spec.scenario_description,
        "pedestrians": [
            {"ped_id": p.ped_id, "role": p.role,
             "behavior_description": p.behavior_description,
             "group_id": p.group_id}
            for p in spec.pedestrians
        ],
        "expected_robot_behavior": spec.expected_robot_behavior,
        "guided": spec.guided,
    }


def spec_from_doc(doc: dict) -> ScenarioSpec:
    peds = [
        PedestrianSpec(
            ped_id=str(p["ped_id"]),
            role=str(p.get("role", "pedestrian")),
            behavior_description=str(p["behavior_description"]),
            group_id=(str(p["group_id"]) if p.get("group_id") else None),
        )
        for p in doc["pedestrians"]
    ]
    spec = ScenarioSpec(
        scenario_description=str(doc["scenario_description"]),
        pedestrians=peds,
        expected_robot_behavior=str(doc["expected_robot_behavior"]),
        guided=bool(doc.get("guided", False)),
    )
    problems = spec.validate()
    if problems:
        raise ValueError("; ".join(problems))
    return spec


def _render_examples(examples: list[dict]) -> str:
    chunks = []
    for i, ex in enumerate(examples, start=1):
        meta = ex["metadata"]
        rough = meta.get("rough_scenario")
        lines = [
            f"Example {i}",
            f"Social context: {meta['social_context']}",
            f"Task: {meta['task']}",
            f"Location: {meta['location_description']}",
        ]
        if rough:
            lines.append(f"Rough scenario: {rough}")
        lines.append("Output:")
        lines.append("```json")
        lines.append(json.dumps(ex["output"], indent=2, ensure_ascii=False))
        lines.append("```")
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks)


def build_proposal_prompt(
    meta: ScenarioMetadata,
    capabilities: str,
    examples: list[dict],
    model_id: str = "",
) -> ChatRequest:
    """Assemble the proposal prompt; empty capabilities/examples is naive mode."""
    from .llm_gateway import DEFAULT_MODEL

    if capabilities or examples:
        system = load_prompt_text("proposal_system.txt").replace(
            "{capabilities}", capabilities
        )
    else:
        system = (
            "You design test scenarios for robots that drive around people. "
            "Answer with a scenario for the input below."
        )
    parts = []
    if examples:
        parts.append("Worked examples of good outputs:\n\n" + _render_examples(examples))
    parts.append(
        "Now the real input.\n"
        f"Social context: {meta.social_context}\n"
        f"Task: {meta.task}\n"
        f"Location: {meta.location_description}"
    )
    if meta.rough_scenario:
        parts.append(
            "Rough scenario provided by the user. The generated scenario must "
            "adhere to it; keep every element the user asked for and only fill "
            "in unspecified detail:\n"
            f"{meta.rough_scenario}"
        )
    parts.append(
        "Reply with a single fenced ```json block containing exactly the keys "
        "scenario_description, pedestrians, expected_robot_behavior. Each entry "
        "in pedestrians must have ped_id, role, behavior_description and an "
        "optional group_id."
    )
    return ChatRequest(
        system_prompt=system,
        turns=(("user", "\n\n".join(parts)),),
        model_id=model_id or DEFAULT_MODEL,
    )


def parse_proposal_response(resp: ChatResponse, guided: bool) -> ScenarioSpec:
    doc = extract_structured(resp, PROPOSAL_KEYS)
    peds_raw = doc["pedestrians"]
    if not isinstance(peds_raw, list):
        raise ValueError("'pedestrians' must be a list of pedestrian objects")
    peds = []
    for i, p in enumerate(peds_raw):
        if not isinstance(p, dict) or "ped_id" not in p or "behavior_description" not in p:
            raise ValueError(
                f"pedestrians[{i}] must be an object with ped_id and behavior_description"
            )
        peds.append(PedestrianSpec(
            ped_id=str(p["ped_id"]),
            role=str(p.get("role", "pedestrian")),
            behavior_description=str(p["behavior_description"]),
            group_id=(str(p["group_id"]) if p.get("group_id") else None),
        ))
    spec = ScenarioSpec(
        scenario_description=str(doc["scenario_description"]),
        pedestrians=peds,
        expected_robot_behavior=str(doc["expected_robot_behavior"]),
        guided=guided,
    )
    problems = spec.validate()
    if problems:
        raise ValueError("; ".join(problems))
    return spec


def propose_scenario(
    meta: ScenarioMetadata,
    gateway: LLMGateway,
    max_attempts: int = 3,
    naive: bool = False,
    model_id: str = "",
) -> ScenarioSpec:
    if naive:
        req = build_proposal_prompt(meta, capabilities="", examples=[], model_id=model_id)
    else:
        req = build_proposal_prompt(
            meta,
            capabilities=load_prompt_text("capabilities.txt"),
            examples=load_proposal_examples(),
            model_id=model_id,
        )
    guided = meta.rough_scenario is not None

    def validate(resp: ChatResponse) -> ScenarioSpec:
        return parse_proposal_response(resp, guided)

    spec, _ = gateway.query_with_repair(req, validate, max_attempts)
    return spec
