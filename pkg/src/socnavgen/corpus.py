"""Fixture-corpus harness: structured vs naive prompting comparison.

Runs each corpus case through proposal, paths and behaviors with
max_attempts=1 (first response accepted, no repair), in either prompting
mode, and reports per-stage outcomes and pass rates. Replay fixtures make
the whole comparison deterministic and offline.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .bundle import ScenarioBundle
from .llm_gateway import LLMGateway, RetriesExhausted
from .pipeline import stage_behaviors, stage_paths, stage_propose
from .scenario_proposal import ScenarioMetadata

MODES = ("structured", "naive")
STAGES = ("propose", "paths", "behaviors")


@dataclass(frozen=True)
class CorpusCase:
    case_id: str
    map_name: str
    metadata: ScenarioMetadata


@dataclass
class CaseOutcome:
    case_id: str
    mode: str
    passed: bool
    failed_stage: str | None = None
    error: str = ""


def load_corpus_inputs(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def metadata_from_doc(doc: dict) -> ScenarioMetadata:
    return ScenarioMetadata(
        social_context=doc["social_context"],
        task=doc["task"],
        location_description=doc["location_description"],
        rough_scenario=doc.get("rough_scenario"),
    )


def corpus_cases(inputs: dict) -> list[CorpusCase]:
    return [
        CorpusCase(case_id=c["id"], map_name=c["map"],
                   metadata=metadata_from_doc(c["metadata"]))
        for c in inputs["corpus"]
    ]


def run_case(case: CorpusCase, graph_file: str | Path, gateway: LLMGateway,
             mode: str, workdir: str | Path) -> CaseOutcome:
    """First-shot run of all generation stages; no repair, no simulation."""
    naive = mode == "naive"
    bundle = ScenarioBundle(Path(workdir) / f"{case.case_id}_{mode}")
    bundle.init_from_graph(graph_file)
    for stage_name, stage in (
        ("propose", lambda: stage_propose(bundle, case.metadata, gateway,
                                          max_attempts=1, naive=naive)),
        ("paths", lambda: stage_paths(bundle, gateway, max_attempts=1,
                                      naive=naive)),
        ("behaviors", lambda: stage_behaviors(bundle, gateway, max_attempts=1,
                                              naive=naive)),
    ):
        try:
            stage()
        except RetriesExhausted as exc:
            return CaseOutcome(case_id=case.case_id, mode=mode, passed=False,
                               failed_stage=stage_name,
                               error=exc.errors[0] if exc.errors else str(exc))
    return CaseOutcome(case_id=case.case_id, mode=mode, passed=True)


def compare_modes(cases: list[CorpusCase], graph_files: dict[str, Path],
                  gateway: LLMGateway, workdir: str | Path) -> dict:
    """Pass rates per mode over the corpus, plus per-case outcomes."""
    outcomes: list[CaseOutcome] = []
    for mode in MODES:
        for case in cases:
            outcomes.append(run_case(case, graph_files[case.map_name], gateway,
                                     mode, workdir))
    rates = {}
    for mode in MODES:
        subset = [o for o in outcomes if o.mode == mode]
        rates[mode] = sum(o.passed for o in subset) / len(subset)
    return {"rates": rates, "outcomes": outcomes}
