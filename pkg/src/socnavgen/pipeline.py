"""Pipeline stages shared by the CLI and the HTTP service.

Each stage reads its inputs from the bundle, calls the gateway, validates,
and writes its artifact back, so the CLI flow and an HTTP session over the
same fixtures produce byte-identical bundles.
"""
from __future__ import annotations

import logging
import time
from pathlib import Path

from .behavior import BehaviorTree, build_bt_prompt, default_library, generate_bt
from .bundle import ScenarioBundle, run_scenario
from .llm_gateway import LLMGateway
from .metrics import MetricsReport
from .path_gen import EditResult, PathPlan, edit_paths, generate_paths
from .scenario_proposal import ScenarioMetadata, ScenarioSpec, load_prompt_text, propose_scenario
from .sim.engine import SimConfig
from .sim.planners import make_planner
from .sim.trace import SimTrace

logger = logging.getLogger(__name__)


def stage_propose(bundle: ScenarioBundle, meta: ScenarioMetadata,
                  gateway: LLMGateway, max_attempts: int = 3,
                  naive: bool = False, model_id: str = "") -> ScenarioSpec:
    spec = propose_scenario(meta, gateway, max_attempts=max_attempts,
                            naive=naive, model_id=model_id)
    bundle.write_spec(spec)
    return spec


def stage_paths(bundle: ScenarioBundle, gateway: LLMGateway,
                max_attempts: int = 3, naive: bool = False,
                model_id: str = "") -> PathPlan:
    g = bundle.load_graph()
    spec = bundle.load_spec()
    image = bundle.prompt_image_path()
    plan = generate_paths(
        g, spec, gateway, max_attempts=max_attempts,
        map_image=(str(image) if image and not naive else None),
        model_id=model_id, naive=naive,
    )
    bundle.write_plan(plan)
    return plan


def stage_edit_paths(bundle: ScenarioBundle, instruction: str,
                     gateway: LLMGateway, max_attempts: int = 3,
                     model_id: str = "") -> EditResult:
    g = bundle.load_graph()
    spec = bundle.load_spec()
    plan = bundle.load_plan(g, spec)
    result = edit_paths(plan, instruction, g, spec, gateway,
                        max_attempts=max_attempts, model_id=model_id)
    if result.applied:
        bundle.write_plan(result.plan)
    return result


def stage_behaviors(bundle: ScenarioBundle, gateway: LLMGateway,
                    max_attempts: int = 3, naive: bool = False,
                    model_id: str = "") -> dict[str, BehaviorTree]:
    spec = bundle.load_spec()
    lib = default_library()
    trees: dict[str, BehaviorTree] = {}
    for ped in spec.pedestrians:
        prompt = build_bt_prompt(
            ped.behavior_description, ped.ped_id, lib,
            examples_text=load_prompt_text("bt_examples.txt"),
            rules_text=load_prompt_text("bt_rules.txt"),
            model_id=model_id, naive=naive,
        )
        tree = generate_bt(ped, lib, gateway, max_attempts=max_attempts,
                           prompt=prompt)
        bundle.write_tree(ped.ped_id, tree, lib)
        trees[ped.ped_id] = tree
    return trees


def stage_run(bundle: ScenarioBundle, planner_name: str = "baseline",
              seed: int | None = None,
              run_id: str | None = None) -> tuple[SimTrace, MetricsReport]:
    cfg = bundle.load_simconfig()
    if seed is not None:
        cfg = SimConfig.from_doc({**cfg.to_doc(), "seed": seed})
        bundle.write_simconfig(cfg)
    return run_scenario(bundle, make_planner(planner_name), cfg, run_id=run_id)


def run_pipeline(graph_file: str | Path, meta: ScenarioMetadata,
                 out_dir: str | Path, gateway: LLMGateway,
                 planner_name: str = "baseline", seed: int = 7,
                 max_attempts: int = 3, naive: bool = False,
                 model_id: str = "",
                 sim_config: SimConfig | None = None) -> ScenarioBundle:
    """All stages in sequence: propose, paths, behaviors, simulate."""
    started = time.monotonic()
    bundle = ScenarioBundle(out_dir)
    bundle.init_from_graph(graph_file)
    cfg = sim_config or SimConfig()
    bundle.write_simconfig(SimConfig.from_doc({**cfg.to_doc(), "seed": seed}))
    stage_propose(bundle, meta, gateway, max_attempts, naive, model_id)
    stage_paths(bundle, gateway, max_attempts, naive, model_id)
    stage_behaviors(bundle, gateway, max_attempts, naive, model_id)
    stage_run(bundle, planner_name, seed=seed)
    logger.info("pipeline wall time: %.1f s (gateway: %d calls, est. $%.4f)",
                time.monotonic() - started, gateway.calls, gateway.spent())
    return bundle
