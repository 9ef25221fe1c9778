"""Command-line driver for the scenario pipeline.

Every command exits non-zero on failure with a single machine-parsable line
on stderr: "<ErrorClass>: <message>".
"""
from __future__ import annotations

import functools
import json
import logging
from pathlib import Path

import click

from .bundle import BundleInvalid, ScenarioBundle, export_hunav
from .llm_gateway import LLMGateway
from .metrics import compare as compare_reports
from .metrics import render_comparison
from .pipeline import (
    run_pipeline,
    stage_behaviors,
    stage_edit_paths,
    stage_paths,
    stage_propose,
    stage_run,
)
from .scenario_proposal import ScenarioMetadata
from .scene_graph import SceneGraphError, load_scene_graph

logger = logging.getLogger(__name__)


def fail(exc: BaseException) -> "click.exceptions.Exit":
    click.echo(f"{type(exc).__name__}: {exc}", err=True)
    return SystemExit(1)


def guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except SystemExit:
            raise
        except Exception as exc:  # noqa: BLE001 - single-line error contract
            raise fail(exc) from exc

    return wrapper


@click.group()
@click.option("--llm-mode", type=click.Choice(["live", "record", "replay"]),
              default="replay", show_default=True)
@click.option("--fixtures", type=click.Path(), default="fixtures/llm",
              show_default=True, help="Fixture store directory.")
@click.option("--max-attempts", type=int, default=3, show_default=True)
@click.option("--model", default="", help="Override the model id.")
@click.pass_context
def main(ctx, llm_mode, fixtures, max_attempts, model):
    """Generate, simulate and score social-navigation scenarios."""
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    ctx.obj = {
        "gateway": LLMGateway(mode=llm_mode, fixtures_dir=fixtures),
        "max_attempts": max_attempts,
        "model": model,
    }


@main.command("validate-map")
@click.argument("graph", type=click.Path(exists=True))
@guarded
def validate_map(graph):
    """Check a scene-graph file; exit 1 listing violations if invalid."""
    try:
        g = load_scene_graph(graph)
    except SceneGraphError as exc:
        raise fail(exc) from exc
    click.echo(f"OK: {len(g.nodes)} nodes, {len(g.edges)} edges")


def metadata_options(fn):
    fn = click.option("--location", required=True,
                      help="Description of the annotated location.")(fn)
    fn = click.option("--rough", default=None,
                      help="Optional rough scenario to adhere to.")(fn)
    fn = click.option("--task", required=True, help="The robot's task.")(fn)
    fn = click.option("--context", required=True, help="Social context.")(fn)
    return fn


def build_meta(context, task, rough, location) -> ScenarioMetadata:
    return ScenarioMetadata(social_context=context, task=task,
                            location_description=location,
                            rough_scenario=rough)


@main.command()
@metadata_options
@click.option("--graph", required=True, type=click.Path(exists=True),
              help="Scene-graph JSON file for the location.")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--naive", is_flag=True, help="Bare-prompt ablation mode.")
@click.pass_obj
@guarded
def propose(obj, context, task, rough, location, graph, out_dir, naive):
    """Write scenario.json for the given metadata."""
    bundle = ScenarioBundle(out_dir)
    bundle.init_from_graph(graph)
    spec = stage_propose(bundle, build_meta(context, task, rough, location),
                         obj["gateway"], obj["max_attempts"], naive,
                         obj["model"])
    click.echo(f"scenario written: {len(spec.pedestrians)} pedestrian(s)")


@main.command()
@click.argument("bundle_dir", type=click.Path(exists=True))
@click.option("--edit", "instruction", default=None,
              help="Natural-language edit of the existing plan.")
@click.option("--naive", is_flag=True)
@click.pass_obj
@guarded
def paths(obj, bundle_dir, instruction, naive):
    """Generate (or --edit) paths.json."""
    bundle = ScenarioBundle(bundle_dir)
    if instruction is not None:
        result = stage_edit_paths(bundle, instruction, obj["gateway"],
                                  obj["max_attempts"], obj["model"])
        if not result.applied:
            click.echo("edit failed, plan unchanged: "
                       + " | ".join(result.errors), err=True)
            raise SystemExit(1)
        click.echo(f"edit applied after {result.attempts} attempt(s)")
    else:
        plan = stage_paths(bundle, obj["gateway"], obj["max_attempts"], naive,
                           obj["model"])
        click.echo(f"paths written: robot {len(plan.robot_nodes)} nodes, "
                   f"{len(plan.pedestrians)} pedestrian path(s)")


@main.command()
@click.argument("bundle_dir", type=click.Path(exists=True))
@click.option("--naive", is_flag=True)
@click.pass_obj
@guarded
def behaviors(obj, bundle_dir, naive):
    """Generate bt/<ped_id>.xml for every pedestrian."""
    bundle = ScenarioBundle(bundle_dir)
    trees = stage_behaviors(bundle, obj["gateway"], obj["max_attempts"], naive,
                            obj["model"])
    click.echo(f"behavior trees written: {', '.join(sorted(trees))}")


@main.command()
@click.argument("bundle_dir", type=click.Path(exists=True))
@click.option("--planner", type=click.Choice(["baseline", "social", "group"]),
              default="baseline", show_default=True)
@click.option("--seed", type=int, default=7, show_default=True)
@guarded
def run(bundle_dir, planner, seed):
    """Simulate the bundle and write trace + metrics files."""
    bundle = ScenarioBundle(bundle_dir)
    trace, report = stage_run(bundle, planner, seed=seed)
    click.echo(f"run {trace.config['planner']}_seed{seed}: "
               f"{trace.termination_reason} after {trace.ticks[-1].t:.2f}s, "
               f"success={report.success}")


@main.command()
@metadata_options
@click.option("--graph", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--planner", type=click.Choice(["baseline", "social", "group"]),
              default="baseline", show_default=True)
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--naive", is_flag=True, help="Bare-prompt ablation mode.")
@click.pass_obj
@guarded
def pipeline(obj, context, task, rough, location, graph, out_dir, planner,
             seed, naive):
    """All stages in sequence: propose, paths, behaviors, simulate."""
    bundle = run_pipeline(
        graph, build_meta(context, task, rough, location), out_dir,
        obj["gateway"], planner_name=planner, seed=seed,
        max_attempts=obj["max_attempts"], naive=naive, model_id=obj["model"],
    )
    problems = bundle.validate()
    if problems:
        raise BundleInvalid(problems)
    click.echo(f"bundle complete: {bundle.root}")


@main.command("export-hunav")
@click.argument("bundle_dir", type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@guarded
def export_hunav_cmd(bundle_dir, out_dir):
    """Export the agents YAML document and BT XML copies."""
    path = export_hunav(ScenarioBundle(bundle_dir), out_dir)
    click.echo(f"exported: {path}")


@main.command()
@click.argument("bundle_dir", type=click.Path(exists=True))
@click.option("--planners", default="baseline,social,group", show_default=True)
@click.option("--seed", type=int, default=7, show_default=True)
@guarded
def compare(bundle_dir, planners, seed):
    """Run several planners on the same bundle/seed and print the table."""
    bundle = ScenarioBundle(bundle_dir)
    reports = {}
    for name in [p.strip() for p in planners.split(",") if p.strip()]:
        _, report = stage_run(bundle, name, seed=seed)
        reports[name] = report
    table = compare_reports(reports)
    out = bundle.path("metrics", f"comparison_seed{seed}.json")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(table, indent=2) + "\n", encoding="utf-8")
    click.echo(render_comparison(table), nl=False)


@main.command()
@click.option("--port", type=int, default=8008, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--bundle-root", type=click.Path(), default="bundles",
              show_default=True)
@click.option("--maps-dir", type=click.Path(), default="assets/maps",
              show_default=True)
@click.option("--ui-dir", type=click.Path(), default=None,
              help="Directory of built UI assets to serve at /.")
@click.pass_obj
@guarded
def serve(obj, port, host, bundle_root, maps_dir, ui_dir):
    """Serve the HTTP API (and UI) backing interactive sessions."""
    import uvicorn

    from .service import create_app

    app = create_app(Path(bundle_root), obj["gateway"], Path(maps_dir),
                     max_attempts=obj["max_attempts"], model_id=obj["model"],
                     ui_dir=Path(ui_dir) if ui_dir else None)
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
