"""socnavgen: generate, simulate and score social-navigation scenarios."""

from . import behavior, bundle, llm_gateway, metrics, path_gen, pipeline
from . import scenario_proposal, scene_graph
from .sim import engine, planners, sfm, trace, world

__version__ = "0.1.0"

__all__ = [
    "behavior", "bundle", "llm_gateway", "metrics", "path_gen", "pipeline",
    "scenario_proposal", "scene_graph", "engine", "planners", "sfm", "trace",
    "world",
]
