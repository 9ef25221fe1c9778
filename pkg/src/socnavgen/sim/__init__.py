from .engine import AgentState, SimConfig, SimEngine
from .planners import (
    BaselinePlanner,
    FrozenPlanner,
    GroupAwarePlanner,
    ScriptedArrivalPlanner,
    SocialZonePlanner,
    make_planner,
)
from .sfm import Neighbor, SfmParams, sfm_accel
from .trace import AgentSnapshot, GestureEvent, SimTrace, TickRecord
from .world import ImageError, WorldModel, load_world

__all__ = [
    "AgentState", "SimConfig", "SimEngine", "BaselinePlanner", "FrozenPlanner",
    "GroupAwarePlanner", "ScriptedArrivalPlanner", "SocialZonePlanner",
    "make_planner", "Neighbor", "SfmParams", "sfm_accel", "AgentSnapshot",
    "GestureEvent", "SimTrace", "TickRecord", "ImageError", "WorldModel",
    "load_world",
]
