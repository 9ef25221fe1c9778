"""Social-force pedestrian dynamics.

Goal attraction relaxes the velocity toward desired speed along the goal
direction; other agents and walls contribute exponential repulsions, with the
usual anisotropy factor that weights forces from agents ahead more strongly
than those behind.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .world import WorldModel

# Separation floor for coincident agents; below this the direction is drawn
# from the seeded stream so the singularity resolves deterministically.
MIN_SEPARATION = 1e-3


@dataclass(frozen=True)
class SfmParams:
    relaxation_time: float = 0.5
    ped_strength: float = 2.1
    ped_range: float = 0.3
    obstacle_strength: float = 10.0
    obstacle_range: float = 0.2
    anisotropy: float = 0.6

    def to_doc(self) -> dict:
        return {
            "relaxation_time": self.relaxation_time,
            "ped_strength": self.ped_strength,
            "ped_range": self.ped_range,
            "obstacle_strength": self.obstacle_strength,
            "obstacle_range": self.obstacle_range,
            "anisotropy": self.anisotropy,
        }

    @staticmethod
    def from_doc(doc: dict) -> "SfmParams":
        return SfmParams(**{k: float(v) for k, v in doc.items()})


@dataclass(frozen=True)
class Neighbor:
    x: float
    y: float
    radius: float
    weight: float = 1.0


def sfm_accel(
    pos: tuple[float, float],
    vel: tuple[float, float],
    goal: tuple[float, float] | None,
    desired_speed: float,
    radius: float,
    neighbors: list[Neighbor],
    world: WorldModel | None,
    params: SfmParams,
    rand_unit: Callable[[], tuple[float, float]] | None = None,
) -> tuple[float, float]:
    """Total acceleration on one agent; a pure function of its inputs."""
    px, py = pos
    vx, vy = vel

    # Driving term: (v_des * e_goal - v) / tau.
    ex = ey = 0.0
    if goal is not None:
        gx, gy = goal[0] - px, goal[1] - py
        dist = math.hypot(gx, gy)
        if dist > 1e-9:
            ex, ey = gx / dist, gy / dist
    ax = (desired_speed * ex - vx) / params.relaxation_time
    ay = (desired_speed * ey - vy) / params.relaxation_time

    # Direction of motion for the anisotropy weight; fall back to the goal
    # direction when standing.
    speed = math.hypot(vx, vy)
    if speed > 1e-6:
        mx, my = vx / speed, vy / speed
    else:
        mx, my = ex, ey

    lam = params.anisotropy
    for nb in neighbors:
        dx, dy = px - nb.x, py - nb.y
        d = math.hypot(dx, dy)
        if d < MIN_SEPARATION:
            d = MIN_SEPARATION
            if rand_unit is not None:
                dx, dy = rand_unit()
            else:
                dx, dy = 1.0, 0.0
        else:
            dx, dy = dx / d, dy / d
        magnitude = params.ped_strength * math.exp((radius + nb.radius - d) / params.ped_range)
        if mx or my:
            cos_phi = mx * (-dx) + my * (-dy)
            w = lam + (1.0 - lam) * (1.0 + cos_phi) / 2.0
        else:
            w = 1.0
        magnitude *= w * nb.weight
        ax += magnitude * dx
        ay += magnitude * dy

    if world is not None and world.obstacle_count:
        d_w = world.distance_to_obstacle(px, py)
        if math.isfinite(d_w):
            nx, ny = world.wall_normal(px, py)
            if nx or ny:
                magnitude = params.obstacle_strength * math.exp(
                    (radius - d_w) / params.obstacle_range
                )
                ax += magnitude * nx
                ay += magnitude * ny

    return (ax, ay)
