"""Pluggable robot planners.

Three built-ins cover the comparison workflow: a plain waypoint follower, a
social-zone follower that steers away from nearby people, and a group-aware
follower that additionally detours around whole groups. Two harness planners
(scripted arrival, frozen) support synchronization tests.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol

TURN_GAIN = 2.5
SAFETY_STOP_DIST = 0.5
SAFETY_STOP_BEARING = math.radians(60.0)


@dataclass(frozen=True)
class PedObs:
    id: str
    x: float
    y: float
    vx: float
    vy: float
    radius: float


@dataclass(frozen=True)
class PlannerObservation:
    t: float
    dt: float
    x: float
    y: float
    heading: float
    waypoints: tuple[tuple[float, float], ...]
    max_speed: float
    max_turn: float
    pedestrians: tuple[PedObs, ...]
    groups: dict[str, tuple[str, ...]]


class RobotPlanner(Protocol):
    name: str

    def plan_step(self, obs: PlannerObservation) -> tuple[float, float]:
        """Velocity command (v m/s, omega rad/s); must be finite and bounded."""
        ...


def _wrap(angle: float) -> float:
    while angle > math.pi:
        angle -= 2.0 * math.pi
    while angle < -math.pi:
        angle += 2.0 * math.pi
    return angle


def _steer(obs: PlannerObservation, direction: tuple[float, float],
           speed: float) -> tuple[float, float]:
    target_heading = math.atan2(direction[1], direction[0])
    err = _wrap(target_heading - obs.heading)
    omega = max(-obs.max_turn, min(obs.max_turn, TURN_GAIN * err))
    v = max(0.0, speed * math.cos(err))
    return v, omega


def _safety_stop(obs: PlannerObservation, v: float) -> float:
    """Hard stop when a person is immediately ahead; all built-ins share it."""
    for ped in obs.pedestrians:
        dx, dy = ped.x - obs.x, ped.y - obs.y
        d = math.hypot(dx, dy)
        if d < SAFETY_STOP_DIST and abs(_wrap(math.atan2(dy, dx) - obs.heading)) < SAFETY_STOP_BEARING:
            return 0.0
    return v


class BaselinePlanner:
    """Plain waypoint follower with only the shared safety stop."""

    name = "baseline"

    def plan_step(self, obs: PlannerObservation) -> tuple[float, float]:
        if not obs.waypoints:
            return (0.0, 0.0)
        wx, wy = obs.waypoints[0]
        v, omega = _steer(obs, (wx - obs.x, wy - obs.y), obs.max_speed)
        return _safety_stop(obs, v), omega


class SocialZonePlanner:
    """Waypoint follower plus a repulsive velocity term inside a personal-space
    radius around each person."""

    name = "social"

    def __init__(self, zone_radius: float = 1.6, push_gain: float = 1.8):
        self.zone_radius = zone_radius
        self.push_gain = push_gain

    def _avoidance(self, obs: PlannerObservation) -> tuple[float, float]:
        # Pushes carry a small fixed rotation so symmetric opposition resolves
        # into a consistent detour instead of a stall.
        c, s = math.cos(0.35), math.sin(0.35)
        ax = ay = 0.0
        for ped in obs.pedestrians:
            dx, dy = obs.x - ped.x, obs.y - ped.y
            d = math.hypot(dx, dy)
            if d < 1e-6 or d >= self.zone_radius:
                continue
            push = self.push_gain * (1.0 / d - 1.0 / self.zone_radius)
            ux, uy = dx / d, dy / d
            ax += push * (c * ux - s * uy)
            ay += push * (s * ux + c * uy)
        return ax, ay

    def _waypoint_blocked(self, obs: PlannerObservation,
                          wp: tuple[float, float]) -> bool:
        return any(
            math.hypot(p.x - wp[0], p.y - wp[1]) < 0.75 * self.zone_radius
            for p in obs.pedestrians
        )

    def _target(self, obs: PlannerObservation) -> tuple[float, float]:
        """First waypoint not inside an avoid region; the final one always counts."""
        for i, wp in enumerate(obs.waypoints):
            if i == len(obs.waypoints) - 1 or not self._waypoint_blocked(obs, wp):
                return wp
        return obs.waypoints[-1]

    def _command(self, obs: PlannerObservation,
                 extra: tuple[float, float]) -> tuple[float, float]:
        if not obs.waypoints:
            return (0.0, 0.0)
        wx, wy = self._target(obs)
        gx, gy = wx - obs.x, wy - obs.y
        gd = math.hypot(gx, gy)
        if gd > 1e-9:
            gx, gy = gx / gd, gy / gd
        dx = gx * obs.max_speed + extra[0]
        dy = gy * obs.max_speed + extra[1]
        if math.hypot(dx, dy) < 1e-6:
            # Head-on deadlock: break symmetry by turning left, consistently.
            dx, dy = -gy, gx
        speed = min(obs.max_speed, math.hypot(dx, dy))
        v, omega = _steer(obs, (dx, dy), speed)
        return _safety_stop(obs, v), omega

    def plan_step(self, obs: PlannerObservation) -> tuple[float, float]:
        return self._command(obs, self._avoidance(obs))


class GroupAwarePlanner(SocialZonePlanner):
    """Social-zone follower that also detours around group hulls.

    Each group is bounded by a disc (hull centroid + farthest member) and
    given a clearance margin; a strong radial push with a small tangential
    bias slides the robot around rather than into the group.
    """

    name = "group"

    def __init__(self, zone_radius: float = 1.6, push_gain: float = 1.8,
                 group_margin: float = 1.2, group_gain: float = 4.0):
        super().__init__(zone_radius, push_gain)
        self.group_margin = group_margin
        self.group_gain = group_gain

    # Members farther than this from their centroid are not walking together;
    # a dispersed "group" degrades to individual avoidance.
    MAX_GROUP_RADIUS = 2.0

    def _group_discs(self, obs: PlannerObservation) -> list[tuple[float, float, float]]:
        by_id = {p.id: p for p in obs.pedestrians}
        discs = []
        for gid in sorted(obs.groups):
            pts = [by_id[m] for m in obs.groups[gid] if m in by_id]
            if len(pts) < 2:
                continue
            cx = sum(p.x for p in pts) / len(pts)
            cy = sum(p.y for p in pts) / len(pts)
            hull_radius = max(math.hypot(p.x - cx, p.y - cy) for p in pts)
            if hull_radius > self.MAX_GROUP_RADIUS:
                continue
            discs.append((cx, cy, hull_radius + self.group_margin))
        return discs

    def _waypoint_blocked(self, obs: PlannerObservation,
                          wp: tuple[float, float]) -> bool:
        if super()._waypoint_blocked(obs, wp):
            return True
        return any(
            math.hypot(cx - wp[0], cy - wp[1]) < clearance
            for cx, cy, clearance in self._group_discs(obs)
        )

    def _group_push(self, obs: PlannerObservation) -> tuple[float, float]:
        ax = ay = 0.0
        for cx, cy, clearance in self._group_discs(obs):
            dx, dy = obs.x - cx, obs.y - cy
            d = math.hypot(dx, dy)
            if d < 1e-6 or d >= clearance:
                continue
            push = self.group_gain * (clearance - d) / clearance
            ux, uy = dx / d, dy / d
            # Tangential bias (rotate ~25 deg) so opposition becomes a detour.
            c, s = math.cos(0.45), math.sin(0.45)
            bx, by = c * ux - s * uy, s * ux + c * uy
            ax += push * bx
            ay += push * by
        return ax, ay

    def plan_step(self, obs: PlannerObservation) -> tuple[float, float]:
        sx, sy = self._avoidance(obs)
        gx, gy = self._group_push(obs)
        return self._command(obs, (sx + gx, sy + gy))


class ScriptedArrivalPlanner:
    """Harness planner: drive straight at whatever speed arrives at the final
    waypoint at the scripted time, then park. Skips the safety stop."""

    name = "scripted"

    def __init__(self, arrive_at: float, max_speed: float = 2.5):
        self.arrive_at = arrive_at
        self.max_speed = max_speed

    def plan_step(self, obs: PlannerObservation) -> tuple[float, float]:
        if not obs.waypoints:
            return (0.0, 0.0)
        wx, wy = obs.waypoints[-1]
        remaining = math.hypot(wx - obs.x, wy - obs.y)
        if remaining < 0.05:
            return (0.0, 0.0)
        time_left = self.arrive_at - obs.t
        if time_left <= obs.dt:
            speed = min(self.max_speed, remaining / obs.dt)
        else:
            speed = min(self.max_speed, remaining / time_left)
        v, omega = _steer(obs, (wx - obs.x, wy - obs.y), speed)
        return v, omega


class FrozenPlanner:
    """Harness planner that never moves."""

    name = "frozen"

    def plan_step(self, obs: PlannerObservation) -> tuple[float, float]:
        return (0.0, 0.0)


BUILTIN_PLANNERS = {
    "baseline": BaselinePlanner,
    "social": SocialZonePlanner,
    "group": GroupAwarePlanner,
}


def make_planner(name: str) -> RobotPlanner:
    try:
        return BUILTIN_PLANNERS[name]()
    except KeyError:
        raise ValueError(
            f"unknown planner {name!r}; choose from {sorted(BUILTIN_PLANNERS)}"
        ) from None
