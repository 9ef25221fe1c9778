"""Deterministic fixed-timestep scenario execution.

Step order is fixed: (1) scenario-manager update, (2) behavior-tree ticks,
(3) social-force integration for non-held pedestrians, (4) robot planner and
kinematic update, (5) gesture delivery for the next tick, (6) trace append.
Pedestrians update in ascending id order and all randomness draws from one
seeded stream, so a trace is a pure function of (bundle, planner, config,
seed).
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ..behavior import BehaviorTree, MotionIntent, TickContext, tick as bt_tick
from ..path_gen import PathPlan, WorldPlan
from .planners import PedObs, PlannerObservation, RobotPlanner
from .sfm import Neighbor, SfmParams, sfm_accel
from .trace import AgentSnapshot, GestureEvent, SimTrace, TickRecord
from .world import WorldModel

SPEED_CAP_FACTOR = 1.5
MIN_SCALE = 0.3
MAX_SCALE = 1.5
BLOCK_STANDOFF = 0.3
# Encounters register at twice the waypoint radius: social-force repulsion
# keeps agents from stacking exactly on the same point.
ENCOUNTER_RADIUS_FACTOR = 2.0
# Docking at the final waypoint is tighter than passing intermediate ones.
FINAL_WAYPOINT_FACTOR = 0.5
# A waypoint someone else occupies counts as reached from this far away.
CROWDED_WAYPOINT_RADIUS = 1.0


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.05
    max_duration: float = 60.0
    seed: int = 7
    sfm: SfmParams = field(default_factory=SfmParams)
    encounter_tolerance: float = 2.0
    hold_timeout: float = 30.0
    arrival_radius: float = 0.4
    robot_max_speed: float = 1.0
    robot_max_turn: float = 1.5
    robot_radius: float = 0.3
    ped_radius: float = 0.3
    ped_desired_speed: float = 1.0
    visibility_range: float = 20.0
    stop_on_collision: bool = False
    robot_gestures: tuple[tuple[float, int, str], ...] = ()

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError("dt must be > 0")
        if self.encounter_tolerance <= 0:
            raise ValueError("encounter tolerance must be > 0")

    def to_doc(self) -> dict:
        return {
            "dt": self.dt,
            "max_duration": self.max_duration,
            "seed": self.seed,
            "sfm": self.sfm.to_doc(),
            "encounter_tolerance": self.encounter_tolerance,
            "hold_timeout": self.hold_timeout,
            "arrival_radius": self.arrival_radius,
            "robot_max_speed": self.robot_max_speed,
            "robot_max_turn": self.robot_max_turn,
            "robot_radius": self.robot_radius,
            "ped_radius": self.ped_radius,
            "ped_desired_speed": self.ped_desired_speed,
            "visibility_range": self.visibility_range,
            "stop_on_collision": self.stop_on_collision,
            "robot_gestures": [list(g) for g in self.robot_gestures],
        }

    @staticmethod
    def from_doc(doc: dict) -> "SimConfig":
        doc = dict(doc)
        sfm = SfmParams.from_doc(doc.pop("sfm", {})) if doc.get("sfm") or "sfm" in doc else SfmParams()
        gestures = tuple(
            (float(g[0]), int(g[1]), str(g[2]))
            for g in doc.pop("robot_gestures", [])
        )
        known = {f for f in SimConfig.__dataclass_fields__ if f not in ("sfm", "robot_gestures")}
        kwargs = {k: v for k, v in doc.items() if k in known}
        return SimConfig(sfm=sfm, robot_gestures=gestures, **kwargs)


@dataclass
class AgentState:
    id: str
    kind: str
    x: float
    y: float
    heading: float
    radius: float
    desired_speed: float
    vx: float = 0.0
    vy: float = 0.0
    waypoints: list[tuple[float, float]] = field(default_factory=list)
    wp_index: int = 0
    tree: BehaviorTree | None = None
    # Runtime, pedestrians only.
    effective_speed: float = 0.0
    intent: MotionIntent | None = None
    held: bool = False

    def pos(self) -> tuple[float, float]:
        return (self.x, self.y)

    def speed(self) -> float:
        return math.hypot(self.vx, self.vy)

    def snapshot(self) -> AgentSnapshot:
        return AgentSnapshot(id=self.id, kind=self.kind, x=self.x, y=self.y,
                             heading=self.heading, vx=self.vx, vy=self.vy,
                             desired_speed=self.effective_speed if self.kind == "pedestrian"
                             else self.desired_speed)


@dataclass
class EncounterSync:
    ped_id: str
    point: tuple[float, float]
    robot_index: int
    ped_index: int
    hold_index: int
    skip_hold: bool = False
    released: bool = False
    release_cause: str = ""
    release_tick: int | None = None
    hold_logged: bool = False
    ped_reached_tick: int | None = None
    robot_reached_tick: int | None = None


def _path_remaining(pos: tuple[float, float], waypoints: list[tuple[float, float]],
                    wp_index: int, target_index: int) -> float:
    """Distance from pos along waypoints up to and including target_index."""
    if wp_index > target_index:
        return 0.0
    total = math.hypot(waypoints[wp_index][0] - pos[0], waypoints[wp_index][1] - pos[1])
    for i in range(wp_index, target_index):
        total += math.hypot(waypoints[i + 1][0] - waypoints[i][0],
                            waypoints[i + 1][1] - waypoints[i][1])
    return total


class SimEngine:
    def __init__(
        self,
        world: WorldModel,
        plan: PathPlan,
        world_plan: WorldPlan,
        trees: dict[str, BehaviorTree],
        planner: RobotPlanner,
        cfg: SimConfig,
        bundle_id: str = "",
    ):
        self.world = world
        self.plan = plan
        self.cfg = cfg
        self.planner = planner
        self.rng = np.random.default_rng(cfg.seed)
        self.tick = 0
        self.max_ticks = int(round(cfg.max_duration / cfg.dt))
        self.timeout_ticks = int(round(cfg.hold_timeout / cfg.dt))

        self.pedestrians: list[AgentState] = []
        self.syncs: dict[str, EncounterSync] = {}
        rwp = list(world_plan.robot_waypoints)
        self.robot = AgentState(
            id="robot", kind="robot", x=rwp[0][0], y=rwp[0][1],
            heading=self._initial_heading(rwp), radius=cfg.robot_radius,
            desired_speed=cfg.robot_max_speed, waypoints=rwp,
        )
        self._advance_waypoints(self.robot, len(rwp))
        for ped_path in sorted(plan.pedestrians, key=lambda p: p.ped_id):
            wps = list(world_plan.pedestrian_waypoints[ped_path.ped_id])
            agent = AgentState(
                id=ped_path.ped_id, kind="pedestrian", x=wps[0][0], y=wps[0][1],
                heading=self._initial_heading(wps), radius=cfg.ped_radius,
                desired_speed=cfg.ped_desired_speed,
                effective_speed=cfg.ped_desired_speed,
                waypoints=wps, tree=trees.get(ped_path.ped_id),
            )
            self._advance_waypoints(agent, len(wps))
            self.pedestrians.append(agent)
            if ped_path.encounter_node is not None:
                enc_point = world_plan.encounter_points[ped_path.ped_id]
                hold_node = ped_path.hold_or_default()
                sync = EncounterSync(
                    ped_id=ped_path.ped_id,
                    point=enc_point,
                    robot_index=plan.robot_nodes.index(ped_path.encounter_node),
                    ped_index=ped_path.nodes.index(ped_path.encounter_node),
                    hold_index=ped_path.nodes.index(hold_node),
                )
                hold_pt = wps[sync.hold_index]
                if math.hypot(hold_pt[0] - enc_point[0],
                              hold_pt[1] - enc_point[1]) <= cfg.arrival_radius:
                    # Holding at the encounter itself times nothing.
                    sync.skip_hold = True
                    sync.released = True
                self.syncs[ped_path.ped_id] = sync

        self.robot_speeds: deque[float] = deque(maxlen=max(1, int(round(2.0 / cfg.dt))))
        self._queue_next: list[GestureEvent] = []
        self.delivered: dict[str, tuple[int, ...]] = {}
        self._robot_gestures_fired = [False] * len(cfg.robot_gestures)
        self.collision_now = False
        self.trace = SimTrace(config={
            "bundle": bundle_id,
            "planner": getattr(planner, "name", planner.__class__.__name__),
            **cfg.to_doc(),
            "robot_goal": [rwp[-1][0], rwp[-1][1]],
            "groups": {gid: list(ms) for gid, ms in plan.groups.items()},
            "agents_initial": [a.to_doc() for a in self._snapshots()],
        })

    # -- helpers ---------------------------------------------------------

    @staticmethod
    def _initial_heading(wps: list[tuple[float, float]]) -> float:
        if len(wps) >= 2:
            return math.atan2(wps[1][1] - wps[0][1], wps[1][0] - wps[0][0])
        return 0.0

    def _wp_limit(self, agent: AgentState) -> int:
        sync = self.syncs.get(agent.id)
        if agent.kind == "pedestrian" and sync is not None and not sync.released:
            return sync.hold_index + 1
        return len(agent.waypoints)

    def _waypoint_crowded(self, wp: tuple[float, float],
                          exclude_id: str = "") -> bool:
        return any(
            a.id != exclude_id
            and math.hypot(a.x - wp[0], a.y - wp[1]) <= 0.8
            for a in [self.robot] + self.pedestrians
        )

    def _advance_waypoints(self, agent: AgentState, limit: int,
                           skip_ahead: bool = False) -> None:
        def reached(k: int) -> bool:
            radius = self.cfg.arrival_radius
            final = k == len(agent.waypoints) - 1
            if final:
                radius *= FINAL_WAYPOINT_FACTOR
            wx, wy = agent.waypoints[k]
            if not final and self._waypoint_crowded((wx, wy), exclude_id=agent.id):
                # Someone is standing on an intermediate waypoint; social
                # forces keep the agent from touching it, so a close pass-by
                # counts. Final destinations stay strict: stalling short of an
                # occupied goal is the honest outcome.
                radius = max(radius, CROWDED_WAYPOINT_RADIUS)
            return math.hypot(wx - agent.x, wy - agent.y) <= radius

        advanced = True
        while advanced and agent.wp_index < limit:
            advanced = False
            if reached(agent.wp_index):
                agent.wp_index += 1
                advanced = True
            elif skip_ahead and self._waypoint_crowded(
                    agent.waypoints[agent.wp_index], exclude_id=agent.id):
                # Planners legally detour around a people-blocked waypoint;
                # an uncrowded one must be visited (revisit routes stay honest).
                for k in range(agent.wp_index + 1, limit):
                    if reached(k):
                        agent.wp_index = k + 1
                        advanced = True
                        break

    def _snapshots(self) -> list[AgentSnapshot]:
        return [self.robot.snapshot()] + [p.snapshot() for p in self.pedestrians]

    def _robot_mean_speed(self) -> float:
        if not self.robot_speeds:
            return 0.0
        return sum(self.robot_speeds) / len(self.robot_speeds)

    def _rand_unit(self) -> tuple[float, float]:
        ang = float(self.rng.uniform(0.0, 2.0 * math.pi))
        return (math.cos(ang), math.sin(ang))

    # -- step phases -----------------------------------------------------

    def _manager_update(self, events: list[dict]) -> None:
        v_bar = self._robot_mean_speed()
        peds = {p.id: p for p in self.pedestrians}
        for ped_id in sorted(self.syncs):
            sync = self.syncs[ped_id]
            ped = peds[ped_id]
            hold_pt = ped.waypoints[sync.hold_index]

            if not sync.released:
                at_hold = (
                    ped.wp_index >= sync.hold_index
                    and math.hypot(hold_pt[0] - ped.x, hold_pt[1] - ped.y)
                    <= self.cfg.arrival_radius
                )
                ped.held = at_hold
                if at_hold and not sync.hold_logged:
                    events.append({"type": "hold", "ped": ped_id})
                    sync.hold_logged = True
                release_cause = ""
                if self.tick > self.timeout_ticks:
                    release_cause = "timeout"
                elif v_bar > 0.05:
                    robot_rem = _path_remaining(
                        self.robot.pos(), self.robot.waypoints,
                        self.robot.wp_index, sync.robot_index,
                    )
                    ped_rem = _path_remaining(
                        ped.pos(), ped.waypoints, ped.wp_index, sync.ped_index
                    )
                    if robot_rem < (ped_rem / ped.desired_speed) * v_bar:
                        release_cause = "robot"
                if release_cause:
                    sync.released = True
                    sync.release_cause = release_cause
                    sync.release_tick = self.tick
                    ped.held = False
                    events.append({"type": "release", "ped": ped_id,
                                   "cause": release_cause})
            if sync.released and sync.ped_reached_tick is None:
                robot_rem = _path_remaining(
                    self.robot.pos(), self.robot.waypoints,
                    self.robot.wp_index, sync.robot_index,
                )
                ped_rem = _path_remaining(
                    ped.pos(), ped.waypoints, ped.wp_index, sync.ped_index
                )
                nominal = ped.desired_speed
                if robot_rem <= self.cfg.arrival_radius:
                    ped.effective_speed = MAX_SCALE * nominal
                elif v_bar > 0.05:
                    required = ped_rem * v_bar / robot_rem
                    ped.effective_speed = min(MAX_SCALE * nominal,
                                              max(MIN_SCALE * nominal, required))
                else:
                    ped.effective_speed = nominal

            reach_radius = ENCOUNTER_RADIUS_FACTOR * self.cfg.arrival_radius
            if sync.ped_reached_tick is None:
                if math.hypot(sync.point[0] - ped.x, sync.point[1] - ped.y) <= reach_radius:
                    sync.ped_reached_tick = self.tick
                    ped.effective_speed = ped.desired_speed
                    events.append({"type": "encounter_reached", "agent": ped_id,
                                   "ped": ped_id})
            if sync.robot_reached_tick is None:
                if math.hypot(sync.point[0] - self.robot.x,
                              sync.point[1] - self.robot.y) <= reach_radius:
                    sync.robot_reached_tick = self.tick
                    events.append({"type": "encounter_reached", "agent": "robot",
                                   "ped": ped_id})

    def _tick_trees(self, events: list[dict]) -> None:
        elapsed = (self.tick - 1) * self.cfg.dt
        for ped in self.pedestrians:
            ped.intent = None
            if ped.tree is None:
                continue
            limit = self._wp_limit(ped)
            visible = (
                math.hypot(self.robot.x - ped.x, self.robot.y - ped.y)
                <= self.cfg.visibility_range
                and self.world.line_of_sight(ped.pos(), self.robot.pos())
            )
            ctx = TickContext(
                own_id=ped.id,
                own_pose=(ped.x, ped.y, ped.heading),
                robot_pose=(self.robot.x, self.robot.y, self.robot.heading),
                robot_visible=visible,
                elapsed=elapsed,
                dt=self.cfg.dt,
                waypoints_remaining=max(0, limit - ped.wp_index),
                pending_gesture_codes=self.delivered.get(ped.id, ()),
            )
            bt_tick(ped.tree, ctx)
            ped.intent = ctx.intent
            for code, target in ctx.gestures_out:
                ev = GestureEvent(tick=self.tick, from_id=ped.id, to_id=target,
                                  code=code)
                self._queue_next.append(ev)
                events.append(ev.to_doc())
        elapsed_now = self.tick * self.cfg.dt
        for i, (t_g, code, target) in enumerate(self.cfg.robot_gestures):
            if not self._robot_gestures_fired[i] and elapsed_now >= t_g:
                self._robot_gestures_fired[i] = True
                ev = GestureEvent(tick=self.tick, from_id="robot", to_id=target,
                                  code=code)
                self._queue_next.append(ev)
                events.append(ev.to_doc())

    def _integrate_pedestrians(self) -> None:
        frozen = (MotionIntent.STOP, MotionIntent.LOOK_AT_ROBOT)
        positions = {a.id: (a.x, a.y, a.radius) for a in [self.robot] + self.pedestrians}
        for ped in self.pedestrians:
            if ped.held or ped.intent in frozen:
                ped.vx = ped.vy = 0.0
                if ped.intent is MotionIntent.LOOK_AT_ROBOT:
                    ped.heading = math.atan2(self.robot.y - ped.y,
                                             self.robot.x - ped.x)
                continue
            limit = self._wp_limit(ped)
            robot_weight = 1.0
            if ped.intent is MotionIntent.FOLLOW_ROBOT:
                goal = self.robot.pos()
            elif ped.intent is MotionIntent.BLOCK_ROBOT:
                goal = (self.robot.x + BLOCK_STANDOFF * math.cos(self.robot.heading),
                        self.robot.y + BLOCK_STANDOFF * math.sin(self.robot.heading))
                robot_weight = 0.0
            else:
                goal = ped.waypoints[ped.wp_index] if ped.wp_index < limit else None
                if ped.intent is MotionIntent.AVOID_ROBOT:
                    robot_weight = 3.0
            if goal is None:
                ped.vx = ped.vy = 0.0
                continue
            neighbors = []
            for other_id, (ox, oy, orad) in positions.items():
                if other_id == ped.id:
                    continue
                weight = robot_weight if other_id == "robot" else 1.0
                if weight > 0.0:
                    neighbors.append(Neighbor(x=ox, y=oy, radius=orad, weight=weight))
            ax, ay = sfm_accel(
                pos=(positions[ped.id][0], positions[ped.id][1]),
                vel=(ped.vx, ped.vy),
                goal=goal,
                desired_speed=ped.effective_speed,
                radius=ped.radius,
                neighbors=neighbors,
                world=self.world,
                params=self.cfg.sfm,
                rand_unit=self._rand_unit,
            )
            ped.vx += ax * self.cfg.dt
            ped.vy += ay * self.cfg.dt
            cap = SPEED_CAP_FACTOR * ped.effective_speed
            speed = ped.speed()
            if speed > cap:
                scale = cap / speed
                ped.vx *= scale
                ped.vy *= scale
            ped.x += ped.vx * self.cfg.dt
            ped.y += ped.vy * self.cfg.dt
            if ped.speed() > 0.05:
                ped.heading = math.atan2(ped.vy, ped.vx)
            self._advance_waypoints(ped, limit)

    def _update_robot(self) -> None:
        obs = PlannerObservation(
            t=(self.tick - 1) * self.cfg.dt,
            dt=self.cfg.dt,
            x=self.robot.x, y=self.robot.y, heading=self.robot.heading,
            waypoints=tuple(self.robot.waypoints[self.robot.wp_index:]),
            max_speed=self.cfg.robot_max_speed,
            max_turn=self.cfg.robot_max_turn,
            pedestrians=tuple(
                PedObs(id=p.id, x=p.x, y=p.y, vx=p.vx, vy=p.vy, radius=p.radius)
                for p in self.pedestrians
            ),
            groups=dict(self.plan.groups),
        )
        v, omega = self.planner.plan_step(obs)
        v = max(0.0, min(self.cfg.robot_max_speed, float(v)))
        omega = max(-self.cfg.robot_max_turn, min(self.cfg.robot_max_turn, float(omega)))
        self.robot.heading = self.robot.heading + omega * self.cfg.dt
        self.robot.vx = v * math.cos(self.robot.heading)
        self.robot.vy = v * math.sin(self.robot.heading)
        self.robot.x += self.robot.vx * self.cfg.dt
        self.robot.y += self.robot.vy * self.cfg.dt
        self._advance_waypoints(self.robot, len(self.robot.waypoints),
                                skip_ahead=True)
        self.robot_speeds.append(v)

    def step(self) -> None:
        """One dt advance in the fixed phase order."""
        self.tick += 1
        events: list[dict] = []
        self._manager_update(events)
        self._tick_trees(events)
        self._integrate_pedestrians()
        self._update_robot()
        delivered: dict[str, list[int]] = {}
        for ev in self._queue_next:
            if ev.to_id == "broadcast":
                targets = [p.id for p in self.pedestrians] + ["robot"]
            else:
                targets = [ev.to_id]
            for t in targets:
                if t != ev.from_id:
                    delivered.setdefault(t, []).append(ev.code)
        self.delivered = {k: tuple(v) for k, v in delivered.items()}
        self._queue_next = []
        self.collision_now = any(
            math.hypot(p.x - self.robot.x, p.y - self.robot.y)
            < self.cfg.robot_radius + p.radius
            for p in self.pedestrians
        )
        self.trace.append(TickRecord(
            tick=self.tick, t=self.tick * self.cfg.dt,
            agents=self._snapshots(), events=events,
        ))

    def robot_done(self) -> bool:
        return self.robot.wp_index >= len(self.robot.waypoints)

    def run(self) -> SimTrace:
        reason = "timeout"
        while self.tick < self.max_ticks:
            self.step()
            if self.robot_done():
                reason = "goal_reached"
                break
            if self.cfg.stop_on_collision and self.collision_now:
                reason = "collision"
                break
        self.trace.termination_reason = reason
        return self.trace
