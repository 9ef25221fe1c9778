"""Proxemics and navigation metrics over simulation traces.

All metrics are pure functions of the trace (plus explicit parameters), so a
reloaded trace scores identically to the in-memory one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field


from .sim.trace import SimTrace

PERSONAL_SPACE_RADIUS = 1.2  # Hall's personal-zone boundary, configurable per run
GROUP_INFLATION = 0.5

METRIC_DEFINITIONS = {
    "personal_space_intrusion":
        "fraction of ticks with any pedestrian closer than the personal radius "
        "(center-to-center)",
    "group_space_intrusion":
        "fraction of ticks with the robot center inside any group's inflated "
        "convex hull",
    "min_distance_to_human": "minimum center-to-center robot-pedestrian distance",
    "collisions": "contiguous robot-pedestrian overlap episodes (sum of radii)",
    "time_to_goal": "first time the robot is within the arrival radius of its goal",
    "path_length": "integrated robot path length",
    "success": "robot reached its final waypoint before termination",
}


class MetricsError(Exception):
    pass


class EmptyTrace(MetricsError):
    pass


class MismatchedBundles(MetricsError):
    pass


@dataclass
class MetricsReport:
    personal_space_intrusion: float
    group_space_intrusion: float
    min_distance_to_human: float
    collisions: int
    time_to_goal: float
    path_length: float
    success: bool
    bundle: str = ""
    planner: str = ""
    seed: int = 0
    definitions: dict = field(default_factory=lambda: dict(METRIC_DEFINITIONS))

    def to_doc(self) -> dict:
        def finite(v: float):
            return v if math.isfinite(v) else None

        return {
            "personal_space_intrusion": self.personal_space_intrusion,
            "group_space_intrusion": self.group_space_intrusion,
            "min_distance_to_human": finite(self.min_distance_to_human),
            "collisions": self.collisions,
            "time_to_goal": finite(self.time_to_goal),
            "path_length": self.path_length,
            "success": self.success,
            "bundle": self.bundle,
            "planner": self.planner,
            "seed": self.seed,
            "definitions": self.definitions,
        }

    @staticmethod
    def from_doc(doc: dict) -> "MetricsReport":
        def infinite(v):
            return float("inf") if v is None else float(v)

        return MetricsReport(
            personal_space_intrusion=float(doc["personal_space_intrusion"]),
            group_space_intrusion=float(doc["group_space_intrusion"]),
            min_distance_to_human=infinite(doc["min_distance_to_human"]),
            collisions=int(doc["collisions"]),
            time_to_goal=infinite(doc["time_to_goal"]),
            path_length=float(doc["path_length"]),
            success=bool(doc["success"]),
            bundle=doc.get("bundle", ""),
            planner=doc.get("planner", ""),
            seed=int(doc.get("seed", 0)),
            definitions=doc.get("definitions", dict(METRIC_DEFINITIONS)),
        )


def _positions(trace: SimTrace):
    """(robot positions, per-tick pedestrian position arrays)."""
    robot = []
    peds = []
    for rec in trace.ticks:
        r = next(a for a in rec.agents if a.kind == "robot")
        robot.append((r.x, r.y))
        peds.append([(a.x, a.y, a.id) for a in rec.agents if a.kind == "pedestrian"])
    return robot, peds


def personal_space_intrusion(trace: SimTrace, radius: float = PERSONAL_SPACE_RADIUS) -> float:
    if not trace.ticks:
        raise EmptyTrace("trace has no ticks")
    robot, peds = _positions(trace)
    hits = 0
    for (rx, ry), row in zip(robot, peds):
        if any(math.hypot(px - rx, py - ry) < radius for px, py, _ in row):
            hits += 1
    return hits / len(trace.ticks)


def _convex_hull(points: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Andrew's monotone chain; returns hull vertices in CCW order."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[tuple[float, float]] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[float, float]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _segment_distance(p: tuple[float, float], a: tuple[float, float],
                      b: tuple[float, float]) -> float:
    ax, ay = a
    bx, by = b
    px, py = p
    dx, dy = bx - ax, by - ay
    seg2 = dx * dx + dy * dy
    if seg2 < 1e-18:
        return math.hypot(px - ax, py - ay)
    t = max(0.0, min(1.0, ((px - ax) * dx + (py - ay) * dy) / seg2))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def point_in_inflated_hull(point: tuple[float, float],
                           members: list[tuple[float, float]],
                           inflation: float) -> bool:
    """True when the point lies inside the convex hull of the member positions
    inflated by ``inflation`` meters (degenerates to a capsule for 2 members)."""
    hull = _convex_hull(members)
    if not hull:
        return False
    if len(hull) == 1:
        return math.hypot(point[0] - hull[0][0], point[1] - hull[0][1]) <= inflation
    if len(hull) == 2:
        return _segment_distance(point, hull[0], hull[1]) <= inflation
    inside = True
    for i in range(len(hull)):
        a = hull[i]
        b = hull[(i + 1) % len(hull)]
        cross = (b[0] - a[0]) * (point[1] - a[1]) - (b[1] - a[1]) * (point[0] - a[0])
        if cross < 0:
            inside = False
            break
    if inside:
        return True
    return min(
        _segment_distance(point, hull[i], hull[(i + 1) % len(hull)])
        for i in range(len(hull))
    ) <= inflation


def group_space_intrusion(trace: SimTrace, groups: dict[str, list[str]] | None = None,
                          inflation: float = GROUP_INFLATION) -> float:
    if groups is None:
        groups = trace.config.get("groups", {})
    groups = {gid: list(ms) for gid, ms in groups.items() if len(ms) >= 2}
    if not groups or not trace.ticks:
        return 0.0
    robot, peds = _positions(trace)
    hits = 0
    for (rx, ry), row in zip(robot, peds):
        pos_by_id = {pid: (px, py) for px, py, pid in row}
        intruded = False
        for members in groups.values():
            pts = [pos_by_id[m] for m in members if m in pos_by_id]
            if len(pts) >= 2 and point_in_inflated_hull((rx, ry), pts, inflation):
                intruded = True
                break
        if intruded:
            hits += 1
    return hits / len(trace.ticks)


def nav_metrics(trace: SimTrace) -> tuple[float, float, float, int, bool]:
    """(time_to_goal, path_length, min_distance, collisions, success)."""
    if not trace.ticks:
        raise EmptyTrace("trace has no ticks")
    goal = trace.config.get("robot_goal")
    arrival = float(trace.config.get("arrival_radius", 0.4))
    r_robot = float(trace.config.get("robot_radius", 0.3))
    r_ped = float(trace.config.get("ped_radius", 0.3))
    robot, peds = _positions(trace)

    success = trace.termination_reason == "goal_reached"
    time_to_goal = float("inf")
    if goal is not None:
        for rec, (rx, ry) in zip(trace.ticks, robot):
            if math.hypot(rx - goal[0], ry - goal[1]) <= arrival:
                time_to_goal = rec.t
                break
    if not success:
        time_to_goal = float("inf")

    path_length = 0.0
    for (x0, y0), (x1, y1) in zip(robot, robot[1:]):
        path_length += math.hypot(x1 - x0, y1 - y0)

    min_distance = float("inf")
    ped_ids = sorted({pid for row in peds for _, _, pid in row})
    overlapping = {pid: False for pid in ped_ids}
    collisions = 0
    for (rx, ry), row in zip(robot, peds):
        seen = set()
        for px, py, pid in row:
            d = math.hypot(px - rx, py - ry)
            min_distance = min(min_distance, d)
            seen.add(pid)
            if d < r_robot + r_ped:
                if not overlapping[pid]:
                    collisions += 1
                overlapping[pid] = True
            else:
                overlapping[pid] = False
        for pid in set(ped_ids) - seen:
            overlapping[pid] = False
    return time_to_goal, path_length, min_distance, collisions, success


def compute_metrics(trace: SimTrace, psi_radius: float = PERSONAL_SPACE_RADIUS,
                    group_inflation: float = GROUP_INFLATION) -> MetricsReport:
    time_to_goal, path_length, min_distance, collisions, success = nav_metrics(trace)
    return MetricsReport(
        personal_space_intrusion=personal_space_intrusion(trace, psi_radius),
        group_space_intrusion=group_space_intrusion(trace, inflation=group_inflation),
        min_distance_to_human=min_distance,
        collisions=collisions,
        time_to_goal=time_to_goal,
        path_length=path_length,
        success=success,
        bundle=trace.config.get("bundle", ""),
        planner=trace.config.get("planner", ""),
        seed=int(trace.config.get("seed", 0)),
    )


# Lower is better unless listed here.
_HIGHER_BETTER = {"min_distance_to_human", "success"}
_TABLE_METRICS = [
    "personal_space_intrusion", "group_space_intrusion", "min_distance_to_human",
    "collisions", "time_to_goal", "path_length", "success",
]


def compare(reports: dict[str, MetricsReport]) -> dict:
    """Side-by-side table with best-per-metric markers.

    All reports must come from the same bundle and seed, otherwise the
    comparison is meaningless and :class:`MismatchedBundles` is raised.
    """
    if len(reports) < 2:
        raise MismatchedBundles("need at least 2 reports to compare")
    bundles = {(r.bundle, r.seed) for r in reports.values()}
    if len(bundles) != 1:
        raise MismatchedBundles(f"reports span different bundle/seed pairs: {bundles}")

    planners = sorted(reports)
    table: dict[str, dict] = {}
    best: dict[str, list[str]] = {}
    for metric in _TABLE_METRICS:
        values = {}
        for p in planners:
            v = getattr(reports[p], metric)
            values[p] = float(v) if not isinstance(v, bool) else bool(v)
        table[metric] = values
        numeric = {p: (float(v) if not isinstance(v, bool) else float(v))
                   for p, v in values.items()}
        finite = {p: v for p, v in numeric.items() if math.isfinite(v)}
        if not finite:
            best[metric] = []
            continue
        pick = max if metric in _HIGHER_BETTER else min
        target = pick(finite.values())
        winners = [p for p, v in finite.items() if v == target]
        # A tie across every planner marks nobody as strictly best.
        best[metric] = winners if len(winners) < len(planners) else []
    return {
        "bundle": next(iter(reports.values())).bundle,
        "seed": next(iter(reports.values())).seed,
        "planners": planners,
        "metrics": table,
        "best": best,
    }


def render_comparison(table: dict) -> str:
    planners = table["planners"]
    name_w = max(len(m) for m in table["metrics"])
    col_w = max(12, max(len(p) for p in planners) + 2)
    lines = [f"bundle={table['bundle']} seed={table['seed']}"]
    header = " " * (name_w + 2) + "".join(p.rjust(col_w) for p in planners)
    lines.append(header)
    for metric, values in table["metrics"].items():
        cells = []
        for p in planners:
            v = values[p]
            if isinstance(v, bool):
                s = "yes" if v else "no"
            elif isinstance(v, float) and not math.isfinite(v):
                s = "inf"
            elif isinstance(v, float):
                s = f"{v:.3f}"
            else:
                s = str(v)
            if p in table["best"].get(metric, []):
                s += "*"
            cells.append(s.rjust(col_w))
        lines.append(metric.ljust(name_w + 2) + "".join(cells))
    lines.append("(* best per metric)")
    return "\n".join(lines) + "\n"
