"""Simulation traces: line-delimited JSON with a config header record.

A trace is the immutable evidence of one run: per-tick agent snapshots,
gesture and scenario-manager events embedded with type tags, and the
termination reason. Serialization round-trips floats exactly, so metrics on
a reloaded trace equal metrics on the in-memory one.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path


@dataclass(frozen=True)
class GestureEvent:
    tick: int
    from_id: str
    to_id: str
    code: int

    def __post_init__(self) -> None:
        if self.code < 0:
            raise ValueError("gesture code must be >= 0")

    def to_doc(self) -> dict:
        return {"type": "gesture", "from": self.from_id, "to": self.to_id,
                "code": self.code}


@dataclass
class AgentSnapshot:
    id: str
    kind: str
    x: float
    y: float
    heading: float
    vx: float
    vy: float
    desired_speed: float

    def to_doc(self) -> dict:
        return {"id": self.id, "kind": self.kind, "x": self.x, "y": self.y,
                "h": self.heading, "vx": self.vx, "vy": self.vy,
                "ds": self.desired_speed}

    @staticmethod
    def from_doc(doc: dict) -> "AgentSnapshot":
        return AgentSnapshot(id=doc["id"], kind=doc["kind"], x=doc["x"], y=doc["y"],
                             heading=doc["h"], vx=doc["vx"], vy=doc["vy"],
                             desired_speed=doc["ds"])


@dataclass
class TickRecord:
    tick: int
    t: float
    agents: list[AgentSnapshot]
    events: list[dict] = field(default_factory=list)

    def to_doc(self) -> dict:
        return {"type": "tick", "tick": self.tick, "t": self.t,
                "agents": [a.to_doc() for a in self.agents],
                "events": self.events}


@dataclass
class SimTrace:
    config: dict
    ticks: list[TickRecord] = field(default_factory=list)
    termination_reason: str = "unterminated"

    def append(self, record: TickRecord) -> None:
        if self.ticks and record.tick <= self.ticks[-1].tick:
            raise ValueError("tick stamps must be monotone")
        self.ticks.append(record)

    def robot_snapshots(self) -> list[AgentSnapshot]:
        return [next(a for a in rec.agents if a.kind == "robot") for rec in self.ticks]

    def pedestrian_snapshots(self, rec: TickRecord) -> list[AgentSnapshot]:
        return [a for a in rec.agents if a.kind == "pedestrian"]

    def events(self, kind: str | None = None) -> list[tuple[int, dict]]:
        out = []
        for rec in self.ticks:
            for ev in rec.events:
                if kind is None or ev.get("type") == kind:
                    out.append((rec.tick, ev))
        return out

    def to_jsonl(self) -> str:
        lines = [json.dumps({"type": "config", **self.config},
                            separators=(",", ":"), ensure_ascii=False)]
        for rec in self.ticks:
            lines.append(json.dumps(rec.to_doc(), separators=(",", ":"),
                                    ensure_ascii=False))
        lines.append(json.dumps({"type": "end", "reason": self.termination_reason},
                                separators=(",", ":"), ensure_ascii=False))
        return "\n".join(lines) + "\n"

    def sha256(self) -> str:
        return hashlib.sha256(self.to_jsonl().encode("utf-8")).hexdigest()

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")

    @staticmethod
    def load(path: str | Path) -> "SimTrace":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        if not lines:
            raise ValueError(f"empty trace file {path}")
        header = json.loads(lines[0])
        if header.pop("type", None) != "config":
            raise ValueError("trace must start with a config record")
        trace = SimTrace(config=header)
        for line in lines[1:]:
            doc = json.loads(line)
            if doc["type"] == "tick":
                trace.append(TickRecord(
                    tick=doc["tick"], t=doc["t"],
                    agents=[AgentSnapshot.from_doc(a) for a in doc["agents"]],
                    events=doc.get("events", []),
                ))
            elif doc["type"] == "end":
                trace.termination_reason = doc["reason"]
        return trace
