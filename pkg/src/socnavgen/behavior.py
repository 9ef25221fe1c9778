"""Behavior trees for simulated pedestrians.

The node vocabulary is data (a loadable library document), trees are parsed
from a small XML dialect (element name = node name, attributes = params,
nesting = children, one root element), and executed tick-by-tick with
reactive Sequence/Fallback semantics.
"""
from __future__ import annotations

import json
import math
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

from .llm_gateway import ChatRequest, ChatResponse, LLMGateway, extract_code_block


class BehaviorError(Exception):
    pass


class XmlError(BehaviorError):
    pass


class UnknownNode(BehaviorError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown behavior node <{name}>")


class BadParams(BehaviorError):
    def __init__(self, node: str, detail: str):
        self.node = node
        self.detail = detail
        super().__init__(f"bad params for <{node}>: {detail}")


class MultipleRoots(BehaviorError):
    pass


class Status(Enum):
    SUCCESS = "success"
    FAILURE = "failure"
    RUNNING = "running"


class MotionIntent(Enum):
    NAVIGATE = "navigate"
    STOP = "stop"
    LOOK_AT_ROBOT = "look_at_robot"
    AVOID_ROBOT = "avoid_robot"
    FOLLOW_ROBOT = "follow_robot"
    BLOCK_ROBOT = "block_robot"


PARAM_TYPES = ("int", "float", "token")


@dataclass(frozen=True)
class ParamSpec:
    name: str
    type: str
    required: bool = True


@dataclass(frozen=True)
class BTNodeSpec:
    name: str
    kind: str  # control | condition | action
    params: tuple[ParamSpec, ...] = ()
    doc: str = ""


class NodeLibrary:
    def __init__(self, entries: list[BTNodeSpec]):
        if not entries:
            raise ValueError("node library may not be empty")
        names = [e.name for e in entries]
        if len(set(names)) != len(names):
            raise ValueError("node library names must be unique")
        for e in entries:
            if e.kind not in ("control", "condition", "action"):
                raise ValueError(f"bad node kind {e.kind!r} for {e.name}")
            if e.kind == "control" and e.params:
                raise ValueError(f"control node {e.name} must not declare params")
            for p in e.params:
                if p.type not in PARAM_TYPES:
                    raise ValueError(f"bad param type {p.type!r} on {e.name}.{p.name}")
        for required in ("Sequence", "Fallback", "RegularNav"):
            if required not in names:
                raise ValueError(f"node library must contain {required}")
        self.entries = list(entries)
        self._by_name = {e.name: e for e in entries}

    def get(self, name: str) -> BTNodeSpec:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownNode(name) from None

    def describe(self) -> str:
        """One line per node, for embedding in generation prompts."""
        lines = []
        for e in self.entries:
            sig = ", ".join(f"{p.name}: {p.type}" for p in e.params)
            lines.append(f"- {e.name}({sig}) [{e.kind}]: {e.doc}")
        return "\n".join(lines)

    @staticmethod
    def from_doc(doc: dict) -> "NodeLibrary":
        entries = []
        for e in doc["entries"]:
            params = tuple(
                ParamSpec(name=p["name"], type=p["type"],
                          required=bool(p.get("required", True)))
                for p in e.get("params", [])
            )
            entries.append(BTNodeSpec(name=e["name"], kind=e["kind"],
                                      params=params, doc=e.get("doc", "")))
        return NodeLibrary(entries)

    @staticmethod
    def load(path: str | Path) -> "NodeLibrary":
        return NodeLibrary.from_doc(json.loads(Path(path).read_text(encoding="utf-8")))


def default_library() -> NodeLibrary:
    data = resources.files("socnavgen.data").joinpath("node_library.json")
    return NodeLibrary.from_doc(json.loads(data.read_text(encoding="utf-8")))


@dataclass
class BTNode:
    name: str
    params: dict[str, object] = field(default_factory=dict)
    children: list["BTNode"] = field(default_factory=list)


@dataclass
class BehaviorTree:
    root: BTNode
    owner: str = ""

    def __post_init__(self) -> None:
        self._state: dict[tuple[int, ...], dict] = {}

    def reset(self) -> None:
        self._state.clear()

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, BehaviorTree)
                and self.root == other.root and self.owner == other.owner)


def _parse_param(spec: ParamSpec, raw: str):
    if spec.type == "int":
        try:
            return int(raw)
        except ValueError:
            raise BadParams("", f"{spec.name} must be int, got {raw!r}") from None
    if spec.type == "float":
        try:
            value = float(raw)
        except ValueError:
            raise BadParams("", f"{spec.name} must be float, got {raw!r}") from None
        if not math.isfinite(value):
            raise BadParams("", f"{spec.name} must be finite, got {raw!r}")
        return value
    if not raw:
        raise BadParams("", f"{spec.name} must be a non-empty token")
    return raw


_XML_DECL_RE = re.compile(r"^\s*<\?xml[^>]*\?>", re.DOTALL)


def parse_bt(xml: str, lib: NodeLibrary, owner: str = "") -> BehaviorTree:
    """Parse the XML dialect against a node library, enforcing all tree rules."""
    body = _XML_DECL_RE.sub("", xml, count=1)
    try:
        wrapper = ET.fromstring(f"<__doc__>{body}</__doc__>")
    except ET.ParseError as exc:
        raise XmlError(f"malformed XML: {exc}") from exc
    elements = list(wrapper)
    if not elements:
        raise XmlError("document contains no elements")
    if len(elements) > 1:
        raise MultipleRoots(
            f"expected a single root element, found {len(elements)}: "
            + ", ".join(el.tag for el in elements)
        )

    def build(el: ET.Element) -> BTNode:
        spec = lib.get(el.tag)
        children = list(el)
        if spec.kind == "control":
            if el.attrib:
                raise BadParams(el.tag, "control nodes take no params")
            if not children:
                raise BadParams(el.tag, "control node needs at least one child")
        else:
            if children:
                raise BadParams(el.tag, "leaf node cannot have children")
        params: dict[str, object] = {}
        declared = {p.name: p for p in spec.params}
        for attr, raw in el.attrib.items():
            if attr not in declared:
                raise BadParams(el.tag, f"unknown param {attr!r}")
            try:
                params[attr] = _parse_param(declared[attr], raw)
            except BadParams as exc:
                raise BadParams(el.tag, exc.detail) from None
        for p in spec.params:
            if p.required and p.name not in params:
                raise BadParams(el.tag, f"missing required param {p.name!r}")
        return BTNode(name=el.tag, params=params, children=[build(c) for c in children])

    return BehaviorTree(root=build(elements[0]), owner=owner)


def _format_value(value: object) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_bt(t: BehaviorTree, lib: NodeLibrary | None = None) -> str:
    """Deterministic XML text; attributes follow library declaration order."""
    lib = lib or default_library()

    def order(node: BTNode) -> list[str]:
        spec = lib.get(node.name)
        declared = [p.name for p in spec.params if p.name in node.params]
        extras = [k for k in node.params if k not in declared]
        return declared + sorted(extras)

    def render(node: BTNode, depth: int) -> list[str]:
        pad = "  " * depth
        attrs = "".join(
            f' {k}="{_format_value(node.params[k])}"' for k in order(node)
        )
        if not node.children:
            return [f"{pad}<{node.name}{attrs}/>"]
        lines = [f"{pad}<{node.name}{attrs}>"]
        for child in node.children:
            lines.extend(render(child, depth + 1))
        lines.append(f"{pad}</{node.name}>")
        return lines

    return "\n".join(render(t.root, 0)) + "\n"


@dataclass
class TickContext:
    """Read view of the world for one agent's tick, plus its write channel.

    The write channel accepts at most one motion intent per tick (first write
    wins, which gives leftmost-active-action priority) and any number of
    gesture emissions.
    """

    own_id: str
    own_pose: tuple[float, float, float]
    robot_pose: tuple[float, float, float]
    robot_visible: bool
    elapsed: float
    dt: float
    waypoints_remaining: int = 0
    pending_gesture_codes: tuple[int, ...] = ()
    intent: MotionIntent | None = None
    gestures_out: list[tuple[int, str]] = field(default_factory=list)

    def set_intent(self, intent: MotionIntent) -> None:
        if self.intent is None:
            self.intent = intent

    def emit_gesture(self, code: int, target: str) -> None:
        self.gestures_out.append((code, target))

    def robot_distance(self) -> float:
        dx = self.robot_pose[0] - self.own_pose[0]
        dy = self.robot_pose[1] - self.own_pose[1]
        return math.hypot(dx, dy)


def _ticks_needed(secs: float, dt: float) -> int:
    return max(1, math.ceil(secs / dt - 1e-9))


def _tick_node(node: BTNode, path: tuple[int, ...], ctx: TickContext,
               state: dict[tuple[int, ...], dict]) -> Status:
    name = node.name

    if name == "Sequence":
        for i, child in enumerate(node.children):
            s = _tick_node(child, path + (i,), ctx, state)
            if s is not Status.SUCCESS:
                return s
        return Status.SUCCESS
    if name == "Fallback":
        for i, child in enumerate(node.children):
            s = _tick_node(child, path + (i,), ctx, state)
            if s is not Status.FAILURE:
                return s
        return Status.FAILURE

    if name == "IsRobotVisible":
        ok = ctx.robot_visible and ctx.robot_distance() <= float(node.params["dist_m"])
        return Status.SUCCESS if ok else Status.FAILURE
    if name == "IsRobotNearby":
        ok = ctx.robot_distance() <= float(node.params["dist_m"])
        return Status.SUCCESS if ok else Status.FAILURE
    if name == "TimeExpired":
        return Status.SUCCESS if ctx.elapsed >= float(node.params["secs"]) else Status.FAILURE
    if name == "GestureReceived":
        ok = int(node.params["code"]) in ctx.pending_gesture_codes
        return Status.SUCCESS if ok else Status.FAILURE

    st = state.setdefault(path, {})

    if name == "RegularNav":
        ctx.set_intent(MotionIntent.NAVIGATE)
        return Status.RUNNING if ctx.waypoints_remaining > 0 else Status.SUCCESS
    if name == "AvoidRobot":
        ctx.set_intent(MotionIntent.AVOID_ROBOT)
        return Status.RUNNING if ctx.waypoints_remaining > 0 else Status.SUCCESS

    if name in ("StopAndWait", "LookAtRobot", "FollowRobot", "BlockRobot"):
        intents = {
            "StopAndWait": MotionIntent.STOP,
            "LookAtRobot": MotionIntent.LOOK_AT_ROBOT,
            "FollowRobot": MotionIntent.FOLLOW_ROBOT,
            "BlockRobot": MotionIntent.BLOCK_ROBOT,
        }
        if st.get("done"):
            return Status.SUCCESS
        ctx.set_intent(intents[name])
        st["ticks"] = st.get("ticks", 0) + 1
        if st["ticks"] >= _ticks_needed(float(node.params["secs"]), ctx.dt):
            st["done"] = True
            return Status.SUCCESS
        return Status.RUNNING

    if name == "MakeGesture":
        if not st.get("emitted"):
            ctx.emit_gesture(int(node.params["code"]), str(node.params["target"]))
            st["emitted"] = True
        return Status.SUCCESS

    if name == "WaitForGesture":
        if "latch" in st:
            return st["latch"]
        if int(node.params["code"]) in ctx.pending_gesture_codes:
            st["latch"] = Status.SUCCESS
            return Status.SUCCESS
        st["ticks"] = st.get("ticks", 0) + 1
        if st["ticks"] * ctx.dt >= float(node.params["timeout_s"]) - 1e-9:
            st["latch"] = Status.FAILURE
            return Status.FAILURE
        ctx.set_intent(MotionIntent.STOP)
        return Status.RUNNING

    # Library entries without built-in semantics behave as inert successes so
    # user-extended libraries still execute.
    return Status.SUCCESS


def tick(t: BehaviorTree, ctx: TickContext) -> Status:
    """Advance the tree one tick.

    Reactive semantics: composites re-evaluate from the left every tick.
    All per-node state (timers, latches, emission flags) clears when the
    root returns a final status, so completed trees restart fresh.
    """
    status = _tick_node(t.root, (), ctx, t._state)
    if status is not Status.RUNNING:
        t.reset()
    return status


def build_bt_prompt(ped_behavior: str, ped_id: str, lib: NodeLibrary,
                    examples_text: str, rules_text: str,
                    model_id: str = "", naive: bool = False) -> ChatRequest:
    """Prompt asking for one pedestrian's tree in the XML dialect."""
    from .llm_gateway import DEFAULT_MODEL

    if naive:
        system = (
            "You control simulated pedestrians. Output a behavior tree in XML "
            "inside a fenced code block."
        )
        user = f"Pedestrian '{ped_id}' should behave as follows: {ped_behavior}"
    else:
        system = (
            "You are writing behavior trees for simulated pedestrians in a "
            "2D social-navigation simulator.\n\n"
            "Available behavior tree nodes:\n"
            f"{lib.describe()}\n\n"
            f"{rules_text}"
        )
        user = (
            f"{examples_text}\n\n"
            f"Now write the behavior tree for pedestrian '{ped_id}'.\n"
            f"Required behavior: {ped_behavior}\n\n"
            "Reply with a single fenced ```xml code block containing exactly "
            "one root element."
        )
    return ChatRequest(system_prompt=system, turns=(("user", user),),
                       model_id=model_id or DEFAULT_MODEL)


def generate_bt(ped, lib: NodeLibrary, gateway: LLMGateway,
                max_attempts: int = 3, prompt: ChatRequest | None = None) -> BehaviorTree:
    """Query for a pedestrian's tree, re-querying with the exact parse error."""
    if prompt is None:
        from .scenario_proposal import load_prompt_text

        prompt = build_bt_prompt(
            ped.behavior_description, ped.ped_id, lib,
            examples_text=load_prompt_text("bt_examples.txt"),
            rules_text=load_prompt_text("bt_rules.txt"),
        )

    def validate(resp: ChatResponse) -> BehaviorTree:
        return parse_bt(extract_code_block(resp.text), lib, owner=ped.ped_id)

    tree, _ = gateway.query_with_repair(prompt, validate, max_attempts)
    return tree
