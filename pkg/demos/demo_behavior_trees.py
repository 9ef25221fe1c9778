"""Demo: behavior-tree parsing, serialization and ticking.

Ticks a yield-and-wave tree through a scripted robot fly-by and prints the
status and motion intent per phase.

Usage:
    python3 demos/demo_behavior_trees.py
"""
from socnavgen.behavior import TickContext, default_library, parse_bt, serialize_bt, tick

XML = """
<Fallback>
  <Sequence>
    <IsRobotNearby dist_m="2.0"/>
    <StopAndWait secs="1.0"/>
    <MakeGesture code="2" target="robot"/>
  </Sequence>
  <RegularNav/>
</Fallback>
"""


def main():
    lib = default_library()
    tree = parse_bt(XML, lib, owner="p1")
    print("canonical serialization:")
    print(serialize_bt(tree, lib))

    # Robot approaches, lingers, then leaves.
    distances = [6.0] * 10 + [1.5] * 30 + [8.0] * 10
    last = None
    for i, d in enumerate(distances):
        ctx = TickContext(own_id="p1", own_pose=(0, 0, 0),
                          robot_pose=(d, 0, 0), robot_visible=True,
                          elapsed=i * 0.05, dt=0.05, waypoints_remaining=2)
        status = tick(tree, ctx)
        state = (status.name, ctx.intent.name if ctx.intent else None,
                 bool(ctx.gestures_out))
        if state != last:
            print(f"tick {i:3d} robot at {d:3.1f} m -> {status.name:8s} "
                  f"intent={state[1]} gesture={ctx.gestures_out or '-'}")
            last = state


if __name__ == "__main__":
    main()
