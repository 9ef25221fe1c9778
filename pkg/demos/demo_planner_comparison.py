"""Demo: compare the three built-in planners on the committed fixtures.

Runs baseline, social and group-aware planners on the same bundle and seed
and prints the metric comparison table.

Usage:
    python3 demos/demo_planner_comparison.py [human_on_path|group_crossing]
"""
import shutil
import sys
import tempfile
from pathlib import Path

from socnavgen.bundle import ScenarioBundle, run_scenario
from socnavgen.metrics import compare, render_comparison
from socnavgen.sim.planners import make_planner

REPO = Path(__file__).resolve().parents[1]


def main():
    name = sys.argv[1] if len(sys.argv) > 1 else "group_crossing"
    src = REPO / "fixtures" / "bundles" / name
    with tempfile.TemporaryDirectory() as td:
        bundle = ScenarioBundle(shutil.copytree(src, Path(td) / name))
        reports = {}
        for planner_name in ("baseline", "social", "group"):
            trace, report = run_scenario(bundle, make_planner(planner_name),
                                         save=False)
            reports[planner_name] = report
            print(f"{planner_name:9s} -> {trace.termination_reason} "
                  f"({trace.ticks[-1].t:.1f}s)")
        print()
        print(render_comparison(compare(reports)))


if __name__ == "__main__":
    main()
