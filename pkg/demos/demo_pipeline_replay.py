"""Demo: the full scenario pipeline, offline, from the committed fixtures.

Proposes a scenario, generates paths and behavior trees, applies a
natural-language path edit, and simulates — all replayed from the recorded
fixture store with zero network access.

Usage:
    python3 demos/demo_pipeline_replay.py [out_dir]
"""
import sys
import tempfile
from pathlib import Path

from socnavgen.corpus import load_corpus_inputs, metadata_from_doc
from socnavgen.llm_gateway import LLMGateway
from socnavgen.pipeline import run_pipeline, stage_edit_paths, stage_run

REPO = Path(__file__).resolve().parents[1]


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(
        tempfile.mkdtemp()) / "warehouse_demo"
    inputs = load_corpus_inputs(REPO / "fixtures/corpus_inputs.json")
    meta = metadata_from_doc(inputs["happy_path"]["metadata"])
    gateway = LLMGateway(mode="replay", fixtures_dir=REPO / "fixtures/llm")

    bundle = run_pipeline(REPO / "assets/maps/warehouse/scenegraph.json",
                          meta, out, gateway, seed=7)
    print(f"bundle written to {bundle.root}")
    print(f"validator: {bundle.validate() or 'clean'}")

    plan = bundle.load_plan()
    print(f"robot path ({len(plan.robot_nodes)} nodes): "
          f"{' -> '.join(plan.robot_nodes)}")

    result = stage_edit_paths(bundle, inputs["happy_path"]["edit_instruction"],
                              gateway)
    plan = result.plan
    print(f"after edit ({len(plan.robot_nodes)} nodes): "
          f"{' -> '.join(plan.robot_nodes)}")

    trace, report = stage_run(bundle, "baseline", seed=7)
    print(f"\nsimulation: {trace.termination_reason} at t={trace.ticks[-1].t:.2f}s")
    print(f"  success={report.success} time_to_goal={report.time_to_goal:.2f}s "
          f"path={report.path_length:.2f}m")
    print(f"  personal-space intrusion={report.personal_space_intrusion:.3f} "
          f"min distance={report.min_distance_to_human:.2f}m")
    print(f"  gateway: {gateway.calls} calls, ~{gateway.input_tokens} input "
          f"tokens, est ${gateway.spent():.4f}")


if __name__ == "__main__":
    main()
