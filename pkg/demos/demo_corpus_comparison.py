"""Demo: structured vs naive prompting pass rates over the fixture corpus.

Replays the committed 5-scenarios-by-2-maps corpus in both prompting modes
(first response accepted, no repair) and prints per-case outcomes.

Usage:
    python3 demos/demo_corpus_comparison.py
"""
import tempfile
from pathlib import Path

from socnavgen.corpus import compare_modes, corpus_cases, load_corpus_inputs
from socnavgen.llm_gateway import LLMGateway

REPO = Path(__file__).resolve().parents[1]


def main():
    inputs = load_corpus_inputs(REPO / "fixtures/corpus_inputs.json")
    maps = {n: REPO / "assets" / "maps" / n / "scenegraph.json"
            for n in ("warehouse", "office")}
    gateway = LLMGateway(mode="replay", fixtures_dir=REPO / "fixtures/llm")
    with tempfile.TemporaryDirectory() as td:
        result = compare_modes(corpus_cases(inputs), maps, gateway, td)

    for outcome in result["outcomes"]:
        status = "pass" if outcome.passed else f"FAIL at {outcome.failed_stage}"
        print(f"{outcome.mode:11s} {outcome.case_id:28s} {status}")
        if not outcome.passed:
            print(f"{'':40s}   {outcome.error[:90]}")
    rates = result["rates"]
    print(f"\nstructured: {rates['structured']:.0%}   naive: {rates['naive']:.0%}   "
          f"gap: {rates['structured'] - rates['naive']:+.0%}")


if __name__ == "__main__":
    main()
