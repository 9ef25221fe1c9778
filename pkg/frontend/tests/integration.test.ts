// Integration against the real replay-mode server: the scripted UI session
// must produce a bundle byte-identical to the CLI pipeline + edit flow, and
// a scripted warehouse annotation must pass validate-map.

import { ChildProcess, spawn, spawnSync } from "node:child_process";
import { mkdtempSync, readdirSync, readFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join, relative } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { AnnotationSession } from "../src/annotation.js";
import type { SceneGraphDoc } from "../src/types.js";

const REPO = dirname(dirname(dirname(fileURLToPath(import.meta.url))));
const FIXTURES = join(REPO, "fixtures", "llm");
const MAPS_DIR = join(REPO, "assets", "maps");
const PORT = 8751;

const inputs = JSON.parse(
  readFileSync(join(REPO, "fixtures", "corpus_inputs.json"), "utf-8"),
);
const happyMeta = inputs.happy_path.metadata;
const editInstruction: string = inputs.happy_path.edit_instruction;

let server: ChildProcess;
let serverRoot: string;
let cliRoot: string;
const api = new ApiClient(`http://127.0.0.1:${PORT}`);

function cli(args: string[]): void {
  const result = spawnSync(
    "python3",
    ["-m", "socnavgen.cli", "--llm-mode", "replay", "--fixtures", FIXTURES, ...args],
    { cwd: REPO, encoding: "utf-8" },
  );
  expect(result.status, result.stderr || result.stdout).toBe(0);
}

function treeBytes(root: string): Map<string, Buffer> {
  const out = new Map<string, Buffer>();
  const walk = (dir: string) => {
    for (const entry of readdirSync(dir, { withFileTypes: true })) {
      const full = join(dir, entry.name);
      if (entry.isDirectory()) walk(full);
      else out.set(relative(root, full), readFileSync(full));
    }
  };
  walk(root);
  return out;
}

async function waitForServer(): Promise<void> {
  for (let i = 0; i < 100; i++) {
    try {
      const res = await fetch(`http://127.0.0.1:${PORT}/api/maps`);
      if (res.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 200));
  }
  throw new Error("server did not come up");
}

beforeAll(async () => {
  serverRoot = mkdtempSync(join(tmpdir(), "ui-bundles-"));
  cliRoot = mkdtempSync(join(tmpdir(), "cli-bundles-"));
  server = spawn(
    "python3",
    ["-m", "socnavgen.cli", "--llm-mode", "replay", "--fixtures", FIXTURES,
     "serve", "--port", String(PORT), "--bundle-root", serverRoot,
     "--maps-dir", MAPS_DIR],
    { cwd: REPO, stdio: "ignore" },
  );
  await waitForServer();
}, 60_000);

afterAll(() => {
  server?.kill();
  rmSync(serverRoot, { recursive: true, force: true });
  rmSync(cliRoot, { recursive: true, force: true });
});

describe("scripted UI session", () => {
  it("annotating the warehouse graph exports cleanly and passes validate-map", async () => {
    const maps = await api.listMaps();
    const warehouse = maps.find((m) => m.name === "warehouse");
    expect(warehouse?.graph).toBeTruthy();
    const reference = warehouse!.graph as SceneGraphDoc;

    // Scripted annotation: place the 12 warehouse nodes and 14 edges through
    // the interactive session operations (click-place + two-node selection).
    const session = new AnnotationSession(reference.meta, "warehouse");
    for (const node of reference.nodes) {
      session.placeNode(node.pixel[0], node.pixel[1], node.id, node.name,
                        node.semantic_type);
    }
    for (const edge of reference.edges) {
      session.select(edge.endpoints[0]);
      const created = session.select(edge.endpoints[1], edge.semantic_type);
      expect(created).not.toBeNull();
    }
    session.schemaNote = reference.schema_note;
    expect(session.nodes).toHaveLength(12);
    expect(session.edges).toHaveLength(14);
    expect(session.violations()).toEqual([]);

    const result = await api.putSceneGraph("session", session.toDoc(), "warehouse");
    expect(result).toEqual({ nodes: 12, edges: 14 });

    // The exported graph passes the CLI validator with zero violations.
    cli(["validate-map", join(serverRoot, "session", "scenegraph.json")]);
  }, 60_000);

  it("produces a bundle byte-identical to the CLI pipeline + edit flow", async () => {
    // CLI flow: pipeline, natural-language edit, re-run.
    const cliBundle = join(cliRoot, "session");
    cli([
      "pipeline",
      "--context", happyMeta.social_context,
      "--task", happyMeta.task,
      "--rough", happyMeta.rough_scenario,
      "--location", happyMeta.location_description,
      "--graph", join(MAPS_DIR, "warehouse", "scenegraph.json"),
      "--out", cliBundle,
      "--seed", "7",
    ]);
    cli(["paths", cliBundle, "--edit", editInstruction]);
    cli(["run", cliBundle, "--planner", "baseline", "--seed", "7"]);

    // UI session over HTTP: the graph was exported by the annotation test.
    const scenario = await api.propose("session", {
      context: happyMeta.social_context,
      task: happyMeta.task,
      location: happyMeta.location_description,
      rough: happyMeta.rough_scenario,
    });
    expect(scenario.pedestrians.length).toBeGreaterThan(0);

    const paths = await api.generatePaths("session");
    const before = paths.robot_nodes.length;
    const edited = await api.editPaths("session", editInstruction);
    expect(edited.robot_nodes.length).toBeGreaterThan(before);

    await api.acceptPaths("session");
    const behaviors = await api.generateBehaviors("session");
    expect(behaviors.pedestrians.sort()).toEqual(
      scenario.pedestrians.map((p) => p.ped_id).sort(),
    );

    const sim = await api.simulate("session", "baseline", 7);
    expect(sim.termination).toBe("goal_reached");
    expect(sim.metrics.success).toBe(true);

    const uiTree = treeBytes(join(serverRoot, "session"));
    const cliTree = treeBytes(cliBundle);
    expect([...uiTree.keys()].sort()).toEqual([...cliTree.keys()].sort());
    for (const [rel, bytes] of uiTree) {
      expect(bytes.equals(cliTree.get(rel)!), `differs: ${rel}`).toBe(true);
    }

    // Playback data is reachable through the same API the UI uses.
    const trace = await api.trace("session", sim.run);
    expect(trace.termination).toBe("goal_reached");
    expect(trace.initial.length).toBeGreaterThan(0);
    const metrics = await api.metrics("session", sim.run);
    expect(metrics.success).toBe(true);
  }, 120_000);
});
