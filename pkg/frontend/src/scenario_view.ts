// Scenario review and path editing: proposal text with accept/regenerate,
// paths drawn as colored polylines over the map, and a free-text edit box
// that re-queries the model. Rejecting an edit keeps the last good plan.

import { ApiClient, ApiError } from "./api.js";
import { drawGraph, drawMap, drawPaths, PATH_COLORS } from "./draw.js";
import type { BundleState } from "./types.js";

const SCALE = 2;

export class ScenarioView {
  root: HTMLElement;
  private canvas: HTMLCanvasElement;
  private ctx: CanvasRenderingContext2D;
  private image: HTMLImageElement | null = null;
  private state: BundleState | null = null;
  private proposalBox: HTMLElement;
  private legend: HTMLElement;
  private status: HTMLElement;
  private form: HTMLFormElement;
  private editInput: HTMLInputElement;

  constructor(private api: ApiClient, private bundleName: () => string) {
    this.root = document.createElement("section");
    this.root.innerHTML = `
      <form data-role="meta" class="stack">
        <label>Social context <input name="context" size="50"></label>
        <label>Task <input name="task" size="50"></label>
        <label>Rough scenario <textarea name="rough" rows="3" cols="52"></textarea></label>
        <label>Location <textarea name="location" rows="3" cols="52"></textarea></label>
        <button class="primary">Propose scenario</button>
      </form>
      <div data-role="proposal" class="proposal"></div>
      <div class="toolbar">
        <button data-role="genpaths">Generate paths</button>
        <input data-role="edit" size="44" placeholder="e.g. Make the robot's path longer">
        <button data-role="sendedit">Edit paths</button>
        <button data-role="accept" class="primary">Accept paths</button>
        <button data-role="behaviors">Generate behaviors</button>
        <span data-role="status" class="status"></span>
      </div>
      <div data-role="legend" class="legend"></div>
      <canvas data-role="canvas"></canvas>
    `;
    this.canvas = this.root.querySelector("[data-role=canvas]")!;
    this.ctx = this.canvas.getContext("2d")!;
    this.proposalBox = this.root.querySelector("[data-role=proposal]")!;
    this.legend = this.root.querySelector("[data-role=legend]")!;
    this.status = this.root.querySelector("[data-role=status]")!;
    this.form = this.root.querySelector("[data-role=meta]")!;
    this.editInput = this.root.querySelector("[data-role=edit]")!;

    this.form.onsubmit = (ev) => {
      ev.preventDefault();
      void this.propose();
    };
    (this.root.querySelector("[data-role=genpaths]") as HTMLButtonElement).onclick = () =>
      void this.call(() => this.api.generatePaths(this.bundleName()), "paths generated");
    (this.root.querySelector("[data-role=sendedit]") as HTMLButtonElement).onclick = () =>
      void this.sendEdit();
    (this.root.querySelector("[data-role=accept]") as HTMLButtonElement).onclick = () =>
      void this.call(() => this.api.acceptPaths(this.bundleName()), "paths accepted (frozen)");
    (this.root.querySelector("[data-role=behaviors]") as HTMLButtonElement).onclick = () =>
      void this.call(
        () => this.api.generateBehaviors(this.bundleName()),
        "behavior trees written",
      );
  }

  private async propose(): Promise<void> {
    const data = new FormData(this.form);
    await this.call(
      () =>
        this.api.propose(this.bundleName(), {
          context: String(data.get("context") ?? ""),
          task: String(data.get("task") ?? ""),
          location: String(data.get("location") ?? ""),
          rough: String(data.get("rough") ?? "") || undefined,
        }),
      "scenario proposed",
    );
  }

  private async sendEdit(): Promise<void> {
    const instruction = this.editInput.value;
    await this.call(
      () => this.api.editPaths(this.bundleName(), instruction),
      "edit applied",
    );
  }

  private async call(fn: () => Promise<unknown>, okMessage: string): Promise<void> {
    this.status.textContent = "working...";
    try {
      await fn();
      this.status.textContent = okMessage;
    } catch (err) {
      if (err instanceof ApiError && err.attempts.length) {
        // Gateway failure: surface the repair-attempt log; plan unchanged.
        this.status.textContent =
          `${err.errorClass}: ${err.attempts.length} attempt(s) failed — ` +
          err.attempts.join(" | ");
      } else {
        this.status.textContent = String(err);
      }
    }
    await this.refresh();
  }

  async refresh(): Promise<void> {
    try {
      this.state = await this.api.bundleState(this.bundleName());
    } catch {
      this.state = null;
    }
    this.render();
  }

  render(): void {
    const state = this.state;
    if (!state || !state.graph) {
      this.proposalBox.textContent = "No bundle yet: export an annotated map first.";
      return;
    }
    const meta = state.graph.meta;
    this.canvas.width = meta.image_width * SCALE;
    this.canvas.height = meta.image_height * SCALE;
    if (!this.image || !this.image.src.includes(encodeURIComponent(state.name))) {
      this.image = new Image();
      this.image.onload = () => this.render();
      this.image.src = this.api.mapImageUrl(state.name);
    }
    if (state.scenario) {
      const peds = state.scenario.pedestrians
        .map(
          (p) =>
            `<li><b>${p.ped_id}</b> (${p.role}${p.group_id ? `, group ${p.group_id}` : ""}): ` +
            `${p.behavior_description}</li>`,
        )
        .join("");
      this.proposalBox.innerHTML = `
        <p>${state.scenario.scenario_description}</p>
        <ul>${peds}</ul>
        <p><i>Expected robot behavior:</i> ${state.scenario.expected_robot_behavior}</p>`;
    } else {
      this.proposalBox.textContent = "No scenario proposed yet.";
    }
    drawMap(this.ctx, this.image, meta, SCALE);
    drawGraph(this.ctx, state.graph, SCALE);
    if (state.paths) {
      drawPaths(this.ctx, state.graph, state.paths, SCALE);
      const items = [`<span style="color:${PATH_COLORS[0]}">■ robot</span>`];
      state.paths.pedestrians.forEach((p, i) =>
        items.push(
          `<span style="color:${PATH_COLORS[(i + 1) % PATH_COLORS.length]}">■ ${p.ped_id}</span>`,
        ),
      );
      items.push('<span style="color:#5f3dc4">◯ encounter</span>');
      if (state.accepted) {
        items.push("<b>[accepted]</b>");
      }
      this.legend.innerHTML = items.join(" &nbsp; ");
    } else {
      this.legend.textContent = "";
    }
  }
}
