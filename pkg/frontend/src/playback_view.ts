// Trace playback: timeline scrubber animating agent markers, gesture and
// hold/release flags on the timeline, and the run's metrics panel.

import { ApiClient } from "./api.js";
import { drawAgents, drawMap } from "./draw.js";
import { frameAt, frameCount, frameTime, timelineFlags } from "./trace.js";
import type { BundleState, MapMeta, MetricsDoc, Trace } from "./types.js";

const SCALE = 2;

export class PlaybackView {
  root: HTMLElement;
  private canvas: HTMLCanvasElement;
  private ctx: CanvasRenderingContext2D;
  private image: HTMLImageElement | null = null;
  private runSelect: HTMLSelectElement;
  private plannerSelect: HTMLSelectElement;
  private seedInput: HTMLInputElement;
  private scrubber: HTMLInputElement;
  private timeLabel: HTMLElement;
  private flagsBox: HTMLElement;
  private metricsBox: HTMLElement;
  private status: HTMLElement;
  private playTimer: number | null = null;
  private trace: Trace | null = null;
  private meta: MapMeta | null = null;
  private state: BundleState | null = null;

  constructor(private api: ApiClient, private bundleName: () => string) {
    this.root = document.createElement("section");
    this.root.innerHTML = `
      <div class="toolbar">
        <label>Planner <select data-role="planner">
          <option>baseline</option><option>social</option><option>group</option>
        </select></label>
        <label>Seed <input data-role="seed" size="4" value="7"></label>
        <button data-role="simulate" class="primary">Simulate</button>
        <label>Run <select data-role="run"></select></label>
        <button data-role="play">Play</button>
        <span data-role="status" class="status"></span>
      </div>
      <div class="toolbar">
        <input data-role="scrubber" type="range" min="0" max="0" value="0" style="width: 60%">
        <span data-role="time" class="status"></span>
      </div>
      <canvas data-role="canvas"></canvas>
      <div class="columns">
        <div><h3>Timeline flags</h3><div data-role="flags" class="flags"></div></div>
        <div><h3>Metrics</h3><div data-role="metrics" class="metrics"></div></div>
      </div>
    `;
    this.canvas = this.root.querySelector("[data-role=canvas]")!;
    this.ctx = this.canvas.getContext("2d")!;
    this.runSelect = this.root.querySelector("[data-role=run]")!;
    this.plannerSelect = this.root.querySelector("[data-role=planner]")!;
    this.seedInput = this.root.querySelector("[data-role=seed]")!;
    this.scrubber = this.root.querySelector("[data-role=scrubber]")!;
    this.timeLabel = this.root.querySelector("[data-role=time]")!;
    this.flagsBox = this.root.querySelector("[data-role=flags]")!;
    this.metricsBox = this.root.querySelector("[data-role=metrics]")!;
    this.status = this.root.querySelector("[data-role=status]")!;

    this.scrubber.oninput = () => this.renderFrame();
    this.runSelect.onchange = () => void this.loadRun(this.runSelect.value);
    (this.root.querySelector("[data-role=simulate]") as HTMLButtonElement).onclick = () =>
      void this.simulate();
    (this.root.querySelector("[data-role=play]") as HTMLButtonElement).onclick = () =>
      this.togglePlay();
  }

  private async simulate(): Promise<void> {
    this.status.textContent = "simulating...";
    try {
      const result = await this.api.simulate(
        this.bundleName(),
        this.plannerSelect.value,
        Number(this.seedInput.value) || 7,
      );
      this.status.textContent = `run ${result.run}: ${result.termination}`;
      await this.refresh();
      this.runSelect.value = result.run;
      await this.loadRun(result.run);
    } catch (err) {
      this.status.textContent = String(err);
    }
  }

  async refresh(): Promise<void> {
    try {
      this.state = await this.api.bundleState(this.bundleName());
    } catch {
      this.state = null;
      return;
    }
    this.meta = this.state.graph?.meta ?? null;
    const current = this.runSelect.value;
    this.runSelect.innerHTML = this.state.runs
      .map((r) => `<option value="${r}">${r}</option>`)
      .join("");
    if (this.state.runs.includes(current)) {
      this.runSelect.value = current;
    } else if (this.state.runs.length) {
      await this.loadRun(this.state.runs[0]);
    }
  }

  private async loadRun(run: string): Promise<void> {
    if (!run || !this.state) return;
    try {
      this.trace = await this.api.trace(this.state.name, run);
      const metrics = await this.api.metrics(this.state.name, run);
      this.renderMetrics(metrics);
    } catch (err) {
      this.status.textContent = String(err);
      return;
    }
    this.scrubber.max = String(frameCount(this.trace) - 1);
    this.scrubber.value = "0";
    this.renderFlags();
    this.renderFrame();
  }

  private togglePlay(): void {
    if (this.playTimer !== null) {
      window.clearInterval(this.playTimer);
      this.playTimer = null;
      return;
    }
    this.playTimer = window.setInterval(() => {
      if (!this.trace) return;
      const next = Number(this.scrubber.value) + 4;
      if (next >= frameCount(this.trace)) {
        window.clearInterval(this.playTimer!);
        this.playTimer = null;
        return;
      }
      this.scrubber.value = String(next);
      this.renderFrame();
    }, 50);
  }

  private renderFrame(): void {
    if (!this.trace || !this.meta) return;
    const frame = Number(this.scrubber.value);
    this.canvas.width = this.meta.image_width * SCALE;
    this.canvas.height = this.meta.image_height * SCALE;
    if (!this.image && this.state) {
      this.image = new Image();
      this.image.onload = () => this.renderFrame();
      this.image.src = this.api.mapImageUrl(this.state.name);
    }
    drawMap(this.ctx, this.image, this.meta, SCALE);
    drawAgents(this.ctx, this.meta, frameAt(this.trace, frame), SCALE);
    this.timeLabel.textContent =
      `t = ${frameTime(this.trace, frame).toFixed(2)} s (frame ${frame}) — ` +
      this.trace.termination;
  }

  private renderFlags(): void {
    if (!this.trace) return;
    this.flagsBox.innerHTML = timelineFlags(this.trace)
      .map(
        (f) =>
          `<div class="flag flag-${f.kind}" data-frame="${f.frame}">` +
          `t=${f.t.toFixed(2)}s ${f.label}</div>`,
      )
      .join("");
    for (const el of this.flagsBox.querySelectorAll<HTMLElement>(".flag")) {
      el.onclick = () => {
        this.scrubber.value = el.dataset.frame ?? "0";
        this.renderFrame();
      };
    }
  }

  private renderMetrics(m: MetricsDoc): void {
    const rows: [string, string][] = [
      ["success", m.success ? "yes" : "no"],
      ["time to goal", m.time_to_goal === null ? "inf" : `${m.time_to_goal.toFixed(2)} s`],
      ["path length", `${m.path_length.toFixed(2)} m`],
      ["personal-space intrusion", m.personal_space_intrusion.toFixed(3)],
      ["group-space intrusion", m.group_space_intrusion.toFixed(3)],
      ["min distance to human",
       m.min_distance_to_human === null ? "-" : `${m.min_distance_to_human.toFixed(2)} m`],
      ["collisions", String(m.collisions)],
    ];
    this.metricsBox.innerHTML =
      `<table>${rows.map(([k, v]) => `<tr><td>${k}</td><td>${v}</td></tr>`).join("")}</table>`;
  }
}
