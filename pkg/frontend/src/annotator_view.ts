// Map annotation view: click to place nodes, select two nodes to connect,
// edit labels, undo, and export to the server (which re-validates).

import { ApiClient, ApiError } from "./api.js";
import { AnnotationSession, pixelToWorld } from "./annotation.js";
import { drawGraph, drawMap } from "./draw.js";
import type { MapEntry } from "./types.js";

const SCALE = 2;

export class AnnotatorView {
  root: HTMLElement;
  private session: AnnotationSession | null = null;
  private canvas: HTMLCanvasElement;
  private ctx: CanvasRenderingContext2D;
  private image: HTMLImageElement | null = null;
  private mapSelect: HTMLSelectElement;
  private status: HTMLElement;
  private violationsBox: HTMLElement;
  private idInput: HTMLInputElement;
  private nameInput: HTMLInputElement;
  private typeInput: HTMLInputElement;
  private edgeTypeInput: HTMLInputElement;
  private maps: MapEntry[] = [];

  constructor(
    private api: ApiClient,
    private bundleName: () => string,
    private onExported: () => void,
  ) {
    this.root = document.createElement("section");
    this.root.innerHTML = `
      <div class="toolbar">
        <label>Map <select data-role="map"></select></label>
        <label>id <input data-role="id" size="10" placeholder="auto"></label>
        <label>name <input data-role="name" size="14"></label>
        <label>type <input data-role="type" size="10" value="place"></label>
        <label>edge type <input data-role="edgetype" size="10" value="hallway"></label>
        <button data-role="undo">Undo</button>
        <button data-role="delete">Delete selected</button>
        <button data-role="export" class="primary">Export to bundle</button>
        <span data-role="status" class="status"></span>
      </div>
      <div data-role="violations" class="violations"></div>
      <canvas data-role="canvas"></canvas>
      <p class="hint">Click empty space to place a node; click two nodes in a
      row to connect them; world coordinates read out in the status line.</p>
    `;
    this.canvas = this.root.querySelector("[data-role=canvas]")!;
    this.ctx = this.canvas.getContext("2d")!;
    this.mapSelect = this.root.querySelector("[data-role=map]")!;
    this.status = this.root.querySelector("[data-role=status]")!;
    this.violationsBox = this.root.querySelector("[data-role=violations]")!;
    this.idInput = this.root.querySelector("[data-role=id]")!;
    this.nameInput = this.root.querySelector("[data-role=name]")!;
    this.typeInput = this.root.querySelector("[data-role=type]")!;
    this.edgeTypeInput = this.root.querySelector("[data-role=edgetype]")!;

    this.mapSelect.onchange = () => this.loadMap(this.mapSelect.value);
    this.canvas.onclick = (ev) => this.onClick(ev);
    (this.root.querySelector("[data-role=undo]") as HTMLButtonElement).onclick = () => {
      this.session?.undo();
      this.render();
    };
    (this.root.querySelector("[data-role=delete]") as HTMLButtonElement).onclick = () => {
      const sel = this.session?.selection.nodeIds[0];
      if (sel) {
        this.session!.removeNode(sel);
        this.render();
      }
    };
    (this.root.querySelector("[data-role=export]") as HTMLButtonElement).onclick = () =>
      void this.exportGraph();
  }

  async init(): Promise<void> {
    this.maps = await this.api.listMaps();
    this.mapSelect.innerHTML = this.maps
      .map((m) => `<option value="${m.name}">${m.name}</option>`)
      .join("");
    if (this.maps.length) {
      await this.loadMap(this.maps[0].name);
    }
  }

  private async loadMap(name: string): Promise<void> {
    const entry = this.maps.find((m) => m.name === name);
    if (!entry || !entry.meta) {
      this.status.textContent = `map ${name} has no meta`;
      return;
    }
    this.session = new AnnotationSession(entry.meta, name);
    this.canvas.width = entry.meta.image_width * SCALE;
    this.canvas.height = entry.meta.image_height * SCALE;
    this.image = new Image();
    this.image.onload = () => this.render();
    this.image.src = this.api.sourceMapImageUrl(name);
    this.render();
  }

  private onClick(ev: MouseEvent): void {
    if (!this.session) return;
    const rect = this.canvas.getBoundingClientRect();
    const px = Math.round((ev.clientX - rect.left) / SCALE);
    const py = Math.round((ev.clientY - rect.top) / SCALE);
    const hit = this.session.nodes.find(
      (n) => Math.hypot(n.pixel[0] - px, n.pixel[1] - py) <= 5,
    );
    try {
      if (hit) {
        const edge = this.session.select(hit.id, this.edgeTypeInput.value || "connection");
        this.status.textContent = edge
          ? `edge ${edge.endpoints[0]} -- ${edge.endpoints[1]}`
          : `selected ${hit.id}`;
      } else {
        const node = this.session.placeNode(
          px,
          py,
          this.idInput.value.trim() || undefined,
          this.nameInput.value.trim() || undefined,
          this.typeInput.value.trim() || "place",
        );
        this.idInput.value = "";
        const [wx, wy] = pixelToWorld(this.session.meta, px, py);
        this.status.textContent =
          `placed ${node.id} at pixel (${px},${py}) = world (${wx.toFixed(2)}, ${wy.toFixed(2)}) m`;
      }
    } catch (err) {
      this.status.textContent = String(err);
    }
    this.render();
  }

  private async exportGraph(): Promise<void> {
    if (!this.session) return;
    this.violationsBox.textContent = "";
    try {
      const result = await this.api.putSceneGraph(
        this.bundleName(),
        this.session.toDoc(),
        this.session.mapName,
      );
      this.status.textContent = `exported: ${result.nodes} nodes, ${result.edges} edges`;
      this.onExported();
    } catch (err) {
      if (err instanceof ApiError) {
        // Server-side violations render inline, one line per element.
        this.violationsBox.innerHTML = err.violations
          .map((v) => `<div class="violation">${v}</div>`)
          .join("");
        this.status.textContent = `rejected: ${err.violations.length} violation(s)`;
      } else {
        this.status.textContent = String(err);
      }
    }
  }

  render(): void {
    if (!this.session) return;
    drawMap(this.ctx, this.image, this.session.meta, SCALE);
    drawGraph(this.ctx, this.session.toDoc(), SCALE, this.session.selection.nodeIds);
    const local = this.session.violations();
    this.violationsBox.innerHTML = local
      .map((v) => `<div class="violation">${v}</div>`)
      .join("");
  }
}
