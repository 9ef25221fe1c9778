// Shared canvas drawing: map image plus graph/path/agent overlays.
// Every function repaints from the given state; nothing is retained.

import type { AgentSnapshot, MapMeta, PathsDoc, SceneGraphDoc } from "./types.js";

export const PATH_COLORS = ["#d9480f", "#1864ab", "#2b8a3e", "#862e9c", "#c2255c", "#e67700"];

export function worldToCanvas(
  meta: MapMeta,
  scale: number,
  x: number,
  y: number,
): [number, number] {
  const px = (x - meta.origin[0]) / meta.resolution;
  const py = meta.image_height - (y - meta.origin[1]) / meta.resolution;
  return [px * scale, py * scale];
}

export function drawMap(
  ctx: CanvasRenderingContext2D,
  image: HTMLImageElement | null,
  meta: MapMeta,
  scale: number,
): void {
  ctx.clearRect(0, 0, meta.image_width * scale, meta.image_height * scale);
  if (image) {
    ctx.drawImage(image, 0, 0, meta.image_width * scale, meta.image_height * scale);
  } else {
    ctx.fillStyle = "#f1f3f5";
    ctx.fillRect(0, 0, meta.image_width * scale, meta.image_height * scale);
  }
}

export function drawGraph(
  ctx: CanvasRenderingContext2D,
  graph: SceneGraphDoc,
  scale: number,
  selected: string[] = [],
): void {
  const byId = new Map(graph.nodes.map((n) => [n.id, n]));
  ctx.strokeStyle = "#37b24d";
  ctx.lineWidth = 1.5;
  for (const e of graph.edges) {
    const a = byId.get(e.endpoints[0]);
    const b = byId.get(e.endpoints[1]);
    if (!a || !b) continue;
    ctx.beginPath();
    ctx.moveTo(a.pixel[0] * scale, a.pixel[1] * scale);
    ctx.lineTo(b.pixel[0] * scale, b.pixel[1] * scale);
    ctx.stroke();
  }
  for (const n of graph.nodes) {
    const [cx, cy] = [n.pixel[0] * scale, n.pixel[1] * scale];
    ctx.beginPath();
    ctx.arc(cx, cy, selected.includes(n.id) ? 7 : 5, 0, 2 * Math.PI);
    ctx.fillStyle = selected.includes(n.id) ? "#f08c00" : "#e03131";
    ctx.fill();
    ctx.fillStyle = "#1971c2";
    ctx.font = "11px sans-serif";
    ctx.fillText(n.id, cx + 8, cy - 6);
  }
}

export function drawPaths(
  ctx: CanvasRenderingContext2D,
  graph: SceneGraphDoc,
  paths: PathsDoc,
  scale: number,
): void {
  const byId = new Map(graph.nodes.map((n) => [n.id, n]));
  const polyline = (nodeIds: string[], color: string, width: number) => {
    ctx.strokeStyle = color;
    ctx.lineWidth = width;
    ctx.beginPath();
    nodeIds.forEach((id, i) => {
      const n = byId.get(id);
      if (!n) return;
      const [cx, cy] = [n.pixel[0] * scale, n.pixel[1] * scale];
      if (i === 0) ctx.moveTo(cx, cy);
      else ctx.lineTo(cx, cy);
    });
    ctx.stroke();
  };
  polyline(paths.robot_nodes, PATH_COLORS[0], 3);
  paths.pedestrians.forEach((ped, i) => {
    polyline(ped.nodes, PATH_COLORS[(i + 1) % PATH_COLORS.length], 2);
    if (ped.encounter_node) {
      const n = byId.get(ped.encounter_node);
      if (n) {
        // Encounter marker sits on both the robot and pedestrian polylines.
        ctx.beginPath();
        ctx.arc(n.pixel[0] * scale, n.pixel[1] * scale, 9, 0, 2 * Math.PI);
        ctx.strokeStyle = "#5f3dc4";
        ctx.lineWidth = 2.5;
        ctx.stroke();
      }
    }
  });
}

export function drawAgents(
  ctx: CanvasRenderingContext2D,
  meta: MapMeta,
  agents: AgentSnapshot[],
  scale: number,
): void {
  for (const a of agents) {
    const [cx, cy] = worldToCanvas(meta, scale, a.x, a.y);
    const r = a.kind === "robot" ? 8 : 6;
    ctx.beginPath();
    ctx.arc(cx, cy, r, 0, 2 * Math.PI);
    ctx.fillStyle = a.kind === "robot" ? "#1864ab" : "#e8590c";
    ctx.fill();
    ctx.strokeStyle = "#212529";
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ctx.moveTo(cx, cy);
    ctx.lineTo(cx + r * Math.cos(-a.h), cy + r * Math.sin(-a.h));
    ctx.stroke();
    ctx.fillStyle = "#343a40";
    ctx.font = "10px sans-serif";
    ctx.fillText(a.id, cx + r + 2, cy + 3);
  }
}
