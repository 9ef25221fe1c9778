// Annotation session model: in-progress node/edge lists mirroring the
// server's scene-graph types, with selection state and an undo stack.
// Pure state transitions; the canvas view renders from this state only.

import type { GraphEdge, GraphNode, MapMeta, SceneGraphDoc } from "./types.js";

export interface Selection {
  nodeIds: string[];
}

type UndoEntry =
  | { kind: "add_node"; id: string }
  | { kind: "add_edge"; key: string }
  | { kind: "remove_node"; node: GraphNode; edges: GraphEdge[] }
  | { kind: "remove_edge"; edge: GraphEdge };

export function pixelToWorld(meta: MapMeta, px: number, py: number): [number, number] {
  return [
    meta.origin[0] + px * meta.resolution,
    meta.origin[1] + (meta.image_height - py) * meta.resolution,
  ];
}

function edgeKey(a: string, b: string): string {
  return a <= b ? `${a}|${b}` : `${b}|${a}`;
}

export class AnnotationSession {
  nodes: GraphNode[] = [];
  edges: GraphEdge[] = [];
  selection: Selection = { nodeIds: [] };
  schemaNote = "";
  private undoStack: UndoEntry[] = [];
  private counter = 0;

  constructor(public meta: MapMeta, public mapName: string) {}

  static fromDoc(doc: SceneGraphDoc, mapName: string): AnnotationSession {
    const session = new AnnotationSession(doc.meta, mapName);
    session.nodes = doc.nodes.map((n) => ({ ...n, pixel: [...n.pixel] as [number, number] }));
    session.edges = doc.edges.map((e) => ({ ...e, endpoints: [...e.endpoints] as [string, string] }));
    session.schemaNote = doc.schema_note;
    return session;
  }

  node(id: string): GraphNode | undefined {
    return this.nodes.find((n) => n.id === id);
  }

  hasEdge(a: string, b: string): boolean {
    return this.edges.some((e) => edgeKey(e.endpoints[0], e.endpoints[1]) === edgeKey(a, b));
  }

  inBounds(px: number, py: number): boolean {
    return px >= 0 && px <= this.meta.image_width && py >= 0 && py <= this.meta.image_height;
  }

  placeNode(px: number, py: number, id?: string, name?: string, semanticType = "place"): GraphNode {
    if (!this.inBounds(px, py)) {
      throw new Error(`pixel (${px},${py}) outside the image`);
    }
    let nodeId = id ?? "";
    if (!nodeId) {
      do {
        this.counter += 1;
        nodeId = `n${this.counter}`;
      } while (this.node(nodeId));
    } else if (this.node(nodeId)) {
      throw new Error(`duplicate node id ${nodeId}`);
    }
    const node: GraphNode = {
      id: nodeId,
      name: name ?? nodeId,
      semantic_type: semanticType,
      pixel: [Math.round(px), Math.round(py)],
    };
    this.nodes.push(node);
    this.undoStack.push({ kind: "add_node", id: nodeId });
    return node;
  }

  /** Click-to-select; selecting a second node creates a typed edge. */
  select(id: string, edgeType = "connection"): GraphEdge | null {
    const node = this.node(id);
    if (!node) {
      throw new Error(`unknown node ${id}`);
    }
    if (this.selection.nodeIds.length === 1 && this.selection.nodeIds[0] !== id) {
      const [a] = this.selection.nodeIds;
      this.selection = { nodeIds: [] };
      return this.addEdge(a, id, edgeType);
    }
    this.selection = { nodeIds: [id] };
    return null;
  }

  clearSelection(): void {
    this.selection = { nodeIds: [] };
  }

  addEdge(a: string, b: string, semanticType = "connection"): GraphEdge {
    if (a === b) {
      throw new Error("edge endpoints must be distinct");
    }
    if (!this.node(a) || !this.node(b)) {
      throw new Error(`unknown endpoint ${!this.node(a) ? a : b}`);
    }
    if (this.hasEdge(a, b)) {
      throw new Error(`duplicate edge ${a} -- ${b}`);
    }
    const edge: GraphEdge = { endpoints: [a, b], semantic_type: semanticType };
    this.edges.push(edge);
    this.undoStack.push({ kind: "add_edge", key: edgeKey(a, b) });
    return edge;
  }

  removeNode(id: string): void {
    const node = this.node(id);
    if (!node) {
      return;
    }
    const attached = this.edges.filter((e) => e.endpoints.includes(id));
    this.nodes = this.nodes.filter((n) => n.id !== id);
    this.edges = this.edges.filter((e) => !e.endpoints.includes(id));
    this.selection = { nodeIds: this.selection.nodeIds.filter((s) => s !== id) };
    this.undoStack.push({ kind: "remove_node", node, edges: attached });
  }

  removeEdge(a: string, b: string): void {
    const key = edgeKey(a, b);
    const edge = this.edges.find((e) => edgeKey(e.endpoints[0], e.endpoints[1]) === key);
    if (!edge) {
      return;
    }
    this.edges = this.edges.filter((e) => e !== edge);
    this.undoStack.push({ kind: "remove_edge", edge });
  }

  setLabel(id: string, name: string, semanticType?: string): void {
    const node = this.node(id);
    if (!node) {
      throw new Error(`unknown node ${id}`);
    }
    node.name = name;
    if (semanticType !== undefined) {
      node.semantic_type = semanticType;
    }
  }

  undo(): boolean {
    const entry = this.undoStack.pop();
    if (!entry) {
      return false;
    }
    switch (entry.kind) {
      case "add_node":
        this.nodes = this.nodes.filter((n) => n.id !== entry.id);
        this.edges = this.edges.filter((e) => !e.endpoints.includes(entry.id));
        break;
      case "add_edge":
        this.edges = this.edges.filter(
          (e) => edgeKey(e.endpoints[0], e.endpoints[1]) !== entry.key,
        );
        break;
      case "remove_node":
        this.nodes.push(entry.node);
        this.edges.push(...entry.edges);
        break;
      case "remove_edge":
        this.edges.push(entry.edge);
        break;
    }
    return true;
  }

  /** Local structural check mirroring the server's rules (the server's
   * validation stays authoritative at export time). */
  violations(): string[] {
    const problems: string[] = [];
    const seen = new Set<string>();
    for (const n of this.nodes) {
      if (seen.has(n.id)) {
        problems.push(`duplicate node id ${n.id}`);
      }
      seen.add(n.id);
      if (!this.inBounds(n.pixel[0], n.pixel[1])) {
        problems.push(`node ${n.id} outside the image`);
      }
    }
    const edgeSeen = new Set<string>();
    for (const e of this.edges) {
      const [a, b] = e.endpoints;
      if (a === b) {
        problems.push(`edge ${a} -- ${b} endpoints must be distinct`);
      }
      for (const end of e.endpoints) {
        if (!seen.has(end)) {
          problems.push(`edge ${a} -- ${b} references missing node ${end}`);
        }
      }
      const key = edgeKey(a, b);
      if (edgeSeen.has(key)) {
        problems.push(`duplicate edge ${a} -- ${b}`);
      }
      edgeSeen.add(key);
    }
    return problems;
  }

  toDoc(): SceneGraphDoc {
    return {
      meta: this.meta,
      nodes: this.nodes.map((n) => ({
        id: n.id,
        name: n.name,
        semantic_type: n.semantic_type,
        pixel: [n.pixel[0], n.pixel[1]],
      })),
      edges: this.edges.map((e) => ({
        endpoints: [e.endpoints[0], e.endpoints[1]],
        semantic_type: e.semantic_type,
      })),
      schema_note: this.schemaNote,
    };
  }
}
