// Mirrors of the server's bundle file schemas (scenegraph.json, scenario.json,
// paths.json, trace JSONL, metrics JSON).

export interface MapMeta {
  image_path: string;
  resolution: number;
  origin: [number, number];
  image_width: number;
  image_height: number;
  occupied_threshold: number;
}

export interface GraphNode {
  id: string;
  name: string;
  semantic_type: string;
  pixel: [number, number];
}

export interface GraphEdge {
  endpoints: [string, string];
  semantic_type: string;
}

export interface SceneGraphDoc {
  meta: MapMeta;
  nodes: GraphNode[];
  edges: GraphEdge[];
  schema_note: string;
}

export interface PedestrianSpec {
  ped_id: string;
  role: string;
  behavior_description: string;
  group_id: string | null;
}

export interface ScenarioDoc {
  scenario_description: string;
  pedestrians: PedestrianSpec[];
  expected_robot_behavior: string;
  guided: boolean;
}

export interface PedestrianPathDoc {
  ped_id: string;
  nodes: string[];
  group_id: string | null;
  encounter_node: string | null;
  hold_node: string | null;
}

export interface PathsDoc {
  robot_nodes: string[];
  pedestrians: PedestrianPathDoc[];
  groups: Record<string, string[]>;
}

export interface AgentSnapshot {
  id: string;
  kind: "robot" | "pedestrian";
  x: number;
  y: number;
  h: number;
  vx: number;
  vy: number;
  ds: number;
}

export interface TraceEvent {
  type: string;
  [key: string]: unknown;
}

export interface TickRecord {
  tick: number;
  t: number;
  agents: AgentSnapshot[];
  events: TraceEvent[];
}

export interface Trace {
  config: Record<string, unknown>;
  initial: AgentSnapshot[];
  ticks: TickRecord[];
  termination: string;
}

export interface MetricsDoc {
  personal_space_intrusion: number;
  group_space_intrusion: number;
  min_distance_to_human: number | null;
  collisions: number;
  time_to_goal: number | null;
  path_length: number;
  success: boolean;
  bundle: string;
  planner: string;
  seed: number;
}

export interface BundleState {
  name: string;
  accepted: boolean;
  graph: SceneGraphDoc | null;
  scenario: ScenarioDoc | null;
  paths: PathsDoc | null;
  simconfig: Record<string, unknown> | null;
  behaviors: Record<string, string>;
  runs: string[];
}

export interface MapEntry {
  name: string;
  image: string;
  meta?: MapMeta;
  graph?: SceneGraphDoc;
}
