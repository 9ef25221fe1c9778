// Typed client for the local scenario service. The UI never writes bundle
// files itself; every mutation goes through these calls.

import type {
  BundleState,
  MapEntry,
  MetricsDoc,
  PathsDoc,
  ScenarioDoc,
  SceneGraphDoc,
  Trace,
} from "./types.js";
import { parseTraceJsonl } from "./trace.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public errorClass: string,
    public violations: string[],
    public attempts: string[],
  ) {
    super(`${errorClass} (${status}): ${violations.join("; ")}`);
  }
}

export class ApiClient {
  constructor(private base: string = "") {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const res = await fetch(this.base + path, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!res.ok) {
      let detail: Record<string, unknown> = {};
      try {
        detail = await res.json();
      } catch {
        // non-JSON error body; fall through with empty detail
      }
      throw new ApiError(
        res.status,
        String(detail.error ?? "HTTPError"),
        (detail.violations as string[]) ?? [String(detail.message ?? res.statusText)],
        (detail.attempts as string[]) ?? [],
      );
    }
    return res.json() as Promise<T>;
  }

  listMaps(): Promise<MapEntry[]> {
    return this.request("GET", "/api/maps");
  }

  listBundles(): Promise<string[]> {
    return this.request("GET", "/api/bundles");
  }

  bundleState(bundle: string): Promise<BundleState> {
    return this.request("GET", `/api/bundle/state?bundle=${encodeURIComponent(bundle)}`);
  }

  mapImageUrl(bundle: string): string {
    return `${this.base}/api/map.png?bundle=${encodeURIComponent(bundle)}`;
  }

  sourceMapImageUrl(mapName: string): string {
    return `${this.base}/api/maps/${encodeURIComponent(mapName)}/image.png`;
  }

  putSceneGraph(bundle: string, graph: SceneGraphDoc, mapName: string): Promise<{ nodes: number; edges: number }> {
    return this.request("PUT", `/api/scenegraph?bundle=${encodeURIComponent(bundle)}`, {
      graph,
      map: mapName,
    });
  }

  propose(
    bundle: string,
    meta: { context: string; task: string; location: string; rough?: string },
  ): Promise<ScenarioDoc> {
    return this.request("POST", `/api/propose?bundle=${encodeURIComponent(bundle)}`, meta);
  }

  generatePaths(bundle: string): Promise<PathsDoc> {
    return this.request("POST", `/api/paths?bundle=${encodeURIComponent(bundle)}`, {});
  }

  editPaths(bundle: string, instruction: string): Promise<PathsDoc> {
    return this.request("POST", `/api/paths/edit?bundle=${encodeURIComponent(bundle)}`, {
      instruction,
    });
  }

  acceptPaths(bundle: string): Promise<{ accepted: boolean }> {
    return this.request("POST", `/api/paths/accept?bundle=${encodeURIComponent(bundle)}`);
  }

  generateBehaviors(bundle: string): Promise<{ pedestrians: string[] }> {
    return this.request("POST", `/api/behaviors?bundle=${encodeURIComponent(bundle)}`, {});
  }

  simulate(
    bundle: string,
    planner: string,
    seed: number,
  ): Promise<{ run: string; termination: string; metrics: MetricsDoc }> {
    return this.request("POST", `/api/simulate?bundle=${encodeURIComponent(bundle)}`, {
      planner,
      seed,
    });
  }

  async trace(bundle: string, run: string): Promise<Trace> {
    const res = await fetch(
      `${this.base}/api/trace/${encodeURIComponent(run)}?bundle=${encodeURIComponent(bundle)}`,
    );
    if (!res.ok) {
      throw new ApiError(res.status, "UnknownRun", [run], []);
    }
    return parseTraceJsonl(await res.text());
  }

  metrics(bundle: string, run: string): Promise<MetricsDoc> {
    return this.request(
      "GET",
      `/api/metrics/${encodeURIComponent(run)}?bundle=${encodeURIComponent(bundle)}`,
    );
  }
}
