// Trace parsing and playback state: pure functions over the JSONL format
// (config header record, tick records with embedded events, end record).

import type { AgentSnapshot, TickRecord, Trace, TraceEvent } from "./types.js";

export function parseTraceJsonl(text: string): Trace {
  const lines = text.split("\n").filter((ln) => ln.trim().length > 0);
  if (lines.length === 0) {
    throw new Error("empty trace");
  }
  const header = JSON.parse(lines[0]);
  if (header.type !== "config") {
    throw new Error("trace must start with a config record");
  }
  const trace: Trace = {
    config: header,
    initial: (header.agents_initial ?? []) as AgentSnapshot[],
    ticks: [],
    termination: "unterminated",
  };
  for (const line of lines.slice(1)) {
    const doc = JSON.parse(line);
    if (doc.type === "tick") {
      trace.ticks.push(doc as TickRecord);
    } else if (doc.type === "end") {
      trace.termination = doc.reason;
    }
  }
  return trace;
}

/** Frame for the scrubber: index 0 is the initial pose set, then each tick. */
export function frameCount(trace: Trace): number {
  return trace.ticks.length + 1;
}

export function frameAt(trace: Trace, index: number): AgentSnapshot[] {
  if (index <= 0) {
    return trace.initial;
  }
  const tick = trace.ticks[Math.min(index, trace.ticks.length) - 1];
  return tick.agents;
}

export function frameTime(trace: Trace, index: number): number {
  if (index <= 0) {
    return 0;
  }
  return trace.ticks[Math.min(index, trace.ticks.length) - 1].t;
}

export interface TimelineFlag {
  frame: number;
  t: number;
  label: string;
  kind: string;
}

/** Gesture and scenario-manager events as timeline flags, in tick order. */
export function timelineFlags(trace: Trace): TimelineFlag[] {
  const flags: TimelineFlag[] = [];
  for (const tick of trace.ticks) {
    for (const ev of tick.events) {
      flags.push({
        frame: tick.tick,
        t: tick.t,
        kind: ev.type,
        label: describeEvent(ev),
      });
    }
  }
  return flags;
}

export function describeEvent(ev: TraceEvent): string {
  switch (ev.type) {
    case "hold":
      return `hold ${ev.ped}`;
    case "release":
      return `release ${ev.ped} (${ev.cause})`;
    case "encounter_reached":
      return `${ev.agent} at encounter`;
    case "gesture":
      return `gesture ${ev.code}: ${ev.from} -> ${ev.to}`;
    default:
      return ev.type;
  }
}
