// Console state and its reducer. Pure data in, pure data out: the
// WebSocket layer feeds events, the renderers read the latest model.
// Message handling is last-write-wins per message type.

import type { BoundariesMsg, MetricsMsg, SceneInfo, ServerMsg, SourceReading, StateMsg } from "./protocol.js";

export const METRICS_WINDOW_S = 60;

// PR color bands, documented in the UI help: below 3 dB the source is
// kept, above 10 dB it is suppressed, in between it is partially reduced.
export const PR_BAND_KEPT_DB = 3;
export const PR_BAND_SUPPRESSED_DB = 10;

export type Connection = "connecting" | "open" | "closed";

export interface MetricsPoint {
  t_s: number;
  delta_pr_db: number | null;
}

export interface ConsoleModel {
  connection: Connection;
  status: StateMsg["status"];
  scene: SceneInfo | null;
  gammaControl: number;
  ackedGamma: number;
  boundaries: BoundariesMsg | null;
  sources: SourceReading[];
  metricsHistory: MetricsPoint[];
  summary: StateMsg["summary"] | null;
  lastError: string | null;
}

export type ConsoleEvent =
  | { kind: "connecting" }
  | { kind: "connected" }
  | { kind: "disconnected" }
  | { kind: "slider"; gamma_deg: number }
  | { kind: "server"; msg: ServerMsg };

export function initialModel(): ConsoleModel {
  return {
    connection: "connecting",
    status: "idle",
    scene: null,
    gammaControl: 0,
    ackedGamma: 0,
    boundaries: null,
    sources: [],
    metricsHistory: [],
    summary: null,
    lastError: null,
  };
}

export function reduce(model: ConsoleModel, event: ConsoleEvent): ConsoleModel {
  switch (event.kind) {
    case "connecting":
      return { ...model, connection: "connecting" };
    case "connected":
      return { ...model, connection: "open", lastError: null };
    case "disconnected":
      return { ...model, connection: "closed" };
    case "slider":
      return { ...model, gammaControl: event.gamma_deg };
    case "server":
      return applyServer(model, event.msg);
  }
}

function applyServer(model: ConsoleModel, msg: ServerMsg): ConsoleModel {
  switch (msg.type) {
    case "state": {
      const scene = msg.scene ?? model.scene;
      const sources = msg.scene
        ? msg.scene.sources.map((s) => ({ ...s, pr_db: null }))
        : model.sources;
      return {
        ...model,
        status: msg.status,
        scene,
        sources,
        ackedGamma: msg.gamma_deg,
        gammaControl: msg.gamma_deg,
        summary: msg.summary ?? model.summary,
      };
    }
    case "boundaries":
      return {
        ...model,
        boundaries: msg,
        ackedGamma: msg.gamma_deg,
        lastError: null,
      };
    case "metrics":
      return {
        ...model,
        sources: msg.per_source,
        metricsHistory: pushMetrics(model.metricsHistory, msg),
      };
    case "error":
      // server rejected something: snap the control back to the last
      // acknowledged steering angle
      return { ...model, lastError: msg.msg, gammaControl: model.ackedGamma };
  }
}

function pushMetrics(history: MetricsPoint[], msg: MetricsMsg): MetricsPoint[] {
  const next = [...history, { t_s: msg.t_s, delta_pr_db: msg.delta_pr_db }];
  const cutoff = msg.t_s - METRICS_WINDOW_S;
  return next.filter((p) => p.t_s >= cutoff);
}

export function controlsEnabled(model: ConsoleModel): boolean {
  return model.connection === "open";
}

export type PrBand = "kept" | "partial" | "suppressed" | "unknown";

export function prBand(prDb: number | null): PrBand {
  if (prDb === null || !isFinite(prDb)) return "unknown";
  if (prDb < PR_BAND_KEPT_DB) return "kept";
  if (prDb <= PR_BAND_SUPPRESSED_DB) return "partial";
  return "suppressed";
}

export function saturatedSides(model: ConsoleModel): string[] {
  return model.boundaries?.eq12.saturated ?? [];
}
