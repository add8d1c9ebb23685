// Message shapes of the control-service WebSocket protocol (v1).
// The console never computes boundary geometry itself; it renders exactly
// what the server sends, so the two sides can never disagree.

export interface BoundaryPair {
  phi_l: number;
  phi_r: number;
}

export interface ExactBoundaries extends BoundaryPair {
  saturated: string[];
  mirrored?: [number, number];
}

export interface BoundariesMsg {
  type: "boundaries";
  gamma_deg: number;
  eq12: ExactBoundaries;
  linear: BoundaryPair;
}

export interface SourceInfo {
  angle_deg: number;
  role: string;
}

export interface SceneInfo {
  duration_s: number;
  sources: SourceInfo[];
}

export interface SegmentSummary {
  gamma_deg: number;
  t_start_s: number;
  t_end_s: number;
  si_sdr_db: number | null;
}

export interface StateMsg {
  type: "state";
  status: "idle" | "running" | "stopped";
  gamma_deg: number;
  scene: SceneInfo | null;
  summary?: { segments: SegmentSummary[] };
}

export interface SourceReading extends SourceInfo {
  pr_db: number | null;
}

export interface MetricsMsg {
  type: "metrics";
  t_s: number;
  per_source: SourceReading[];
  delta_pr_db: number | null;
}

export interface ErrorMsg {
  type: "error";
  msg: string;
}

export type ServerMsg = BoundariesMsg | StateMsg | MetricsMsg | ErrorMsg;

export function parseServerMsg(raw: string): ServerMsg | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const type = (data as { type?: unknown }).type;
  if (type === "boundaries" || type === "state" || type === "metrics" || type === "error") {
    return data as ServerMsg;
  }
  return null; // unknown types are ignored, unknown fields pass through
}

export function steerMsg(gammaDeg: number): string {
  return JSON.stringify({ v: 1, type: "steer", gamma_deg: gammaDeg });
}

export function loadSceneMsg(scene: object | string): string {
  return JSON.stringify({ v: 1, type: "load_scene", scene });
}

export function startMsg(): string {
  return JSON.stringify({ v: 1, type: "start" });
}

export function stopMsg(): string {
  return JSON.stringify({ v: 1, type: "stop" });
}
