// Scrolling delta-PR timeline over the last 60 s of metrics.

import { ConsoleModel, METRICS_WINDOW_S } from "./model.js";

interface Canvas2D {
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  fillText(text: string, x: number, y: number): void;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  fillStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
}

const Y_MAX_DB = 30;

export function renderMetrics(model: ConsoleModel, ctx: Canvas2D,
                              width: number, height: number): void {
  ctx.clearRect(0, 0, width, height);
  const points = model.metricsHistory.filter((p) => p.delta_pr_db !== null);
  ctx.strokeStyle = "#cccccc";
  ctx.lineWidth = 1;
  ctx.font = "11px sans-serif";
  ctx.fillStyle = "#666666";
  for (const db of [0, 10, 20, 30]) {
    const y = height - (db / Y_MAX_DB) * height;
    ctx.beginPath();
    ctx.moveTo(0, y);
    ctx.lineTo(width, y);
    ctx.stroke();
    ctx.fillText(`${db} dB`, 4, y - 2);
  }
  if (points.length < 2) return;
  const tEnd = points[points.length - 1].t_s;
  const tStart = tEnd - METRICS_WINDOW_S;
  ctx.strokeStyle = "#2c6fb3";
  ctx.lineWidth = 2;
  ctx.beginPath();
  points.forEach((p, i) => {
    const x = ((p.t_s - tStart) / METRICS_WINDOW_S) * width;
    const y = height - (Math.max(0, Math.min(p.delta_pr_db as number, Y_MAX_DB)) / Y_MAX_DB) * height;
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.stroke();
}
