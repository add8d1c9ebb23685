// Top-down view of the scene: array at the origin, ROI wedges, source
// markers colored by their live power reduction. All boundary angles
// come straight from the last server message.

import { ConsoleModel, prBand } from "./model.js";

const BAND_COLORS: Record<string, string> = {
  kept: "#2e9e4f",
  partial: "#d8a400",
  suppressed: "#c0392b",
  unknown: "#888888",
};

interface Canvas2D {
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  stroke(): void;
  fill(): void;
  setLineDash(d: number[]): void;
  fillText(text: string, x: number, y: number): void;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  fillStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
}

// incident angle -> canvas point; array axis drawn horizontal, broadside up
export function project(angleDeg: number, radius: number, cx: number, cy: number,
                        scale: number): [number, number] {
  const rad = (angleDeg * Math.PI) / 180;
  return [cx + scale * radius * Math.cos(rad), cy - scale * radius * Math.sin(rad)];
}

function ray(ctx: Canvas2D, angleDeg: number, cx: number, cy: number, scale: number,
             reach: number, color: string, dash: number[]): void {
  ctx.setLineDash(dash);
  ctx.strokeStyle = color;
  for (const signed of [angleDeg, -angleDeg]) {
    const [x, y] = project(signed, reach, cx, cy, scale);
    ctx.beginPath();
    ctx.moveTo(cx, cy);
    ctx.lineTo(x, y);
    ctx.stroke();
  }
  ctx.setLineDash([]);
}

export function renderPolar(model: ConsoleModel, ctx: Canvas2D,
                            width: number, height: number): void {
  ctx.clearRect(0, 0, width, height);
  const cx = width / 2;
  const cy = height / 2;
  const reach = 3.2;
  const scale = Math.min(width, height) / (2 * reach * 1.1);

  ctx.strokeStyle = "#cccccc";
  ctx.lineWidth = 1;
  for (const r of [1, 2, 3]) {
    ctx.beginPath();
    ctx.arc(cx, cy, r * scale, 0, 2 * Math.PI);
    ctx.stroke();
  }
  // array axis
  ctx.beginPath();
  ctx.moveTo(cx - reach * scale, cy);
  ctx.lineTo(cx + reach * scale, cy);
  ctx.stroke();

  const b = model.boundaries;
  if (b) {
    ctx.lineWidth = 2;
    // mirrored region dashed grey: the front-back ambiguity made visible
    if (b.eq12.mirrored) {
      for (const angle of b.eq12.mirrored) {
        const [x, y] = project(angle, reach, cx, cy, scale);
        ctx.setLineDash([4, 4]);
        ctx.strokeStyle = "#999999";
        ctx.beginPath();
        ctx.moveTo(cx, cy);
        ctx.lineTo(x, y);
        ctx.stroke();
        ctx.setLineDash([]);
      }
    }
    // initial ROI in black, naive linear shift dashed orange, exact
    // steered boundaries solid red
    ray(ctx, 90 + 10, cx, cy, scale, reach, "#000000", []);
    ray(ctx, 90 - 10, cx, cy, scale, reach, "#000000", []);
    for (const phi of [b.linear.phi_l, b.linear.phi_r]) {
      ray(ctx, phi, cx, cy, scale, reach, "#e67e22", [8, 5]);
    }
    for (const phi of [b.eq12.phi_l, b.eq12.phi_r]) {
      ray(ctx, phi, cx, cy, scale, reach, "#c0392b", []);
    }
  }

  ctx.font = "12px sans-serif";
  for (const source of model.sources) {
    const [x, y] = project(source.angle_deg, 2.2, cx, cy, scale);
    ctx.fillStyle = BAND_COLORS[prBand(source.pr_db)];
    ctx.beginPath();
    ctx.arc(x, y, 7, 0, 2 * Math.PI);
    ctx.fill();
    const label = source.pr_db === null ? source.role : `${source.role} ${source.pr_db.toFixed(1)} dB`;
    ctx.fillText(label, x + 10, y);
  }
}
