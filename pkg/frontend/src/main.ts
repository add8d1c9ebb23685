// DOM wiring: slider, badges, canvases, transport buttons.

import { renderMetrics } from "./chart.js";
import { defaultSessionUrl } from "./connection.js";
import { SteeringConsole } from "./console.js";
import { controlsEnabled, saturatedSides } from "./model.js";
import { renderPolar } from "./polar.js";

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

const app = new SteeringConsole(defaultSessionUrl(window.location));

const slider = byId<HTMLInputElement>("gamma-slider");
const gammaLabel = byId<HTMLSpanElement>("gamma-value");
const banner = byId<HTMLDivElement>("banner");
const badge = byId<HTMLSpanElement>("saturated-badge");
const statusLabel = byId<HTMLSpanElement>("status");
const boundsLabel = byId<HTMLSpanElement>("bounds");
const polarCanvas = byId<HTMLCanvasElement>("polar");
const chartCanvas = byId<HTMLCanvasElement>("chart");
const summaryBox = byId<HTMLPreElement>("summary");

slider.addEventListener("input", () => {
  app.onSliderChange(Number(slider.value));
});
byId<HTMLButtonElement>("btn-start").addEventListener("click", () => app.start());
byId<HTMLButtonElement>("btn-stop").addEventListener("click", () => app.stop());
byId<HTMLButtonElement>("btn-load").addEventListener("click", () => {
  const name = byId<HTMLInputElement>("scene-path").value.trim();
  if (name) app.loadScene(name);
});

app.subscribe((model) => {
  const enabled = controlsEnabled(model);
  slider.disabled = !enabled;
  banner.hidden = enabled;
  slider.value = String(model.gammaControl);
  gammaLabel.textContent = `${model.gammaControl.toFixed(0)} deg`;
  statusLabel.textContent = `${model.connection} / ${model.status}`;

  const sides = saturatedSides(model);
  badge.hidden = sides.length === 0;
  badge.textContent = sides.length ? `saturated: ${sides.join(", ")}` : "";

  if (model.boundaries) {
    const eq = model.boundaries.eq12;
    boundsLabel.textContent =
      `steered [${eq.phi_r.toFixed(1)}, ${eq.phi_l.toFixed(1)}] deg` +
      ` (linear [${model.boundaries.linear.phi_r.toFixed(1)}, ` +
      `${model.boundaries.linear.phi_l.toFixed(1)}])`;
  }
  if (model.lastError) {
    statusLabel.textContent += ` | ${model.lastError}`;
  }
  summaryBox.textContent = model.summary
    ? JSON.stringify(model.summary, null, 2)
    : "";

  const pctx = polarCanvas.getContext("2d");
  if (pctx) renderPolar(model, pctx, polarCanvas.width, polarCanvas.height);
  const cctx = chartCanvas.getContext("2d");
  if (cctx) renderMetrics(model, cctx, chartCanvas.width, chartCanvas.height);
});

app.connect();
