// Console round trip against a scripted server: the slider drives a steer
// message, the server's boundary reply lands in the model within the
// 100 ms budget, saturation renders as a badge, and a dropped connection
// disables the control without emitting anything.

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { SocketLike } from "./connection.js";
import { STEER_DEBOUNCE_MS, SteeringConsole } from "./console.js";
import { controlsEnabled, saturatedSides } from "./model.js";

class FakeServerSocket implements SocketLike {
  onopen: (() => void) | null = null;
  onclose: (() => void) | null = null;
  onmessage: ((ev: { data: string }) => void) | null = null;
  sent: string[] = [];
  replyDelayMs = 10;

  send(data: string): void {
    this.sent.push(data);
    const msg = JSON.parse(data);
    if (msg.type !== "steer") return;
    const gamma = msg.gamma_deg;
    const reply = this.boundariesFor(gamma);
    setTimeout(() => this.onmessage?.({ data: JSON.stringify(reply) }), this.replyDelayMs);
  }

  boundariesFor(gamma: number): object {
    if (gamma > 80) {
      return { v: 1, type: "error", msg: `gamma ${gamma} out of range` };
    }
    // values the control service computes for beta = 10 deg
    const table: Record<number, [number, number, string[]]> = {
      0: [100.0, 80.0, []],
      25: [75.583, 53.397, []],
      75: [38.94, 0.0, ["right"]],
    };
    const [l, r, saturated] = table[gamma] ?? [100 - gamma, 80 - gamma, []];
    return {
      v: 1, type: "boundaries", gamma_deg: gamma,
      eq12: { phi_l: l, phi_r: r, saturated, mirrored: [360 - r, 360 - l] },
      linear: { phi_l: 100 - gamma, phi_r: 80 - gamma },
    };
  }

  open(): void {
    this.onopen?.();
  }

  close(): void {
    this.onclose?.();
  }
}

function makeConsole(): { app: SteeringConsole; socket: FakeServerSocket } {
  const socket = new FakeServerSocket();
  const app = new SteeringConsole("ws://test/session", () => socket);
  app.connect();
  socket.open();
  return { app, socket };
}

describe("console round trip", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("slider 0 -> 25 updates the overlay to server values within 100 ms", () => {
    const { app, socket } = makeConsole();
    app.onSliderChange(25);
    expect(app.model.gammaControl).toBe(25);
    expect(app.model.boundaries).toBeNull();
    vi.advanceTimersByTime(STEER_DEBOUNCE_MS + socket.replyDelayMs);
    expect(vi.getTimerCount()).toBe(0); // everything settled inside 60 ms < 100 ms
    expect(app.model.boundaries?.eq12.phi_l).toBeCloseTo(75.583, 2);
    expect(app.model.boundaries?.eq12.phi_r).toBeCloseTo(53.397, 2);
    expect(app.model.ackedGamma).toBe(25);
  });

  it("drag emits one steer message per settle, not one per step", () => {
    const { app, socket } = makeConsole();
    for (const g of [5, 10, 15, 20, 25]) {
      app.onSliderChange(g);
      vi.advanceTimersByTime(10);
    }
    vi.advanceTimersByTime(200);
    const steers = socket.sent.filter((s) => JSON.parse(s).type === "steer");
    expect(steers).toHaveLength(1);
    expect(JSON.parse(steers[0]).gamma_deg).toBe(25);
  });

  it("saturating steer pins the boundary and raises the badge", () => {
    const { app } = makeConsole();
    app.onSliderChange(75);
    vi.advanceTimersByTime(200);
    expect(app.model.boundaries?.eq12.phi_r).toBe(0);
    expect(saturatedSides(app.model)).toEqual(["right"]);
  });

  it("rejected steer snaps the slider back to the acknowledged angle", () => {
    const { app } = makeConsole();
    app.onSliderChange(25);
    vi.advanceTimersByTime(200);
    app.onSliderChange(85);
    vi.advanceTimersByTime(200);
    expect(app.model.lastError).toContain("out of range");
    expect(app.model.gammaControl).toBe(25);
  });

  it("disconnect disables the control and emits nothing", () => {
    const { app, socket } = makeConsole();
    socket.close();
    expect(controlsEnabled(app.model)).toBe(false);
    const before = socket.sent.length;
    app.onSliderChange(30);
    vi.advanceTimersByTime(500);
    expect(socket.sent.length).toBe(before);
  });
});
