import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { debounce } from "./debounce.js";

describe("debounce", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("fires once with the last value after the delay", () => {
    const calls: number[] = [];
    const fn = debounce((v: number) => calls.push(v), 50);
    fn(1);
    fn(2);
    vi.advanceTimersByTime(30);
    fn(3);
    vi.advanceTimersByTime(49);
    expect(calls).toEqual([]);
    vi.advanceTimersByTime(1);
    expect(calls).toEqual([3]);
  });

  it("separate settles fire separately", () => {
    const calls: number[] = [];
    const fn = debounce((v: number) => calls.push(v), 50);
    fn(1);
    vi.advanceTimersByTime(50);
    fn(2);
    vi.advanceTimersByTime(50);
    expect(calls).toEqual([1, 2]);
  });
});
