import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import type { ApiClient } from "../src/api";
import {
  RunPoller,
  effectiveLayer,
  histogramBars,
  initialOverlayState,
  loadHistogram,
} from "../src/inspector";
import type { RunRecord } from "../src/types";

function record(status: RunRecord["status"], artifacts: number): RunRecord {
  return {
    run_id: "r1",
    image_id: "i1",
    pipeline: { name: "p", stages: [] },
    status,
    stage_artifacts: Array.from({ length: artifacts }, (_, i) => ({
      stage: `s${i}`,
      kind: "image",
      url: `/api/runs/r1/stages/${i}/image`,
    })),
    created_at: "2020-01-01T00:00:00Z",
    error: status === "error" ? { stage: "s0", message: "boom" } : null,
  };
}

describe("RunPoller", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("polls at 1s until done and reports each update", async () => {
    const sequence = [record("queued", 0), record("running", 2), record("done", 6)];
    let calls = 0;
    const api = {
      getRun: vi.fn(async () => sequence[Math.min(calls++, sequence.length - 1)]),
    } as unknown as ApiClient;

    const poller = new RunPoller(api, 1000);
    const seen: string[] = [];
    const settled = poller.start("r1", (r) => seen.push(r.status));
    await vi.advanceTimersByTimeAsync(0); // immediate first tick
    await vi.advanceTimersByTimeAsync(2100);
    const final = await settled;
    expect(final.status).toBe("done");
    expect(final.stage_artifacts.length).toBe(6); // 4 stages + detection + overlay
    expect(seen).toEqual(["queued", "running", "done"]);
    expect((api.getRun as ReturnType<typeof vi.fn>).mock.calls.length).toBe(3);
  });

  it("stops polling after the run settles", async () => {
    const api = { getRun: vi.fn(async () => record("done", 4)) } as unknown as ApiClient;
    const poller = new RunPoller(api, 1000);
    const settled = poller.start("r1");
    await vi.advanceTimersByTimeAsync(0);
    await settled;
    await vi.advanceTimersByTimeAsync(5000);
    expect((api.getRun as ReturnType<typeof vi.fn>).mock.calls.length).toBe(1);
  });

  it("keeps at most one request in flight", async () => {
    // each response takes 1.5 poll intervals, so interval ticks overlap a
    // pending request and must be skipped
    let inFlight = 0;
    let peak = 0;
    let calls = 0;
    const api = {
      getRun: vi.fn(async () => {
        inFlight++;
        peak = Math.max(peak, inFlight);
        calls++;
        await new Promise((resolve) => setTimeout(resolve, 1500));
        inFlight--;
        return record(calls >= 3 ? "done" : "running", 2);
      }),
    } as unknown as ApiClient;

    const poller = new RunPoller(api, 1000);
    const settled = poller.start("r1");
    await vi.advanceTimersByTimeAsync(10_000);
    const final = await settled;
    expect(final.status).toBe("done");
    expect(peak).toBe(1);
  });

  it("rejects on transport errors", async () => {
    const api = {
      getRun: vi.fn(async () => {
        throw new Error("410 gone");
      }),
    } as unknown as ApiClient;
    const poller = new RunPoller(api, 1000);
    const settled = poller.start("r1");
    const assertion = expect(settled).rejects.toThrow(/gone/);
    await vi.advanceTimersByTimeAsync(0);
    await assertion;
  });
});

describe("overlay state", () => {
  it("opacity zero shows the base image", () => {
    const state = initialOverlayState();
    expect(effectiveLayer(state)).toBe("overlay");
    state.opacity = 0;
    expect(effectiveLayer(state)).toBe("input");
  });

  it("input toggle wins regardless of opacity", () => {
    const state = initialOverlayState();
    state.view = "input";
    state.opacity = 1;
    expect(effectiveLayer(state)).toBe("input");
  });
});

describe("histogram panel", () => {
  it("legend total equals the sum of counts", async () => {
    const api = {
      getHistogram: vi.fn(async () => ({ edges: [0, 5, 10], counts: [3, 7] })),
    } as unknown as ApiClient;
    const view = await loadHistogram(api, "r1", "width", 2);
    expect(view.total).toBe(10);
    expect(view.attr).toBe("width");
  });

  it("bar geometry is normalized", () => {
    const bars = histogramBars({ edges: [0, 1, 2, 3], counts: [1, 4, 2] });
    expect(bars.length).toBe(3);
    expect(bars[1].h).toBe(1);
    expect(bars[0].h).toBe(0.25);
    expect(bars[2].x1).toBeCloseTo(1.0);
  });
});
