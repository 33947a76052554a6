// Run inspection state: a 1 s poller with at most one in-flight request,
// the thumbnail/workspace selection, the input-vs-overlay toggle and the
// histogram panel. All numbers shown come from service responses.

import type { ApiClient } from "./api";
import type { HistogramData, RunRecord } from "./types";

export type InspectorListener = (record: RunRecord) => void;

export class RunPoller {
  private timer: ReturnType<typeof setInterval> | null = null;
  private inFlight = false;
  record: RunRecord | null = null;

  constructor(
    private api: ApiClient,
    private intervalMs = 1000,
  ) {}

  /** Poll until the run settles; resolves with the final record. */
  start(runId: string, onUpdate?: InspectorListener): Promise<RunRecord> {
    this.stop();
    return new Promise((resolve, reject) => {
      const tick = async () => {
        if (this.inFlight) return; // never more than one request in the air
        this.inFlight = true;
        try {
          const record = await this.api.getRun(runId);
          this.record = record;
          onUpdate?.(record);
          if (record.status === "done" || record.status === "error") {
            this.stop();
            resolve(record);
          }
        } catch (err) {
          this.stop();
          reject(err);
        } finally {
          this.inFlight = false;
        }
      };
      this.timer = setInterval(tick, this.intervalMs);
      void tick();
    });
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}

export interface OverlayState {
  view: "input" | "overlay";
  opacity: number; // 0..1 applied to the overlay layer
}

export function initialOverlayState(): OverlayState {
  return { view: "overlay", opacity: 1.0 };
}

/** The image that should be visible given toggle and opacity. */
export function effectiveLayer(state: OverlayState): "input" | "overlay" {
  if (state.view === "input") return "input";
  return state.opacity <= 0 ? "input" : "overlay";
}

export interface HistogramView {
  attr: "length" | "width";
  bins: number;
  data: HistogramData | null;
  total: number; // edge count shown in the legend
}

export async function loadHistogram(
  api: ApiClient,
  runId: string,
  attr: "length" | "width",
  bins: number,
): Promise<HistogramView> {
  const data = await api.getHistogram(runId, attr, bins);
  const total = data.counts.reduce((a, b) => a + b, 0);
  return { attr, bins, data, total };
}

/** Normalized bar geometry for a simple canvas/SVG renderer. */
export function histogramBars(data: HistogramData): { x0: number; x1: number; h: number }[] {
  const max = Math.max(...data.counts, 1);
  const n = data.counts.length;
  return data.counts.map((count, i) => ({
    x0: i / n,
    x1: (i + 1) / n,
    h: count / max,
  }));
}
