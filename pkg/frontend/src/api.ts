// Thin fetch client for the extraction service.

import type { HistogramData, PipelineObj, RunRecord, SchemaMap } from "./types";

export class RunValidationError extends Error {
  stageIndex: number | null;

  constructor(message: string, stageIndex: number | null) {
    super(message);
    this.stageIndex = stageIndex;
  }
}

export class ApiError extends Error {
  status: number;

  constructor(message: string, status: number) {
    super(message);
    this.status = status;
  }
}

async function fail(res: Response): Promise<never> {
  let message = `${res.status}`;
  try {
    const body = await res.json();
    if (body && typeof body.message === "string") message = body.message;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(message, res.status);
}

export class ApiClient {
  constructor(private base: string = "") {}

  async health(): Promise<{ version: string }> {
    const res = await fetch(`${this.base}/api/health`);
    if (!res.ok) return fail(res);
    return res.json();
  }

  async uploadImage(png: Blob | ArrayBuffer): Promise<string> {
    const res = await fetch(`${this.base}/api/images`, {
      method: "POST",
      headers: { "Content-Type": "image/png" },
      body: png,
    });
    if (!res.ok) return fail(res);
    return (await res.json()).image_id;
  }

  imageUrl(imageId: string): string {
    return `${this.base}/api/images/${imageId}`;
  }

  async getPipelines(): Promise<PipelineObj[]> {
    const res = await fetch(`${this.base}/api/pipelines`);
    if (!res.ok) return fail(res);
    return res.json();
  }

  async getSchema(): Promise<SchemaMap> {
    const res = await fetch(`${this.base}/api/schema`);
    if (!res.ok) return fail(res);
    return res.json();
  }

  async submitRun(imageId: string, pipeline: PipelineObj): Promise<string> {
    const res = await fetch(`${this.base}/api/runs`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ image_id: imageId, pipeline }),
    });
    if (res.status === 422) {
      const body = await res.json();
      throw new RunValidationError(body.message ?? "invalid pipeline", body.stage_index ?? null);
    }
    if (!res.ok) return fail(res);
    return (await res.json()).run_id;
  }

  async getRun(runId: string): Promise<RunRecord> {
    const res = await fetch(`${this.base}/api/runs/${runId}`);
    if (!res.ok) return fail(res);
    return res.json();
  }

  thumbnailUrl(artifactUrl: string, maxSide = 256): string {
    return `${this.base}${artifactUrl}?max=${maxSide}`;
  }

  artifactUrl(artifactUrl: string): string {
    return `${this.base}${artifactUrl}`;
  }

  overlayUrl(runId: string): string {
    return `${this.base}/api/runs/${runId}/overlay`;
  }

  async getGraphText(runId: string): Promise<string> {
    const res = await fetch(`${this.base}/api/runs/${runId}/graph`);
    if (!res.ok) return fail(res);
    return res.text();
  }

  async getHistogram(
    runId: string,
    attr: "length" | "width",
    bins: number,
  ): Promise<HistogramData> {
    const res = await fetch(
      `${this.base}/api/runs/${runId}/histogram?attr=${attr}&bins=${bins}`,
    );
    if (!res.ok) return fail(res);
    return res.json();
  }
}
