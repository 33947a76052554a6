// Scripted UI-loop test against a live backend: upload a fixture, build
// default_watershed in the editor, run, inspect stage artifacts and the
// overlay, widen the merge radius, re-run, and check that the second
// graph differs from the first only by the merged junction pair.

import { execFileSync, spawn } from "node:child_process";
import type { ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { PipelineDraft } from "../src/editor";
import { RunPoller, loadHistogram } from "../src/inspector";
import type { PipelineObj } from "../src/types";

const REPO_ROOT = join(__dirname, "..", "..");

let server: ChildProcess | null = null;
let base = "";
let fixtureDir = "";
let fixturePng: Buffer;

async function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address && typeof address === "object") {
        const port = address.port;
        probe.close(() => resolve(port));
      } else {
        reject(new Error("no port"));
      }
    });
  });
}

async function waitForHealth(url: string, timeoutMs = 30_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const res = await fetch(`${url}/api/health`);
      if (res.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 250));
  }
  throw new Error("service did not come up");
}

beforeAll(async () => {
  fixtureDir = mkdtempSync(join(tmpdir(), "netgrab-ui-e2e-"));
  const png = join(fixtureDir, "branches.png");
  // one horizontal trunk with two vertical branches 8 px apart: their
  // junctions merge at radius 12 but not at the default radius 4
  execFileSync(
    "python3",
    [
      "-c",
      `
import sys
sys.path.insert(0, ${JSON.stringify(join(REPO_ROOT, "tests"))})
import numpy as np
from synth import draw_segments
from netgrab.raster import GrayImage, save_png
img = draw_segments((120, 180), [
    ((20, 60), (160, 60)),
    ((86, 60), (86, 20)),
    ((94, 60), (94, 110)),
])
save_png(GrayImage(img), ${JSON.stringify(png)})
`,
    ],
    { cwd: REPO_ROOT },
  );
  fixturePng = readFileSync(png);

  const port = await freePort();
  base = `http://127.0.0.1:${port}`;
  server = spawn(
    "python3",
    ["-m", "netgrab.cli", "serve", "--port", String(port), "--host", "127.0.0.1"],
    { cwd: REPO_ROOT, stdio: "ignore" },
  );
  await waitForHealth(base);
}, 60_000);

afterAll(() => {
  server?.kill("SIGINT");
  if (fixtureDir) rmSync(fixtureDir, { recursive: true, force: true });
});

interface ParsedGraph {
  nodes: Map<number, [number, number]>;
  edges: { u: number; v: number; length: number; width: number }[];
}

function parseGraph(text: string): ParsedGraph {
  const nodes = new Map<number, [number, number]>();
  const edges: ParsedGraph["edges"] = [];
  for (const line of text.split("\n")) {
    const fields = line.trim().split(/\s+/);
    if (fields[0] === "node") {
      nodes.set(Number(fields[1]), [Number(fields[2]), Number(fields[3])]);
    } else if (fields[0] === "edge") {
      const attrs = Object.fromEntries(
        fields.slice(4).map((token) => token.split("=") as [string, string]),
      );
      edges.push({
        u: Number(fields[2]),
        v: Number(fields[3]),
        length: Number(attrs.length),
        width: Number(attrs.width),
      });
    }
  }
  return { nodes, edges };
}

describe("UI loop against the live service", () => {
  it(
    "upload, edit, run, inspect, retune, re-run",
    async () => {
      const api = new ApiClient(base);

      // upload the fixture
      const imageId = await api.uploadImage(fixturePng);
      expect(imageId).toBeTruthy();

      // build default_watershed in the editor from the service's own list
      const schema = await api.getSchema();
      const pipelines = await api.getPipelines();
      const watershed = pipelines.find((p) => p.name === "default_watershed");
      expect(watershed).toBeDefined();
      const draft = new PipelineDraft(schema);
      draft.loadFrom(watershed as PipelineObj);
      expect(draft.stages.length).toBe(5);
      expect(draft.problem()).toBeNull();

      // the editor mirrors the server: an illegal drop is refused locally
      expect(draft.moveStage(2, 0)).not.toBeNull();

      // first run
      const firstRun = await api.submitRun(imageId, draft.toObject());
      const poller = new RunPoller(api, 100);
      const first = await poller.start(firstRun);
      expect(first.status).toBe("done");
      // stage thumbnails: 5 stages + implicit detection + overlay
      expect(first.stage_artifacts.length).toBe(7);
      for (const artifact of first.stage_artifacts) {
        const res = await fetch(api.thumbnailUrl(artifact.url, 64));
        expect(res.status).toBe(200);
        expect(res.headers.get("content-type")).toBe("image/png");
      }
      const overlay = await fetch(api.overlayUrl(firstRun));
      expect(overlay.status).toBe(200);

      const histogram = await loadHistogram(api, firstRun, "length", 10);
      const graph1 = parseGraph(await api.getGraphText(firstRun));
      expect(histogram.total).toBe(graph1.edges.length);

      // feed what we saw back into the next parameter change: widen the
      // merge radius so the two branch junctions fuse
      const mergeIndex = draft.stages.findIndex(
        (d) => d.stage.algorithm === "merge_close_junctions",
      );
      draft.setParam(mergeIndex, "radius", 12);
      expect(draft.stages[mergeIndex].error).toBeNull();

      const secondRun = await api.submitRun(imageId, draft.toObject());
      const second = await new RunPoller(api, 100).start(secondRun);
      expect(second.status).toBe("done");
      const graph2 = parseGraph(await api.getGraphText(secondRun));

      // the junction pair merged: one vertex fewer, the connecting edge
      // gone, every unmerged vertex still present at identical coordinates
      expect(graph2.nodes.size).toBe(graph1.nodes.size - 1);
      expect(graph2.edges.length).toBe(graph1.edges.length - 1);
      const coords1 = new Set(
        [...graph1.nodes.values()].map(([x, y]) => `${x},${y}`),
      );
      let fresh = 0;
      for (const [x, y] of graph2.nodes.values()) {
        if (!coords1.has(`${x},${y}`)) fresh++;
      }
      expect(fresh).toBe(1); // exactly the merged centroid is new
    },
    120_000,
  );
});
