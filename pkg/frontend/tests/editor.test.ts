import { describe, expect, it } from "vitest";

import { PipelineDraft, savePipeline, savedPipelines } from "../src/editor";
import type { NamedStore } from "../src/editor";
import type { PipelineObj } from "../src/types";
import { SCHEMA } from "./validation.test";

const DEFAULT_WATERSHED: PipelineObj = {
  name: "default_watershed",
  stages: [
    { category: "preprocessing", algorithm: "gaussian_blur", params: { kernel_size: 5 } },
    {
      category: "segmentation",
      algorithm: "guided_watershed",
      params: { fg_erosions: 2, bg_dilations: 2, foreground: "dark" },
    },
    { category: "thinning", algorithm: "guo_hall", params: {} },
    {
      category: "graph_filter",
      algorithm: "filter_small_components",
      params: { mode: "relative", threshold: 0.05 },
    },
    { category: "graph_filter", algorithm: "merge_close_junctions", params: { radius: 4 } },
  ],
};

function fakeStore(): NamedStore {
  const bag = new Map<string, string>();
  return {
    getItem: (k) => bag.get(k) ?? null,
    setItem: (k, v) => void bag.set(k, v),
  };
}

describe("PipelineDraft", () => {
  it("loads default_watershed as five stage cards in order", () => {
    const draft = new PipelineDraft(SCHEMA);
    draft.loadFrom(DEFAULT_WATERSHED);
    expect(draft.stages.length).toBe(5);
    expect(draft.stages.map((d) => d.stage.algorithm)).toEqual([
      "gaussian_blur",
      "guided_watershed",
      "guo_hall",
      "filter_small_components",
      "merge_close_junctions",
    ]);
  });

  it("serializes losslessly to the pipeline file schema", () => {
    const draft = new PipelineDraft(SCHEMA);
    draft.loadFrom(DEFAULT_WATERSHED);
    expect(draft.toObject()).toEqual(DEFAULT_WATERSHED);
  });

  it("rejects moving thinning above segmentation and keeps state", () => {
    const draft = new PipelineDraft(SCHEMA);
    draft.loadFrom(DEFAULT_WATERSHED);
    const refusal = draft.moveStage(2, 1);
    expect(refusal).toMatch(/thinning/);
    expect(draft.stages.map((d) => d.stage.algorithm)[2]).toBe("guo_hall");
  });

  it("rejects adding a second segmentation stage", () => {
    const draft = new PipelineDraft(SCHEMA);
    draft.loadFrom(DEFAULT_WATERSHED);
    const refusal = draft.addStage("otsu_threshold", 2);
    expect(refusal).not.toBeNull();
    expect(draft.stages.length).toBe(5);
  });

  it("adds palette stages with schema defaults", () => {
    const draft = new PipelineDraft(SCHEMA);
    expect(draft.addStage("otsu_threshold")).toBeNull();
    expect(draft.addStage("guo_hall")).toBeNull();
    expect(draft.stages[0].stage.params).toEqual({ foreground: "above" });
    expect(draft.orderHint()).toBeNull();
  });

  it("flags block_size=4 inline before submission", () => {
    const draft = new PipelineDraft(SCHEMA);
    draft.addStage("adaptive_mean_threshold");
    draft.addStage("guo_hall");
    draft.setParam(0, "block_size", 4);
    expect(draft.stages[0].error).toMatch(/must be odd/);
    expect(draft.stages[0].dirty).toBe(true);
    draft.setParam(0, "block_size", 11);
    expect(draft.stages[0].error).toBeNull();
  });

  it("attaches server 422s to the offending stage", () => {
    const draft = new PipelineDraft(SCHEMA);
    draft.addStage("otsu_threshold");
    draft.addStage("guo_hall");
    draft.setServerError(0, "stage 0: no good");
    expect(draft.stages[0].error).toBe("stage 0: no good");
    draft.clearErrors();
    expect(draft.stages[0].error).toBeNull();
  });

  it("reports missing mandatory stages as a run hint", () => {
    const draft = new PipelineDraft(SCHEMA);
    draft.addStage("otsu_threshold");
    expect(draft.orderHint()).toMatch(/thinning/);
  });

  it("never produces an order the validator rejects", () => {
    // exercise a random-ish edit storm; the draft must stay valid or
    // incomplete, never positionally illegal
    const draft = new PipelineDraft(SCHEMA);
    const palette = Object.keys(SCHEMA);
    let seed = 42;
    const rand = () => (seed = (seed * 1103515245 + 12345) % 2 ** 31) / 2 ** 31;
    let mutations = 0;
    for (let i = 0; i < 300; i++) {
      const action = rand();
      let refusal: string | null = null;
      if (action < 0.5) {
        refusal = draft.addStage(palette[Math.floor(rand() * palette.length)]);
      } else if (action < 0.75 && draft.stages.length > 0) {
        refusal = draft.moveStage(
          Math.floor(rand() * draft.stages.length),
          Math.floor(rand() * draft.stages.length),
        );
      } else if (draft.stages.length > 0) {
        refusal = draft.removeStage(Math.floor(rand() * draft.stages.length));
      }
      if (refusal === null) mutations++;
      const problem = draft.problem();
      if (problem) {
        // only completeness problems are allowed to remain
        expect(problem.stageIndex).toBeNull();
      }
    }
    expect(mutations).toBeGreaterThan(100); // the storm actually edited things
  });

  it("refuses removing segmentation while thinning remains", () => {
    const draft = new PipelineDraft(SCHEMA);
    draft.addStage("otsu_threshold");
    draft.addStage("guo_hall");
    const refusal = draft.removeStage(0);
    expect(refusal).toMatch(/out of order/);
    expect(draft.stages.length).toBe(2);
    expect(draft.removeStage(1)).toBeNull();
    expect(draft.removeStage(0)).toBeNull();
    expect(draft.stages.length).toBe(0);
  });
});

describe("named pipeline store", () => {
  it("saves and reloads by name", () => {
    const store = fakeStore();
    savePipeline(store, DEFAULT_WATERSHED);
    const again = { ...DEFAULT_WATERSHED, name: "another" };
    savePipeline(store, again);
    const names = savedPipelines(store).map((p) => p.name);
    expect(names).toEqual(["another", "default_watershed"]);
  });

  it("overwrites same-name entries", () => {
    const store = fakeStore();
    savePipeline(store, DEFAULT_WATERSHED);
    savePipeline(store, DEFAULT_WATERSHED);
    expect(savedPipelines(store).length).toBe(1);
  });
});
