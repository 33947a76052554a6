// @vitest-environment happy-dom
//
// DOM smoke test: boot the app against a mocked service and click
// through the editor chrome.

import { beforeEach, describe, expect, it, vi } from "vitest";

import { App } from "../src/app";
import { ApiClient } from "../src/api";
import { SCHEMA } from "./validation.test";

const WATERSHED = {
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

function mockApi(): ApiClient {
  const api = new ApiClient();
  vi.spyOn(api, "getSchema").mockResolvedValue(SCHEMA);
  vi.spyOn(api, "getPipelines").mockResolvedValue([WATERSHED as never]);
  return api;
}

describe("App DOM", () => {
  let root: HTMLElement;
  let app: App;

  beforeEach(async () => {
    document.body.innerHTML = '<div id="app"></div>';
    root = document.getElementById("app") as HTMLElement;
    app = new App(root, mockApi(), window.localStorage);
    await app.boot();
  });

  it("renders the palette grouped by the four categories", () => {
    const groups = root.querySelectorAll(".palette-group");
    expect(groups.length).toBe(4);
    const buttons = root.querySelectorAll(".palette-add");
    expect(buttons.length).toBe(Object.keys(SCHEMA).length);
  });

  it("loads default_watershed into five stage cards", async () => {
    (root.querySelector("#pipeline-list") as HTMLSelectElement).value =
      "default_watershed";
    (root.querySelector("#pipeline-load") as HTMLButtonElement).click();
    await Promise.resolve();
    const cards = root.querySelectorAll(".stage-card");
    expect(cards.length).toBe(5);
    expect(cards[0].textContent).toContain("gaussian_blur");
    expect(cards[4].textContent).toContain("merge_close_junctions");
  });

  it("rejects an illegal move with a status message", async () => {
    (root.querySelector("#pipeline-list") as HTMLSelectElement).value =
      "default_watershed";
    (root.querySelector("#pipeline-load") as HTMLButtonElement).click();
    await Promise.resolve();
    const thinningCard = root.querySelectorAll(".stage-card")[2];
    const upButton = [...thinningCard.querySelectorAll("button")].find(
      (b) => b.textContent === "up",
    ) as HTMLButtonElement;
    upButton.click();
    expect((root.querySelector("#status") as HTMLElement).textContent).toContain(
      "rejected",
    );
    // order unchanged
    expect(root.querySelectorAll(".stage-card")[2].textContent).toContain("guo_hall");
  });

  it("shows an inline error for block_size=4 before submission", async () => {
    const addButton = [...root.querySelectorAll<HTMLButtonElement>(".palette-add")].find(
      (b) => b.dataset.algorithm === "adaptive_mean_threshold",
    ) as HTMLButtonElement;
    addButton.click();
    await Promise.resolve();
    const card = root.querySelector(".stage-card") as HTMLElement;
    const blockInput = [...card.querySelectorAll("label")]
      .find((l) => l.textContent?.includes("block_size"))
      ?.querySelector("input") as HTMLInputElement;
    blockInput.value = "4";
    blockInput.dispatchEvent(new Event("change", { bubbles: true }));
    await Promise.resolve();
    const error = root.querySelector(".stage-error") as HTMLElement;
    expect(error.textContent).toContain("must be odd");
    expect((root.querySelector("#run") as HTMLButtonElement).disabled).toBe(true);
  });

  it("keeps the run button disabled until an image and full pipeline exist", () => {
    const run = root.querySelector("#run") as HTMLButtonElement;
    expect(run.disabled).toBe(true);
    expect((root.querySelector("#run-note") as HTMLElement).textContent).toContain(
      "segmentation",
    );
  });
});
