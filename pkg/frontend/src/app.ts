// DOM wiring for the pipeline workbench: palette and stage cards on the
// right, thumbnails on the left, artifact workspace and histogram in the
// center (mirrors the classic three-pane layout).

import { ApiClient, RunValidationError } from "./api";
import { PipelineDraft, savePipeline, savedPipelines } from "./editor";
import {
  RunPoller,
  effectiveLayer,
  histogramBars,
  initialOverlayState,
  loadHistogram,
} from "./inspector";
import type { OverlayState } from "./inspector";
import type { PipelineObj, RunRecord, SchemaMap } from "./types";
import { CATEGORIES, CATEGORY_LABELS } from "./types";

export class App {
  private draft!: PipelineDraft;
  private schema!: SchemaMap;
  private imageId: string | null = null;
  private runId: string | null = null;
  private record: RunRecord | null = null;
  private overlay: OverlayState = initialOverlayState();
  private selected: number | "overlay" = "overlay";
  private poller: RunPoller;

  constructor(
    private root: HTMLElement,
    private api: ApiClient = new ApiClient(),
    private store: Storage = window.localStorage,
  ) {
    this.poller = new RunPoller(api);
  }

  async boot(): Promise<void> {
    this.schema = await this.api.getSchema();
    this.draft = new PipelineDraft(this.schema);
    this.draft.onChange(() => this.renderEditor());
    this.root.innerHTML = `
      <header>
        <h1>netgrab</h1>
        <span id="status" role="status"></span>
      </header>
      <main>
        <aside id="left">
          <section id="image-box">
            <h2>Image</h2>
            <input type="file" id="upload" accept="image/png" />
            <div id="image-note">no image uploaded</div>
          </section>
          <section>
            <h2>Runs</h2>
            <button id="run" disabled>Run pipeline</button>
            <div id="run-note"></div>
            <div id="thumbs"></div>
          </section>
        </aside>
        <section id="center">
          <div id="view-controls">
            <label><input type="radio" name="view" value="input" /> input</label>
            <label><input type="radio" name="view" value="overlay" checked /> overlay</label>
            <label id="opacity-box">opacity
              <input type="range" id="opacity" min="0" max="100" value="100" />
            </label>
          </div>
          <div id="workspace"><div id="placeholder">upload an image and run a pipeline</div></div>
          <section id="histogram-box">
            <h2>Edge histogram</h2>
            <label>attribute
              <select id="hist-attr">
                <option value="length">length</option>
                <option value="width">width</option>
              </select>
            </label>
            <label>bins <input type="number" id="hist-bins" value="20" min="1" /></label>
            <button id="hist-load" disabled>Load</button>
            <span id="hist-legend"></span>
            <svg id="hist-plot" viewBox="0 0 100 40" preserveAspectRatio="none"></svg>
          </section>
        </section>
        <aside id="right">
          <section>
            <h2>Pipelines</h2>
            <select id="pipeline-list"></select>
            <button id="pipeline-load">Load</button>
            <input id="pipeline-name" placeholder="name" />
            <button id="pipeline-save">Save</button>
          </section>
          <section>
            <h2>Stages</h2>
            <div id="stages"></div>
          </section>
          <section>
            <h2>Palette</h2>
            <div id="palette"></div>
          </section>
        </aside>
      </main>`;
    this.bindChrome();
    this.renderPalette();
    this.renderEditor();
    await this.refreshPipelineList();
  }

  private el<T extends HTMLElement>(selector: string): T {
    return this.root.querySelector(selector) as T;
  }

  private note(text: string): void {
    this.el("#status").textContent = text;
  }

  private bindChrome(): void {
    this.el<HTMLInputElement>("#upload").addEventListener("change", async (ev) => {
      const input = ev.target as HTMLInputElement;
      const file = input.files?.[0];
      if (!file) return;
      try {
        this.imageId = await this.api.uploadImage(file);
        this.el("#image-note").textContent = `image ${this.imageId}`;
        this.updateRunButton();
      } catch (err) {
        this.note(`upload failed: ${(err as Error).message}`);
      }
    });
    this.el("#run").addEventListener("click", () => void this.submitRun());
    this.el("#pipeline-load").addEventListener("click", () => void this.loadSelectedPipeline());
    this.el("#pipeline-save").addEventListener("click", () => this.saveCurrentPipeline());
    for (const radio of this.root.querySelectorAll<HTMLInputElement>("input[name=view]")) {
      radio.addEventListener("change", () => {
        this.overlay.view = radio.value as OverlayState["view"];
        this.renderWorkspace();
      });
    }
    this.el<HTMLInputElement>("#opacity").addEventListener("input", (ev) => {
      this.overlay.opacity = Number((ev.target as HTMLInputElement).value) / 100;
      this.renderWorkspace();
    });
    this.el("#hist-load").addEventListener("click", () => void this.refreshHistogram());
  }

  private async refreshPipelineList(): Promise<void> {
    const remote = await this.api.getPipelines();
    const local = savedPipelines(this.store);
    const names = new Map<string, PipelineObj>();
    for (const p of [...remote, ...local]) names.set(p.name, p);
    const select = this.el<HTMLSelectElement>("#pipeline-list");
    select.innerHTML = "";
    for (const name of [...names.keys()].sort()) {
      const option = document.createElement("option");
      option.value = name;
      option.textContent = name;
      select.appendChild(option);
    }
    (this as { pipelineIndex?: Map<string, PipelineObj> }).pipelineIndex = names;
  }

  private async loadSelectedPipeline(): Promise<void> {
    const name = this.el<HTMLSelectElement>("#pipeline-list").value;
    const index = (this as { pipelineIndex?: Map<string, PipelineObj> }).pipelineIndex;
    const pipeline = index?.get(name);
    if (pipeline) {
      this.draft.loadFrom(pipeline);
      this.el<HTMLInputElement>("#pipeline-name").value = pipeline.name;
      this.note(`loaded ${name}`);
    }
  }

  private saveCurrentPipeline(): void {
    const name = this.el<HTMLInputElement>("#pipeline-name").value.trim();
    if (!name) {
      this.note("give the pipeline a name first");
      return;
    }
    this.draft.name = name;
    savePipeline(this.store, this.draft.toObject());
    void this.refreshPipelineList();
    this.note(`saved ${name}`);
  }

  private renderPalette(): void {
    const palette = this.el("#palette");
    palette.innerHTML = "";
    for (const category of CATEGORIES) {
      const group = document.createElement("div");
      group.className = "palette-group";
      const head = document.createElement("h3");
      head.textContent = CATEGORY_LABELS[category];
      group.appendChild(head);
      for (const [algorithm, spec] of Object.entries(this.schema)) {
        if (spec.category !== category) continue;
        const button = document.createElement("button");
        button.className = "palette-add";
        button.dataset.algorithm = algorithm;
        button.textContent = `+ ${algorithm}`;
        button.addEventListener("click", () => {
          const refusal = this.draft.addStage(algorithm);
          this.note(refusal ? `rejected: ${refusal}` : `added ${algorithm}`);
        });
        group.appendChild(button);
      }
      palette.appendChild(group);
    }
  }

  private renderEditor(): void {
    const holder = this.el("#stages");
    holder.innerHTML = "";
    this.draft.stages.forEach((draft, index) => {
      const card = document.createElement("div");
      card.className = "stage-card" + (draft.error ? " has-error" : "");
      card.dataset.index = String(index);

      const title = document.createElement("div");
      title.className = "stage-title";
      title.textContent = `${index}. ${draft.stage.algorithm}`;
      card.appendChild(title);

      const controls = document.createElement("div");
      controls.className = "stage-controls";
      for (const [label, delta] of [["up", -1], ["down", 1]] as const) {
        const button = document.createElement("button");
        button.textContent = label;
        button.addEventListener("click", () => {
          const refusal = this.draft.moveStage(index, index + delta);
          if (refusal) this.note(`rejected: ${refusal}`);
        });
        controls.appendChild(button);
      }
      const remove = document.createElement("button");
      remove.textContent = "remove";
      remove.addEventListener("click", () => {
        const refusal = this.draft.removeStage(index);
        if (refusal) this.note(`rejected: ${refusal}`);
      });
      controls.appendChild(remove);
      card.appendChild(controls);

      const spec = this.schema[draft.stage.algorithm];
      for (const param of spec.params) {
        const row = document.createElement("label");
        row.className = "param-row";
        row.textContent = param.name + " ";
        let input: HTMLElement;
        if (param.choices) {
          const select = document.createElement("select");
          for (const choice of param.choices) {
            const option = document.createElement("option");
            option.value = choice;
            option.textContent = choice;
            select.appendChild(option);
          }
          select.value = String(draft.stage.params[param.name]);
          select.addEventListener("change", () =>
            this.draft.setParam(index, param.name, select.value),
          );
          input = select;
        } else {
          const field = document.createElement("input");
          field.type = param.kind === "str" ? "text" : "number";
          field.value = String(draft.stage.params[param.name]);
          field.addEventListener("change", () => {
            const raw = field.value;
            const value =
              param.kind === "int" || param.kind === "float" ? Number(raw) : raw;
            this.draft.setParam(index, param.name, value);
          });
          input = field;
        }
        row.appendChild(input);
        card.appendChild(row);
      }

      const error = document.createElement("div");
      error.className = "stage-error";
      error.textContent = draft.error ?? "";
      card.appendChild(error);
      holder.appendChild(card);
    });
    this.updateRunButton();
  }

  private updateRunButton(): void {
    const button = this.el<HTMLButtonElement>("#run");
    const hint = this.draft.orderHint();
    const paramProblem = this.draft.stages.some((d) => d.error !== null);
    button.disabled = this.imageId === null || hint !== null || paramProblem;
    this.el("#run-note").textContent = hint ?? "";
  }

  private async submitRun(): Promise<void> {
    if (!this.imageId) return;
    this.draft.clearErrors();
    const problem = this.draft.problem();
    if (problem) {
      this.draft.setServerError(problem.stageIndex, problem.message);
      return;
    }
    try {
      this.runId = await this.api.submitRun(this.imageId, this.draft.toObject());
    } catch (err) {
      if (err instanceof RunValidationError) {
        this.draft.setServerError(err.stageIndex, err.message);
        return;
      }
      this.note(`run failed: ${(err as Error).message}`);
      return;
    }
    this.note(`run ${this.runId} submitted`);
    this.el<HTMLButtonElement>("#hist-load").disabled = true;
    const record = await this.poller.start(this.runId, (r) => this.renderRun(r));
    this.renderRun(record);
    if (record.status === "done") {
      this.el<HTMLButtonElement>("#hist-load").disabled = false;
      this.selected = "overlay";
      this.renderWorkspace();
      this.note(`run ${this.runId} done`);
    } else {
      this.note(`run failed at ${record.error?.stage}: ${record.error?.message}`);
    }
  }

  private renderRun(record: RunRecord): void {
    this.record = record;
    const thumbs = this.el("#thumbs");
    thumbs.innerHTML = "";
    record.stage_artifacts.forEach((artifact, index) => {
      const cell = document.createElement("figure");
      cell.className = "thumb";
      const img = document.createElement("img");
      img.src = this.api.thumbnailUrl(artifact.url, 256);
      img.alt = artifact.stage;
      img.addEventListener("click", () => {
        this.selected = index;
        this.renderWorkspace();
      });
      const caption = document.createElement("figcaption");
      caption.textContent = artifact.stage;
      cell.appendChild(img);
      cell.appendChild(caption);
      thumbs.appendChild(cell);
    });
    if (record.status === "queued" || record.status === "running") {
      const pending = document.createElement("div");
      pending.className = "thumb pending";
      pending.textContent = "pending...";
      thumbs.appendChild(pending);
    }
  }

  private renderWorkspace(): void {
    const workspace = this.el("#workspace");
    if (!this.record || !this.runId) return;
    workspace.innerHTML = "";
    if (this.selected === "overlay") {
      if (!this.imageId) return;
      const base = document.createElement("img");
      base.id = "base-layer";
      base.src = this.api.imageUrl(this.imageId);
      const top = document.createElement("img");
      top.id = "overlay-layer";
      top.src = this.api.overlayUrl(this.runId);
      top.style.opacity = String(this.overlay.opacity);
      top.style.display = effectiveLayer(this.overlay) === "overlay" ? "" : "none";
      const stack = document.createElement("div");
      stack.className = "layer-stack";
      stack.appendChild(base);
      stack.appendChild(top);
      workspace.appendChild(stack);
    } else {
      const artifact = this.record.stage_artifacts[this.selected];
      if (!artifact) return;
      const img = document.createElement("img");
      img.src = this.api.artifactUrl(artifact.url);
      img.alt = artifact.stage;
      workspace.appendChild(img);
    }
  }

  private async refreshHistogram(): Promise<void> {
    if (!this.runId) return;
    const attr = this.el<HTMLSelectElement>("#hist-attr").value as "length" | "width";
    const bins = Number(this.el<HTMLInputElement>("#hist-bins").value) || 20;
    try {
      const view = await loadHistogram(this.api, this.runId, attr, bins);
      this.el("#hist-legend").textContent = `${view.total} edges`;
      const svg = this.root.querySelector("#hist-plot") as SVGSVGElement;
      svg.innerHTML = "";
      if (view.data) {
        for (const bar of histogramBars(view.data)) {
          const rect = document.createElementNS("http://www.w3.org/2000/svg", "rect");
          rect.setAttribute("x", String(bar.x0 * 100));
          rect.setAttribute("width", String((bar.x1 - bar.x0) * 100 * 0.9));
          rect.setAttribute("y", String(40 - bar.h * 38));
          rect.setAttribute("height", String(bar.h * 38));
          svg.appendChild(rect);
        }
      }
    } catch (err) {
      this.note(`histogram failed: ${(err as Error).message}`);
    }
  }
}
