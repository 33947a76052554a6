// Pipeline editor state: an ordered stage list with add/remove/move that
// refuses edits breaking the order invariant, per-stage parameter state
// with inline validation, and lossless (de)serialization to the pipeline
// file schema.

import type { PipelineObj, SchemaMap, StageObj } from "./types";
import {
  canInsertAt,
  canMove,
  validateOrder,
  validatePipeline,
  validateStageParams,
} from "./validation";

export interface StageDraft {
  stage: StageObj;
  dirty: boolean;
  error: string | null; // inline message (client validation or server 422)
}

export type EditorListener = () => void;

export class PipelineDraft {
  name = "custom";
  stages: StageDraft[] = [];
  private listeners: EditorListener[] = [];

  constructor(private schema: SchemaMap) {}

  onChange(listener: EditorListener): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  private defaults(algorithm: string): StageObj {
    const spec = this.schema[algorithm];
    const params: StageObj["params"] = {};
    for (const p of spec.params) params[p.name] = p.default;
    return { category: spec.category, algorithm, params };
  }

  /** Append or insert a palette stage; returns an error text on refusal. */
  addStage(algorithm: string, at?: number): string | null {
    const spec = this.schema[algorithm];
    if (!spec) return `unknown algorithm ${algorithm}`;
    const index = at ?? this.stages.length;
    const categories = this.stages.map((d) => d.stage.category);
    if (!canInsertAt(categories, spec.category, index)) {
      return `${spec.category} is not allowed at position ${index}`;
    }
    this.stages.splice(index, 0, {
      stage: this.defaults(algorithm),
      dirty: false,
      error: null,
    });
    this.notify();
    return null;
  }

  /** Remove a stage; refuses removals that break positional legality
   * (e.g. deleting segmentation while thinning is still present). */
  removeStage(index: number): string | null {
    const categories = this.stages.map((d) => d.stage.category);
    categories.splice(index, 1);
    const rejection = validateOrder(categories);
    if (rejection !== null && rejection.stageIndex !== null) {
      return `removing this ${this.stages[index].stage.category} stage would leave ${categories[rejection.stageIndex]} out of order`;
    }
    this.stages.splice(index, 1);
    this.notify();
    return null;
  }

  /** Reorder; returns an error text (and leaves the draft unchanged) on refusal. */
  moveStage(from: number, to: number): string | null {
    if (to < 0 || to >= this.stages.length || from === to) return null;
    const categories = this.stages.map((d) => d.stage.category);
    if (!canMove(categories, from, to)) {
      return `${categories[from]} cannot move to position ${to}`;
    }
    const [draft] = this.stages.splice(from, 1);
    this.stages.splice(to, 0, draft);
    this.notify();
    return null;
  }

  setParam(index: number, name: string, value: number | string | boolean): void {
    const draft = this.stages[index];
    draft.stage.params[name] = value;
    draft.dirty = true;
    draft.error = validateStageParams(draft.stage, this.schema);
    this.notify();
  }

  setServerError(stageIndex: number | null, message: string): void {
    if (stageIndex !== null && this.stages[stageIndex]) {
      this.stages[stageIndex].error = message;
    }
    this.notify();
  }

  clearErrors(): void {
    for (const draft of this.stages) draft.error = null;
    this.notify();
  }

  /** null when the draft would pass the server validator. */
  problem(): { stageIndex: number | null; message: string } | null {
    return validatePipeline(
      this.stages.map((d) => d.stage),
      this.schema,
    );
  }

  /** Missing-stage hint for the run button; position errors never occur. */
  orderHint(): string | null {
    const rejection = validateOrder(this.stages.map((d) => d.stage.category));
    return rejection ? rejection.message : null;
  }

  toObject(): PipelineObj {
    return {
      name: this.name,
      stages: this.stages.map((d) => ({
        category: d.stage.category,
        algorithm: d.stage.algorithm,
        params: { ...d.stage.params },
      })),
    };
  }

  loadFrom(pipeline: PipelineObj): void {
    this.name = pipeline.name;
    this.stages = pipeline.stages.map((stage) => ({
      stage: {
        category: stage.category,
        algorithm: stage.algorithm,
        params: { ...stage.params },
      },
      dirty: false,
      error: null,
    }));
    this.notify();
  }
}

// Named pipeline persistence; storage is injected so tests can fake it.
export interface NamedStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

const STORE_KEY = "netgrab.pipelines";

export function savedPipelines(store: NamedStore): PipelineObj[] {
  const raw = store.getItem(STORE_KEY);
  if (!raw) return [];
  try {
    return JSON.parse(raw) as PipelineObj[];
  } catch {
    return [];
  }
}

export function savePipeline(store: NamedStore, pipeline: PipelineObj): void {
  const all = savedPipelines(store).filter((p) => p.name !== pipeline.name);
  all.push(pipeline);
  all.sort((a, b) => a.name.localeCompare(b.name));
  store.setItem(STORE_KEY, JSON.stringify(all));
}
