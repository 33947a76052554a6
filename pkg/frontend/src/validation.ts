// Client-side mirror of the server's pipeline validation so the editor
// never submits a pipeline the service would reject for order or schema
// reasons. Keep the rules in lockstep with the backend registry.

import type { Category, ParamSpec, SchemaMap, StageObj } from "./types";

export interface Rejection {
  stageIndex: number | null;
  message: string;
}

/** Order invariant: preprocessing* segmentation thinning graph_filter*. */
export function validateOrder(categories: Category[]): Rejection | null {
  let state: "pre" | "seg" | "thin" = "pre";
  for (let i = 0; i < categories.length; i++) {
    const cat = categories[i];
    if (cat === "preprocessing" && state !== "pre") {
      return { stageIndex: i, message: "preprocessing must come before segmentation" };
    } else if (cat === "segmentation") {
      if (state !== "pre") return { stageIndex: i, message: "duplicate segmentation stage" };
      state = "seg";
    } else if (cat === "thinning") {
      if (state === "pre") {
        return { stageIndex: i, message: "thinning requires a segmentation stage before it" };
      }
      if (state !== "seg") return { stageIndex: i, message: "duplicate thinning stage" };
      state = "thin";
    } else if (cat === "graph_filter" && state !== "thin") {
      return { stageIndex: i, message: "graph filters must come after thinning" };
    }
  }
  if (state === "pre") return { stageIndex: null, message: "missing segmentation stage" };
  if (state === "seg") return { stageIndex: null, message: "missing thinning stage" };
  return null;
}

function checkKind(spec: ParamSpec, value: unknown): string | null {
  switch (spec.kind) {
    case "int":
      if (typeof value !== "number" || !Number.isInteger(value)) {
        return `${spec.name} must be an integer`;
      }
      break;
    case "float":
      if (typeof value !== "number" || !Number.isFinite(value)) {
        return `${spec.name} must be a number`;
      }
      break;
    case "str":
      if (typeof value !== "string") return `${spec.name} must be a string`;
      break;
    case "bool":
      if (typeof value !== "boolean") return `${spec.name} must be a boolean`;
      break;
  }
  if (spec.choices && !spec.choices.includes(String(value))) {
    return `${spec.name} must be one of ${spec.choices.join(", ")}`;
  }
  return null;
}

// Parameter rules the backend enforces beyond plain types.
const EXTRA_RULES: Record<string, (params: Record<string, unknown>) => string | null> = {
  gaussian_blur: (p) => oddAtLeast3("kernel_size", p.kernel_size),
  median_blur: (p) => oddAtLeast3("kernel_size", p.kernel_size),
  adaptive_mean_threshold: (p) => oddAtLeast3("block_size", p.block_size),
  constant_threshold: (p) =>
    typeof p.t === "number" && p.t >= 0 && p.t <= 255 ? null : "t must be in 0..255",
  guided_watershed: (p) =>
    typeof p.fg_erosions === "number" &&
    typeof p.bg_dilations === "number" &&
    p.fg_erosions >= 1 &&
    p.bg_dilations >= 1
      ? null
      : "fg_erosions and bg_dilations must be >= 1",
  merge_close_junctions: (p) =>
    typeof p.radius === "number" && p.radius > 0 ? null : "radius must be > 0",
  filter_small_components: (p) => {
    if (typeof p.threshold !== "number") return "threshold must be a number";
    if (p.mode === "absolute" && (p.threshold < 0 || !Number.isInteger(p.threshold))) {
      return "threshold must be a non-negative integer in absolute mode";
    }
    if (p.mode === "relative" && (p.threshold < 0 || p.threshold > 1)) {
      return "threshold must be in [0, 1] in relative mode";
    }
    return null;
  },
};

function oddAtLeast3(name: string, value: unknown): string | null {
  if (typeof value !== "number" || value < 3 || value % 2 === 0) {
    return `${name} must be odd and >= 3`;
  }
  return null;
}

/** Validate one stage's parameters against the fetched schema. */
export function validateStageParams(stage: StageObj, schema: SchemaMap): string | null {
  const spec = schema[stage.algorithm];
  if (!spec) return `unknown algorithm ${stage.algorithm}`;
  if (spec.category !== stage.category) {
    return `${stage.algorithm} belongs to category ${spec.category}`;
  }
  const known = new Map(spec.params.map((p) => [p.name, p]));
  for (const key of Object.keys(stage.params)) {
    if (!known.has(key)) return `unknown parameter ${key}`;
  }
  const full: Record<string, unknown> = {};
  for (const p of spec.params) {
    full[p.name] = p.name in stage.params ? stage.params[p.name] : p.default;
    const message = checkKind(p, full[p.name]);
    if (message) return message;
  }
  const extra = EXTRA_RULES[stage.algorithm];
  return extra ? extra(full) : null;
}

/** Full pipeline check: order plus every stage's parameters. */
export function validatePipeline(
  stages: StageObj[],
  schema: SchemaMap,
): Rejection | null {
  for (let i = 0; i < stages.length; i++) {
    const message = validateStageParams(stages[i], schema);
    if (message) return { stageIndex: i, message };
  }
  return validateOrder(stages.map((s) => s.category));
}

/** Would inserting a stage of this category at `index` keep the order legal? */
export function canInsertAt(
  categories: Category[],
  category: Category,
  index: number,
): boolean {
  const next = categories.slice();
  next.splice(index, 0, category);
  const rejection = validateOrder(next);
  // partial drafts are fine; only positional violations block an insert
  return rejection === null || rejection.stageIndex === null;
}

/** Would moving stage `from` to position `to` keep the order legal? */
export function canMove(categories: Category[], from: number, to: number): boolean {
  const next = categories.slice();
  const [moved] = next.splice(from, 1);
  next.splice(to, 0, moved);
  const rejection = validateOrder(next);
  return rejection === null || rejection.stageIndex === null;
}
