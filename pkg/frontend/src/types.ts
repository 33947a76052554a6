// Wire types mirroring the backend's JSON schemas.

export type Category = "preprocessing" | "segmentation" | "thinning" | "graph_filter";

export interface StageObj {
  category: Category;
  algorithm: string;
  params: Record<string, number | string | boolean>;
}

export interface PipelineObj {
  name: string;
  stages: StageObj[];
}

export interface ParamSpec {
  name: string;
  kind: "int" | "float" | "str" | "bool";
  default: number | string | boolean;
  choices?: string[];
}

export interface AlgorithmSpec {
  category: Category;
  params: ParamSpec[];
}

export type SchemaMap = Record<string, AlgorithmSpec>;

export interface StageArtifactRef {
  stage: string;
  kind: "image" | "graph";
  url: string;
}

export type RunStatus = "queued" | "running" | "done" | "error";

export interface RunRecord {
  run_id: string;
  image_id: string;
  pipeline: PipelineObj;
  status: RunStatus;
  stage_artifacts: StageArtifactRef[];
  created_at: string;
  error: { stage: string | null; message: string } | null;
}

export interface HistogramData {
  edges: number[];
  counts: number[];
}

export const CATEGORY_LABELS: Record<Category, string> = {
  preprocessing: "Preprocessing",
  segmentation: "Segmentation",
  thinning: "Thinning",
  graph_filter: "Graph filters",
};

export const CATEGORIES: Category[] = [
  "preprocessing",
  "segmentation",
  "thinning",
  "graph_filter",
];
