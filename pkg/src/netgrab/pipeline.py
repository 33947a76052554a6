"""Declarative extraction pipelines: schema, validation, execution, batch.

A pipeline is zero or more preprocessing stages, exactly one
segmentation stage, exactly one thinning stage, then zero or more graph
filters. Graph detection is implicit and always runs after thinning.

File format (also the service wire format): a UTF-8 JSON object
``{"name": ..., "stages": [{"category", "algorithm", "params"}, ...]}``.
Unknown keys anywhere are rejected.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import graphfilter, preprocess, segment
from .errors import (
    NetgrabError,
    PipelineParseError,
    PipelineValidationError,
)
from .graphdetect import compute_weights, detect_vertices, trace_edges
from .graphio import graph_to_text, render_overlay, write_graph
from .raster import BinaryImage, RgbImage, distance_transform, load_png, save_png
from .thinning import guo_hall_thin

__all__ = [
    "StageDescriptor",
    "Pipeline",
    "StageArtifact",
    "RunResult",
    "BatchEntry",
    "BatchReport",
    "parse_pipeline",
    "pipeline_from_obj",
    "pipeline_to_obj",
    "run_pipeline",
    "run_batch",
    "write_run_outputs",
    "list_pipelines",
    "parameter_schema",
    "CATEGORIES",
]

CATEGORIES = ("preprocessing", "segmentation", "thinning", "graph_filter")


@dataclass(frozen=True)
class StageDescriptor:
    category: str
    algorithm: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Pipeline:
    name: str
    stages: tuple


@dataclass
class StageArtifact:
    """One intermediate result: stage name, artifact kind, wall time.

    ``payload`` holds the raster or graph when intermediates are
    captured, else None (the timing is recorded either way).
    """

    stage: str
    kind: str  # "image" | "graph"
    millis: float
    payload: object = None


@dataclass
class RunResult:
    artifacts: list
    graph: object = None  # ExtractedGraph on success
    overlay: object = None  # RgbImage on success
    status: str = "success"
    error_stage: str | None = None
    error_message: str | None = None


# ---------------------------------------------------------------------------
# Stage registry


@dataclass(frozen=True)
class _Param:
    name: str
    kind: str  # "int" | "float" | "str" | "bool"
    default: object
    choices: tuple | None = None

    def check(self, value) -> str | None:
        if self.kind == "int":
            if isinstance(value, bool) or not isinstance(value, int):
                return f"{self.name} must be an integer"
        elif self.kind == "float":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                return f"{self.name} must be a number"
        elif self.kind == "str":
            if not isinstance(value, str):
                return f"{self.name} must be a string"
        elif self.kind == "bool":
            if not isinstance(value, bool):
                return f"{self.name} must be a boolean"
        if self.choices is not None and value not in self.choices:
            return f"{self.name} must be one of {list(self.choices)}"
        return None


def _odd_at_least_3(name, value):
    if value < 3 or value % 2 == 0:
        return f"{name} must be odd and >= 3"
    return None


@dataclass(frozen=True)
class _Stage:
    algorithm: str
    category: str
    params: tuple = ()
    fn: object = None
    extra_check: object = None  # fn(params) -> error message | None
    reserved: bool = False


def _threshold_check(params):
    mode, threshold = params["mode"], params["threshold"]
    if mode == "absolute" and (threshold < 0 or threshold != int(threshold)):
        return "threshold must be a non-negative integer in absolute mode"
    if mode == "relative" and not 0.0 <= threshold <= 1.0:
        return "threshold must be in [0, 1] in relative mode"
    return None


_REGISTRY = {
    s.algorithm: s
    for s in [
        _Stage(
            "gaussian_blur",
            "preprocessing",
            (_Param("kernel_size", "int", 5),),
            fn=preprocess.gaussian_blur,
            extra_check=lambda p: _odd_at_least_3("kernel_size", p["kernel_size"]),
        ),
        _Stage(
            "median_blur",
            "preprocessing",
            (_Param("kernel_size", "int", 3),),
            fn=preprocess.median_blur,
            extra_check=lambda p: _odd_at_least_3("kernel_size", p["kernel_size"]),
        ),
        _Stage("invert", "preprocessing", (), fn=preprocess.invert),
        _Stage(
            "constant_threshold",
            "segmentation",
            (
                _Param("t", "int", 128),
                _Param("foreground", "str", "above", ("above", "below")),
            ),
            fn=segment.constant_threshold,
            extra_check=lambda p: None
            if 0 <= p["t"] <= 255
            else "t must be in 0..255",
        ),
        _Stage(
            "otsu_threshold",
            "segmentation",
            (_Param("foreground", "str", "above", ("above", "below")),),
            fn=segment.otsu_threshold,
        ),
        _Stage(
            "adaptive_mean_threshold",
            "segmentation",
            (
                _Param("block_size", "int", 11),
                _Param("c", "float", 0.0),
                _Param("foreground", "str", "above", ("above", "below")),
            ),
            fn=segment.adaptive_mean_threshold,
            extra_check=lambda p: _odd_at_least_3("block_size", p["block_size"]),
        ),
        _Stage(
            "guided_watershed",
            "segmentation",
            (
                _Param("fg_erosions", "int", 2),
                _Param("bg_dilations", "int", 2),
                _Param("foreground", "str", "dark", ("dark", "light")),
            ),
            fn=segment.guided_watershed,
            extra_check=lambda p: None
            if p["fg_erosions"] >= 1 and p["bg_dilations"] >= 1
            else "fg_erosions and bg_dilations must be >= 1",
        ),
        # Identifier reserved for a future cut-based segmenter.
        _Stage("grabcut", "segmentation", (), reserved=True),
        _Stage("guo_hall", "thinning", (), fn=guo_hall_thin),
        _Stage(
            "filter_small_components",
            "graph_filter",
            (
                _Param("mode", "str", "relative", ("absolute", "relative")),
                _Param("threshold", "float", 0.05),
            ),
            fn=graphfilter.filter_small_components,
            extra_check=_threshold_check,
        ),
        _Stage(
            "keep_largest_component",
            "graph_filter",
            (),
            fn=graphfilter.keep_largest_component,
        ),
        _Stage("prune_dead_ends", "graph_filter", (), fn=graphfilter.prune_dead_ends),
        _Stage(
            "merge_close_junctions",
            "graph_filter",
            (_Param("radius", "float", 4.0),),
            fn=graphfilter.merge_close_junctions,
            extra_check=lambda p: None if p["radius"] > 0 else "radius must be > 0",
        ),
        _Stage(
            "smooth_filtered_ends",
            "graph_filter",
            (),
            fn=graphfilter.smooth_filtered_ends,
        ),
    ]
}


def parameter_schema() -> dict:
    """Registry view for UIs: algorithm -> category + parameter specs."""
    out = {}
    for stage in _REGISTRY.values():
        if stage.reserved:
            continue
        out[stage.algorithm] = {
            "category": stage.category,
            "params": [
                {
                    "name": p.name,
                    "kind": p.kind,
                    "default": p.default,
                    **({"choices": list(p.choices)} if p.choices else {}),
                }
                for p in stage.params
            ],
        }
    return out


# ---------------------------------------------------------------------------
# Parsing and validation


def _validate_stage(index: int, obj) -> StageDescriptor:
    if not isinstance(obj, dict):
        raise PipelineParseError(f"stage {index} must be an object")
    unknown = set(obj) - {"category", "algorithm", "params"}
    if unknown:
        raise PipelineParseError(
            f"stage {index} has unknown key(s): {sorted(unknown)}"
        )
    for key in ("category", "algorithm"):
        if key not in obj or not isinstance(obj[key], str):
            raise PipelineParseError(f"stage {index} needs a string {key!r}")
    params = obj.get("params", {})
    if not isinstance(params, dict):
        raise PipelineParseError(f"stage {index}: params must be an object")

    algorithm, category = obj["algorithm"], obj["category"]
    spec = _REGISTRY.get(algorithm)
    if spec is None or spec.reserved:
        raise PipelineValidationError(
            f"stage {index}: unknown algorithm {algorithm!r}", stage_index=index
        )
    if category != spec.category:
        raise PipelineValidationError(
            f"stage {index}: {algorithm!r} belongs to category "
            f"{spec.category!r}, not {category!r}",
            stage_index=index,
        )
    known = {p.name: p for p in spec.params}
    bad = set(params) - set(known)
    if bad:
        raise PipelineValidationError(
            f"stage {index}: unknown parameter(s) {sorted(bad)} for {algorithm!r}",
            stage_index=index,
        )
    full = {p.name: p.default for p in spec.params}
    full.update(params)
    for p in spec.params:
        message = p.check(full[p.name])
        if message:
            raise PipelineValidationError(
                f"stage {index}: {message}", stage_index=index
            )
    if spec.extra_check is not None:
        message = spec.extra_check(full)
        if message:
            raise PipelineValidationError(
                f"stage {index}: {message}", stage_index=index
            )
    return StageDescriptor(category, algorithm, full)


def pipeline_from_obj(obj) -> Pipeline:
    """Validate a parsed JSON object into a Pipeline."""
    if not isinstance(obj, dict):
        raise PipelineParseError("pipeline must be a JSON object")
    unknown = set(obj) - {"name", "stages"}
    if unknown:
        raise PipelineParseError(f"unknown top-level key(s): {sorted(unknown)}")
    name = obj.get("name")
    if not isinstance(name, str) or not name:
        raise PipelineParseError("pipeline needs a non-empty string 'name'")
    raw_stages = obj.get("stages")
    if not isinstance(raw_stages, list):
        raise PipelineParseError("pipeline needs a 'stages' array")

    stages = [_validate_stage(i, s) for i, s in enumerate(raw_stages)]

    # Order invariant: pre* seg thin filter*
    state = "pre"
    for i, stage in enumerate(stages):
        cat = stage.category
        if cat == "preprocessing" and state != "pre":
            raise PipelineValidationError(
                f"stage {i}: preprocessing must come before segmentation",
                stage_index=i,
            )
        elif cat == "segmentation":
            if state != "pre":
                raise PipelineValidationError(
                    f"stage {i}: duplicate segmentation stage", stage_index=i
                )
            state = "seg"
        elif cat == "thinning":
            if state == "pre":
                raise PipelineValidationError(
                    f"stage {i}: thinning requires a segmentation stage before it",
                    stage_index=i,
                )
            if state != "seg":
                raise PipelineValidationError(
                    f"stage {i}: duplicate thinning stage", stage_index=i
                )
            state = "thin"
        elif cat == "graph_filter" and state != "thin":
            raise PipelineValidationError(
                f"stage {i}: graph filters must come after thinning", stage_index=i
            )
    if state == "pre":
        raise PipelineValidationError("pipeline is missing a segmentation stage")
    if state == "seg":
        raise PipelineValidationError("pipeline is missing a thinning stage")
    return Pipeline(name, tuple(stages))


def parse_pipeline(text: str) -> Pipeline:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PipelineParseError(f"not valid JSON: {exc}") from exc
    return pipeline_from_obj(obj)


def pipeline_to_obj(pipeline: Pipeline) -> dict:
    return {
        "name": pipeline.name,
        "stages": [
            {"category": s.category, "algorithm": s.algorithm, "params": dict(s.params)}
            for s in pipeline.stages
        ],
    }


def list_pipelines() -> list:
    """Bundled pipelines plus any from NETGRAB_PIPELINE_DIR, sorted by name.

    A user pipeline with a bundled pipeline's name overrides it.
    """
    from importlib import resources

    found = {}
    bundle = resources.files("netgrab").joinpath("pipelines")
    for entry in sorted(p.name for p in bundle.iterdir() if p.name.endswith(".json")):
        pipe = parse_pipeline(bundle.joinpath(entry).read_text(encoding="utf-8"))
        found[pipe.name] = pipe
    extra = os.environ.get("NETGRAB_PIPELINE_DIR")
    if extra:
        for directory in extra.split(os.pathsep):
            directory = Path(directory)
            if not directory.is_dir():
                continue
            for path in sorted(directory.glob("*.json")):
                pipe = parse_pipeline(path.read_text(encoding="utf-8"))
                found[pipe.name] = pipe
    return [found[name] for name in sorted(found)]


# ---------------------------------------------------------------------------
# Execution


def run_pipeline(
    pipeline: Pipeline,
    image: RgbImage,
    capture_intermediates: bool = True,
    on_artifact=None,
) -> RunResult:
    """Execute all stages plus the implicit detection and overlay steps.

    Returns artifacts in stage order followed by "graph_detection" and
    "overlay", so a successful run yields len(stages) + 2 artifacts.
    On a stage failure the result carries error status and exactly the
    artifacts completed before the failure.
    """
    artifacts = []

    def record(name, kind, millis, payload):
        artifact = StageArtifact(
            name, kind, millis, payload if capture_intermediates else None
        )
        artifacts.append(artifact)
        if on_artifact is not None:
            on_artifact(artifact)

    current = preprocess.to_grayscale(image)
    seg_mask = None
    skeleton = None
    graph = None
    stage_name = "input"
    try:
        for stage in pipeline.stages:
            stage_name = stage.algorithm
            spec = _REGISTRY[stage.algorithm]
            started = time.perf_counter()
            if stage.category == "preprocessing":
                current = spec.fn(current, **stage.params)
                payload, kind = current, "image"
            elif stage.category == "segmentation":
                result = spec.fn(current, **stage.params)
                seg_mask = result.mask
                payload, kind = seg_mask, "image"
            elif stage.category == "thinning":
                skeleton = spec.fn(seg_mask)
                payload, kind = skeleton.mask, "image"
            else:  # graph_filter
                graph = spec.fn(graph, **stage.params)
                payload, kind = graph, "graph"
            record(stage.algorithm, kind, (time.perf_counter() - started) * 1000, payload)

            if stage.category == "thinning":
                stage_name = "graph_detection"
                started = time.perf_counter()
                distance = distance_transform(seg_mask)
                vertices = detect_vertices(skeleton)
                graph = compute_weights(trace_edges(skeleton, vertices), distance)
                record(
                    "graph_detection",
                    "graph",
                    (time.perf_counter() - started) * 1000,
                    graph,
                )

        stage_name = "overlay"
        started = time.perf_counter()
        overlay = render_overlay(image, graph)
        record("overlay", "image", (time.perf_counter() - started) * 1000, overlay)
    except NetgrabError as exc:
        return RunResult(
            artifacts,
            status="error",
            error_stage=stage_name,
            error_message=str(exc),
        )
    return RunResult(artifacts, graph=graph, overlay=overlay)


def write_run_outputs(
    result: RunResult,
    out_dir,
    base_image: RgbImage,
    intermediates: bool = False,
    overlay: bool = True,
) -> None:
    """Materialize a RunResult: graph.txt, overlay.png, timings.txt, and
    numbered intermediate PNGs (graph artifacts render as overlays)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "timings.txt", "w", encoding="utf-8", newline="\n") as fh:
        for artifact in result.artifacts:
            fh.write(f"{artifact.stage} {artifact.millis:.1f}\n")
    if result.status == "success":
        write_graph(result.graph, out_dir / "graph.txt")
        if overlay:
            save_png(result.overlay, out_dir / "overlay.png")
    if intermediates:
        for i, artifact in enumerate(result.artifacts):
            if artifact.payload is None or artifact.stage == "overlay":
                continue
            png = artifact.payload
            if artifact.kind == "graph":
                png = render_overlay(base_image, artifact.payload)
            save_png(png, out_dir / f"{i:02d}_{artifact.stage}.png")


@dataclass(frozen=True)
class BatchEntry:
    name: str
    ok: bool
    millis: float
    error_stage: str | None = None
    error_message: str | None = None


@dataclass(frozen=True)
class BatchReport:
    entries: tuple
    total_millis: float


def run_batch(
    pipeline: Pipeline,
    input_dir,
    output_dir,
    parallelism: int = 1,
    capture_intermediates: bool = False,
) -> BatchReport:
    """Process every *.png in input_dir independently.

    Each image gets its own output subdirectory; one failing image never
    aborts the batch. Entries are ordered by input filename regardless
    of parallelism.
    """
    input_dir, output_dir = Path(input_dir), Path(output_dir)
    if not input_dir.is_dir():
        raise FileNotFoundError(f"input directory not found: {input_dir}")
    output_dir.mkdir(parents=True, exist_ok=True)
    paths = sorted(input_dir.glob("*.png"))

    def process(path: Path) -> BatchEntry:
        started = time.perf_counter()
        try:
            image = load_png(path)
            result = run_pipeline(
                pipeline, image, capture_intermediates=capture_intermediates
            )
            write_run_outputs(
                result,
                output_dir / path.stem,
                image,
                intermediates=capture_intermediates,
            )
        except (NetgrabError, OSError) as exc:
            return BatchEntry(
                path.name,
                False,
                (time.perf_counter() - started) * 1000,
                error_stage="load",
                error_message=str(exc),
            )
        millis = (time.perf_counter() - started) * 1000
        if result.status != "success":
            return BatchEntry(
                path.name, False, millis, result.error_stage, result.error_message
            )
        return BatchEntry(path.name, True, millis)

    started = time.perf_counter()
    if parallelism <= 1:
        entries = [process(p) for p in paths]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            entries = list(pool.map(process, paths))
    return BatchReport(tuple(entries), (time.perf_counter() - started) * 1000)
