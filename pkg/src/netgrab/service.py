"""HTTP API for the web UI: image upload, run submission, artifact access.

Single-process, in-memory store; runs execute on a bounded worker pool
(FIFO). Artifacts are immutable once a run reaches done/error, and every
completed stage's artifact is available while later stages still run.
"""

from __future__ import annotations

import io
import os
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from contextlib import asynccontextmanager
from dataclasses import dataclass, field

from fastapi import FastAPI, Query, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from PIL import Image

from . import __version__
from .errors import (
    EmptyGraphError,
    InvalidParameterError,
    NetgrabError,
    PipelineParseError,
    PipelineValidationError,
)
from .graphio import edge_histogram, graph_to_text, render_overlay
from .pipeline import (
    Pipeline,
    list_pipelines,
    parameter_schema,
    pipeline_from_obj,
    pipeline_to_obj,
    run_pipeline,
)
from .raster import BinaryImage, GrayImage, RgbImage, load_png

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def _encode_png(raster) -> bytes:
    if isinstance(raster, RgbImage):
        pil = Image.fromarray(raster.pixels, mode="RGB")
    elif isinstance(raster, GrayImage):
        pil = Image.fromarray(raster.pixels, mode="L")
    elif isinstance(raster, BinaryImage):
        pil = Image.fromarray(raster.pixels.astype("uint8") * 255, mode="L")
    else:
        raise TypeError(f"cannot encode {type(raster).__name__}")
    buf = io.BytesIO()
    pil.save(buf, format="PNG")
    return buf.getvalue()


@dataclass
class _Run:
    run_id: str
    image_id: str
    pipeline: Pipeline
    status: str = "queued"  # queued | running | done | error
    created_at: float = field(default_factory=time.time)
    artifacts: list = field(default_factory=list)  # {stage, kind, url}
    artifact_pngs: list = field(default_factory=list)
    graph: object = None
    graph_text: str | None = None
    overlay_png: bytes | None = None
    error_stage: str | None = None
    error_message: str | None = None

    def to_json(self) -> dict:
        record = {
            "run_id": self.run_id,
            "image_id": self.image_id,
            "pipeline": pipeline_to_obj(self.pipeline),
            "status": self.status,
            "stage_artifacts": list(self.artifacts),
            "created_at": time.strftime(
                "%Y-%m-%dT%H:%M:%SZ", time.gmtime(self.created_at)
            ),
        }
        if self.status == "error":
            record["error"] = {"stage": self.error_stage, "message": self.error_message}
        else:
            record["error"] = None
        return record


def create_app(worker_count: int | None = None, static_dir: str | None = None) -> FastAPI:
    executor = ThreadPoolExecutor(max_workers=worker_count or os.cpu_count() or 2)

    @asynccontextmanager
    async def lifespan(app):
        yield
        executor.shutdown(wait=True)

    app = FastAPI(title="netgrab", lifespan=lifespan)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    lock = threading.Lock()
    images: dict[str, bytes] = {}
    runs: dict[str, _Run] = {}
    session_pipelines: dict[str, Pipeline] = {}

    def execute(run: _Run, image: RgbImage):
        with lock:
            run.status = "running"

        def on_artifact(artifact):
            if artifact.kind == "graph":
                png = _encode_png(render_overlay(image, artifact.payload))
            else:
                png = _encode_png(artifact.payload)
            with lock:
                index = len(run.artifacts)
                run.artifacts.append(
                    {
                        "stage": artifact.stage,
                        "kind": artifact.kind,
                        "url": f"/api/runs/{run.run_id}/stages/{index}/image",
                    }
                )
                run.artifact_pngs.append(png)

        result = run_pipeline(run.pipeline, image, on_artifact=on_artifact)
        with lock:
            if result.status == "success":
                run.graph = result.graph
                run.graph_text = graph_to_text(result.graph)
                run.overlay_png = _encode_png(result.overlay)
                run.status = "done"
            else:
                run.status = "error"
                run.error_stage = result.error_stage
                run.error_message = result.error_message

    @app.get("/api/health")
    def health():
        return {"version": __version__}

    @app.post("/api/images")
    async def upload_image(request: Request):
        body = await request.body()
        if not body.startswith(PNG_MAGIC):
            return JSONResponse({"message": "body is not a PNG"}, status_code=415)
        try:
            load_png(io.BytesIO(body))
        except NetgrabError as exc:
            return JSONResponse({"message": str(exc)}, status_code=415)
        image_id = uuid.uuid4().hex[:12]
        with lock:
            images[image_id] = body
        return {"image_id": image_id}

    @app.get("/api/images/{image_id}")
    def get_image(image_id: str):
        with lock:
            body = images.get(image_id)
        if body is None:
            return JSONResponse({"message": "unknown image"}, status_code=404)
        return Response(body, media_type="image/png")

    @app.get("/api/pipelines")
    def get_pipelines():
        with lock:
            session = dict(session_pipelines)
        named = {p.name: p for p in list_pipelines()}
        named.update(session)
        return [pipeline_to_obj(named[name]) for name in sorted(named)]

    @app.get("/api/schema")
    def get_schema():
        return parameter_schema()

    @app.post("/api/runs")
    async def submit_run(request: Request):
        payload = await request.json()
        if not isinstance(payload, dict) or set(payload) - {"image_id", "pipeline"}:
            return JSONResponse(
                {"stage_index": None, "message": "body must be {image_id, pipeline}"},
                status_code=422,
            )
        image_id = payload.get("image_id")
        with lock:
            body = images.get(image_id)
        if body is None:
            return JSONResponse({"message": "unknown image"}, status_code=404)
        try:
            pipeline = pipeline_from_obj(payload.get("pipeline"))
        except PipelineValidationError as exc:
            return JSONResponse(
                {"stage_index": exc.stage_index, "message": str(exc)}, status_code=422
            )
        except PipelineParseError as exc:
            return JSONResponse(
                {"stage_index": None, "message": str(exc)}, status_code=422
            )
        image = load_png(io.BytesIO(body))
        run = _Run(uuid.uuid4().hex[:12], image_id, pipeline)
        with lock:
            runs[run.run_id] = run
            session_pipelines[pipeline.name] = pipeline
        executor.submit(execute, run, image)
        return {"run_id": run.run_id}

    def _get_run(run_id: str) -> _Run | None:
        with lock:
            return runs.get(run_id)

    @app.get("/api/runs/{run_id}")
    def get_run(run_id: str):
        run = _get_run(run_id)
        if run is None:
            return JSONResponse({"message": "unknown run"}, status_code=404)
        with lock:
            return run.to_json()

    @app.get("/api/runs/{run_id}/stages/{index}/image")
    def get_stage_image(
        run_id: str, index: int, max_side: int | None = Query(None, alias="max")
    ):
        run = _get_run(run_id)
        if run is None:
            return JSONResponse({"message": "unknown run"}, status_code=404)
        with lock:
            status = run.status
            png = run.artifact_pngs[index] if index < len(run.artifact_pngs) else None
        if png is None:
            if status in ("queued", "running"):
                return JSONResponse({"message": "stage not complete"}, status_code=409)
            return JSONResponse({"message": "no such artifact"}, status_code=404)
        if max_side is not None and max_side >= 1:
            pil = Image.open(io.BytesIO(png))
            if max(pil.size) > max_side:
                pil.thumbnail((max_side, max_side))
                buf = io.BytesIO()
                pil.save(buf, format="PNG")
                png = buf.getvalue()
        return Response(png, media_type="image/png")

    def _finished_or_status(run_id: str):
        run = _get_run(run_id)
        if run is None:
            return None, JSONResponse({"message": "unknown run"}, status_code=404)
        with lock:
            status = run.status
        if status in ("queued", "running"):
            return None, JSONResponse({"message": "run not complete"}, status_code=409)
        if status == "error":
            return None, JSONResponse({"message": "run failed"}, status_code=404)
        return run, None

    @app.get("/api/runs/{run_id}/graph")
    def get_graph(run_id: str):
        run, err = _finished_or_status(run_id)
        if err is not None:
            return err
        return PlainTextResponse(run.graph_text)

    @app.get("/api/runs/{run_id}/overlay")
    def get_overlay(run_id: str):
        run, err = _finished_or_status(run_id)
        if err is not None:
            return err
        return Response(run.overlay_png, media_type="image/png")

    @app.get("/api/runs/{run_id}/histogram")
    def get_histogram(run_id: str, attr: str = "length", bins: int = 20):
        run, err = _finished_or_status(run_id)
        if err is not None:
            return err
        try:
            hist = edge_histogram(run.graph, attr, bins)
        except (InvalidParameterError, EmptyGraphError) as exc:
            return JSONResponse({"message": str(exc)}, status_code=422)
        return {"edges": list(hist.bin_edges), "counts": list(hist.counts)}

    if static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
