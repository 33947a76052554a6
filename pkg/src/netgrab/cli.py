"""Command-line front door: run, batch, pipelines, serve.

Exit codes: 0 success, 1 processing failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import socket
import sys
from pathlib import Path

from . import __version__
from .errors import NetgrabError
from .pipeline import (
    list_pipelines,
    parse_pipeline,
    run_batch,
    run_pipeline,
    write_run_outputs,
)
from .raster import load_png

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netgrab",
        description="Extract weighted graphs from images of network-like structures.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a pipeline on a single PNG")
    run.add_argument("--pipeline", required=True, help="pipeline JSON file")
    run.add_argument("--input", required=True, help="input PNG")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument(
        "--intermediates", action="store_true", help="write per-stage PNGs"
    )
    run.add_argument("--no-overlay", action="store_true", help="skip overlay.png")

    batch = sub.add_parser("batch", help="run a pipeline over a directory of PNGs")
    batch.add_argument("--pipeline", required=True)
    batch.add_argument("--input-dir", required=True)
    batch.add_argument("--out-dir", required=True)
    batch.add_argument("--jobs", type=int, default=1, help="parallel workers")

    pipelines = sub.add_parser("pipelines", help="list available pipelines")
    pipelines.add_argument("--json", action="store_true", help="emit a JSON array")

    serve = sub.add_parser("serve", help="serve the HTTP API and web UI")
    serve.add_argument("--port", type=int, default=8315)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--static-dir", default=None, help="built UI assets to serve")
    serve.add_argument(
        "--workers", type=int, default=None, help="run worker pool size"
    )
    return parser


def _load_pipeline_file(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read pipeline file: {exc}", file=sys.stderr)
        return None
    try:
        return parse_pipeline(text)
    except NetgrabError as exc:
        print(f"error: invalid pipeline: {exc}", file=sys.stderr)
        return None


def cmd_run(args) -> int:
    pipeline = _load_pipeline_file(args.pipeline)
    if pipeline is None:
        return EXIT_FAILURE
    try:
        image = load_png(args.input)
    except (NetgrabError, OSError) as exc:
        print(f"error: cannot load image: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    result = run_pipeline(pipeline, image, capture_intermediates=args.intermediates)
    write_run_outputs(
        result,
        args.out,
        image,
        intermediates=args.intermediates,
        overlay=not args.no_overlay,
    )
    if result.status != "success":
        print(
            f"error: stage {result.error_stage}: {result.error_message}",
            file=sys.stderr,
        )
        return EXIT_FAILURE
    return EXIT_OK


def cmd_batch(args) -> int:
    pipeline = _load_pipeline_file(args.pipeline)
    if pipeline is None:
        return EXIT_FAILURE
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        report = run_batch(pipeline, args.input_dir, args.out_dir, parallelism=args.jobs)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    for entry in report.entries:
        if entry.ok:
            print(f"OK {entry.name} {entry.millis:.0f}")
        else:
            print(f"ERR {entry.name} {entry.error_stage}: {entry.error_message}")
    return EXIT_OK if all(e.ok for e in report.entries) else EXIT_FAILURE


def cmd_pipelines(args) -> int:
    pipelines = list_pipelines()
    if args.json:
        payload = [
            {"name": p.name, "stages": [s.algorithm for s in p.stages]}
            for p in pipelines
        ]
        print(json.dumps(payload, indent=2))
    else:
        for p in pipelines:
            print(f"{p.name}: " + " -> ".join(s.algorithm for s in p.stages))
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        sock.bind((args.host, args.port))
    except OSError as exc:
        print(f"error: cannot bind {args.host}:{args.port}: {exc}", file=sys.stderr)
        sock.close()
        return EXIT_FAILURE
    sock.listen(128)
    app = create_app(worker_count=args.workers, static_dir=args.static_dir)
    config = uvicorn.Config(app, log_level="warning")
    server = uvicorn.Server(config)
    print(f"netgrab {__version__} serving on http://{args.host}:{args.port}")
    try:
        server.run(sockets=[sock])
    except KeyboardInterrupt:
        pass  # uvicorn re-raises the signal after finishing in-flight work
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 for --help
        return int(exc.code) if exc.code is not None else EXIT_OK
    handlers = {
        "run": cmd_run,
        "batch": cmd_batch,
        "pipelines": cmd_pipelines,
        "serve": cmd_serve,
    }
    return handlers[args.command](args)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
