"""Graph file (v1) serialization, overlay rendering, edge histograms.

The v1 text format is canonical: the same graph always serializes to
byte-identical output (4-decimal floats, round-half-away, LF endings,
records sorted by id), so determinism checks can diff files directly.
Pixel paths are not serialized; graphs read back from disk carry empty
paths and ``weights_only=True``.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyGraphError,
    GraphFormatError,
    InvalidParameterError,
)
from .graphdetect import Edge, ExtractedGraph, Vertex
from .raster import RgbImage

__all__ = ["write_graph", "read_graph", "render_overlay", "edge_histogram", "Histogram"]

EDGE_ATTRIBUTES = ("length", "width", "pixel_count")


def _fmt4(value: float) -> str:
    """Format with exactly 4 decimals, ties away from zero."""
    return str(Decimal(value).quantize(Decimal("0.0001"), rounding=ROUND_HALF_UP))


def _round_half_away(value: float) -> int:
    return int(Decimal(value).quantize(Decimal("1"), rounding=ROUND_HALF_UP))


def graph_to_text(graph: ExtractedGraph) -> str:
    w, h = graph.source_dims
    lines = [f"netgraph v1 {w} {h}"]
    for v in sorted(graph.vertices, key=lambda v: v.id):
        lines.append(f"node {v.id} {_fmt4(v.x)} {_fmt4(v.y)}")
    for e in sorted(graph.edges, key=lambda e: e.id):
        lines.append(
            f"edge {e.id} {e.u} {e.v} length={_fmt4(e.length)} "
            f"width={_fmt4(e.width)} pixels={e.pixel_count}"
        )
    return "\n".join(lines) + "\n"


def write_graph(graph: ExtractedGraph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(graph_to_text(graph))


def read_graph(path) -> ExtractedGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return graph_from_text(fh.read())


def graph_from_text(text: str) -> ExtractedGraph:
    lines = text.splitlines()
    if not lines:
        raise GraphFormatError("empty file", line=1)
    header = lines[0].split()
    if len(header) != 4 or header[0] != "netgraph" or header[1] != "v1":
        raise GraphFormatError(f"unrecognized header {lines[0]!r}", line=1)
    try:
        width, height = int(header[2]), int(header[3])
    except ValueError:
        raise GraphFormatError("header dimensions must be integers", line=1)

    vertices, edges = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        try:
            if fields[0] == "node" and len(fields) == 4:
                vertices.append(
                    Vertex(int(fields[1]), float(fields[2]), float(fields[3]), ())
                )
            elif fields[0] == "edge" and len(fields) == 7:
                attrs = {}
                for token in fields[4:]:
                    key, _, raw = token.partition("=")
                    attrs[key] = raw
                edges.append(
                    Edge(
                        int(fields[1]),
                        int(fields[2]),
                        int(fields[3]),
                        (),
                        length=float(attrs["length"]),
                        width=float(attrs["width"]),
                        pixel_count=int(attrs["pixels"]),
                    )
                )
            else:
                raise GraphFormatError(f"unrecognized record {fields[0]!r}", line=lineno)
        except (ValueError, KeyError, IndexError) as exc:
            raise GraphFormatError(f"malformed line: {exc}", line=lineno) from exc

    known = {v.id for v in vertices}
    for e in edges:
        for endpoint in (e.u, e.v):
            if endpoint not in known:
                raise GraphFormatError(f"edge {e.id} references missing node {endpoint}")
    return ExtractedGraph(
        tuple(vertices), tuple(edges), (width, height), weights_only=True
    )


def _disc_offsets(thickness: int) -> np.ndarray:
    r = thickness / 2.0
    span = int(np.ceil(r))
    ys, xs = np.mgrid[-span : span + 1, -span : span + 1]
    keep = (xs * xs + ys * ys) <= r * r
    return np.stack([ys[keep], xs[keep]], axis=1)


def _bresenham(x0: int, y0: int, x1: int, y1: int) -> list:
    points = []
    dx, dy = abs(x1 - x0), -abs(y1 - y0)
    sx, sy = (1 if x0 < x1 else -1), (1 if y0 < y1 else -1)
    err = dx + dy
    while True:
        points.append((x0, y0))
        if x0 == x1 and y0 == y1:
            return points
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy


def _stamp(pixels: np.ndarray, coords: np.ndarray, offsets: np.ndarray, color) -> None:
    h, w = pixels.shape[:2]
    pts = (coords[:, None, :] + offsets[None, :, :]).reshape(-1, 2)
    keep = (pts[:, 0] >= 0) & (pts[:, 0] < h) & (pts[:, 1] >= 0) & (pts[:, 1] < w)
    pts = pts[keep]
    pixels[pts[:, 0], pts[:, 1]] = color


def render_overlay(base: RgbImage, graph: ExtractedGraph) -> RgbImage:
    """Draw the graph on the input: red edge strokes, then blue vertex squares.

    Edge stroke thickness is round(width) clamped to >= 1; vertex squares
    are max(3, round(0.006 * min(W, H))) on a side.
    """
    if graph.source_dims != (base.width, base.height):
        raise DimensionMismatchError(
            f"graph source is {graph.source_dims}, image is "
            f"{(base.width, base.height)}"
        )
    out = base.pixels.copy()
    by_id = graph.vertex_by_id()

    for e in graph.edges:
        thickness = max(1, _round_half_away(e.width))
        offsets = _disc_offsets(thickness)
        if e.path:
            coords = np.array([(y, x) for x, y in e.path])
        else:
            u, v = by_id[e.u], by_id[e.v]
            coords = np.array(
                [
                    (y, x)
                    for x, y in _bresenham(
                        _round_half_away(u.x),
                        _round_half_away(u.y),
                        _round_half_away(v.x),
                        _round_half_away(v.y),
                    )
                ]
            )
        _stamp(out, coords, offsets, (255, 0, 0))

    side = max(3, _round_half_away(0.006 * min(base.width, base.height)))
    square = np.mgrid[0:side, 0:side].reshape(2, -1).T - side // 2
    for v in graph.vertices:
        center = np.array([[_round_half_away(v.y), _round_half_away(v.x)]])
        _stamp(out, center, square, (0, 0, 255))
    return RgbImage(out)


@dataclass(frozen=True)
class Histogram:
    bin_edges: tuple
    counts: tuple


def edge_histogram(graph: ExtractedGraph, attribute: str, bin_count: int) -> Histogram:
    """Equal-width bins over [min, max]; the max lands in the last bin."""
    if attribute not in EDGE_ATTRIBUTES:
        raise InvalidParameterError(
            f"attribute must be one of {EDGE_ATTRIBUTES}, got {attribute!r}"
        )
    if bin_count < 1:
        raise InvalidParameterError(f"bin_count must be >= 1, got {bin_count}")
    if not graph.edges:
        raise EmptyGraphError("graph has no edges to histogram")
    values = np.array([getattr(e, attribute) for e in graph.edges], dtype=np.float64)
    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        return Histogram((lo, hi), (len(values),))
    counts, edges = np.histogram(values, bins=bin_count, range=(lo, hi))
    return Histogram(tuple(float(x) for x in edges), tuple(int(c) for c in counts))
