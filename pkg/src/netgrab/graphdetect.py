"""Skeleton-to-graph conversion: vertices, edge paths, length/width weights.

A skeleton pixel is a vertex candidate iff its 8-neighbor foreground
count differs from 2 (endpoints, junctions, isolated pixels). Touching
candidates merge into one vertex, which is how a 4-way crossing split
into adjacent 3-way pixels by thinning comes back together; merging
*separated* junction pixels is graphfilter's job.

Vertex clusters and edge paths partition the skeleton exactly; the
partition is asserted on every trace. Parallel edges and self-loops are
legitimate output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionMismatchError, InconsistentSkeletonError
from .raster import BinaryImage, DistanceField, connected_components
from .thinning import Skeleton

__all__ = [
    "Vertex",
    "Edge",
    "ExtractedGraph",
    "detect_vertices",
    "trace_edges",
    "compute_weights",
]

# 8-neighbor probe order, clockwise from north (matches the thinning
# module's enumeration); (dy, dx) pairs.
NB8 = ((-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1))
NB4 = ((-1, 0), (0, 1), (1, 0), (0, -1))

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class Vertex:
    id: int
    x: float
    y: float
    pixel_cluster: tuple  # ((x, y), ...) in raster order
    is_anchor: bool = False


@dataclass(frozen=True, eq=False)
class Edge:
    id: int
    u: int
    v: int
    path: tuple  # interior pixels ((x, y), ...), ordered from u to v
    length: float = 0.0
    width: float = 0.0
    pixel_count: int = 0


@dataclass(frozen=True, eq=False)
class ExtractedGraph:
    vertices: tuple
    edges: tuple
    source_dims: tuple  # (width, height)
    weights_only: bool = False

    def vertex_by_id(self) -> dict:
        return {v.id: v for v in self.vertices}


def _neighbor_counts(fg: np.ndarray) -> np.ndarray:
    p = np.pad(fg, 1, mode="constant", constant_values=False)
    counts = np.zeros(fg.shape, dtype=np.uint8)
    for dy, dx in NB8:
        counts += p[1 + dy : p.shape[0] - 1 + dy, 1 + dx : p.shape[1] - 1 + dx]
    return counts


def detect_vertices(skeleton: Skeleton) -> list:
    """Cluster skeleton pixels whose neighbor count is not 2 into vertices."""
    fg = skeleton.mask.pixels
    candidates = fg & (_neighbor_counts(fg) != 2)
    labeled = connected_components(BinaryImage(candidates), 8)
    coords = np.argwhere(candidates)  # raster order
    labels = labeled.labels[coords[:, 0], coords[:, 1]]
    order = np.argsort(labels, kind="stable")
    coords, labels = coords[order], labels[order]

    vertices = []
    starts = np.searchsorted(labels, np.arange(1, labeled.component_count + 1))
    ends = np.append(starts[1:], len(labels))
    for vid, (a, b) in enumerate(zip(starts, ends)):
        cluster = coords[a:b]
        cx = float(cluster[:, 1].mean())
        cy = float(cluster[:, 0].mean())
        pixels = tuple((int(x), int(y)) for y, x in cluster)
        vertices.append(Vertex(vid, cx, cy, pixels))
    return vertices


def trace_edges(skeleton: Skeleton, vertices: list) -> ExtractedGraph:
    """Walk degree-2 chains between vertex clusters; close isolated cycles.

    Every interior pixel is consumed exactly once, so paths are disjoint
    from each other and from all clusters, and together they partition
    the skeleton.
    """
    fg = skeleton.mask.pixels
    h, w = fg.shape
    counts = _neighbor_counts(fg)

    cluster_id = np.full((h, w), -1, dtype=np.int32)
    for v in vertices:
        for x, y in v.pixel_cluster:
            cluster_id[y, x] = v.id
    consumed = np.zeros((h, w), dtype=bool)

    def walk(start_y, start_x, from_y, from_x, stop_at):
        """Follow degree-2 pixels from (start) entered from (from_).

        Returns (path, end_vertex_id); ``stop_at`` is the pixel that
        terminates a cycle walk (the anchor itself), or None.
        """
        path = [(start_x, start_y)]
        consumed[start_y, start_x] = True
        py, px = from_y, from_x
        cy, cx = start_y, start_x
        while True:
            if counts[cy, cx] != 2:
                raise InconsistentSkeletonError(
                    f"pixel ({cx}, {cy}) has {counts[cy, cx]} neighbors outside a cluster"
                )
            ny = nx = -1
            for dy, dx in NB8:
                ty, tx = cy + dy, cx + dx
                if 0 <= ty < h and 0 <= tx < w and fg[ty, tx] and (ty, tx) != (py, px):
                    ny, nx = ty, tx
                    break
            if stop_at is not None and (ny, nx) == stop_at:
                return path, None
            cid = cluster_id[ny, nx]
            if cid >= 0:
                return path, int(cid)
            if consumed[ny, nx]:
                raise InconsistentSkeletonError(
                    f"walk re-entered consumed pixel ({nx}, {ny})"
                )
            path.append((nx, ny))
            consumed[ny, nx] = True
            py, px, cy, cx = cy, cx, ny, nx

    raw = []  # (u, v, path)
    for vertex in vertices:
        for x, y in vertex.pixel_cluster:
            for dy, dx in NB8:
                ty, tx = y + dy, x + dx
                if not (0 <= ty < h and 0 <= tx < w):
                    continue
                if not fg[ty, tx] or cluster_id[ty, tx] >= 0 or consumed[ty, tx]:
                    continue
                path, end = walk(ty, tx, y, x, None)
                raw.append((vertex.id, end, path))

    # Untouched pixels form junction-free cycles; anchor each at its
    # raster-first pixel and store the cycle as a self-loop.
    vertices = list(vertices)
    leftover = fg & ~consumed & (cluster_id < 0)
    if leftover.any():
        comp = connected_components(BinaryImage(leftover), 8)
        seen = set()
        anchors = []
        for y, x in np.argwhere(leftover):
            lab = int(comp.labels[y, x])
            if lab not in seen:
                seen.add(lab)
                anchors.append((int(y), int(x)))
        for ay, ax in anchors:
            vid = len(vertices)
            vertices.append(
                Vertex(vid, float(ax), float(ay), ((ax, ay),), is_anchor=True)
            )
            cluster_id[ay, ax] = vid
            start = None
            for dy, dx in NB8:
                ty, tx = ay + dy, ax + dx
                if 0 <= ty < h and 0 <= tx < w and fg[ty, tx] and not consumed[ty, tx]:
                    start = (ty, tx)
                    break
            if start is None:  # single isolated pixel cannot be leftover
                raise InconsistentSkeletonError(
                    f"cycle anchor ({ax}, {ay}) has no unconsumed neighbor"
                )
            path, end = walk(start[0], start[1], ay, ax, (ay, ax))
            if end is not None and end != vid:
                raise InconsistentSkeletonError(
                    f"cycle at ({ax}, {ay}) reached foreign cluster {end}"
                )
            raw.append((vid, vid, path))

    if not np.array_equal(fg, consumed | (cluster_id >= 0)):
        raise InconsistentSkeletonError(
            "vertex clusters and edge paths do not partition the skeleton"
        )

    def edge_key(entry):
        u, v, path = entry
        x0, y0 = path[0]
        return (min(u, v), max(u, v), y0 * w + x0)

    raw.sort(key=edge_key)
    edges = tuple(
        Edge(eid, u, v, tuple(path), pixel_count=len(path))
        for eid, (u, v, path) in enumerate(raw)
    )
    return ExtractedGraph(tuple(vertices), edges, (w, h))


def _step_cost(ax, ay, bx, by) -> float:
    return 1.0 if abs(ax - bx) + abs(ay - by) == 1 else SQRT2


def _connect_cost(px, py, cluster_set) -> float:
    """Cost of the step joining a path end to its vertex cluster."""
    for dy, dx in NB4:
        if (px + dx, py + dy) in cluster_set:
            return 1.0
    return SQRT2


def compute_weights(graph: ExtractedGraph, distance: DistanceField) -> ExtractedGraph:
    """Attach length (1 / sqrt(2) steps) and width (EDT probe) to every edge.

    Width per path pixel is 2*sqrt(sq_dist) - 1, which is exact on
    odd-width strokes: the centerline of a w-wide stroke sits (w+1)/2
    from background.
    """
    w, h = graph.source_dims
    if (distance.width, distance.height) != (w, h):
        raise DimensionMismatchError(
            f"distance field is {distance.width}x{distance.height}, "
            f"graph source is {w}x{h}"
        )
    sq = distance.sq_dist
    by_id = graph.vertex_by_id()
    cluster_sets = {v.id: frozenset(v.pixel_cluster) for v in graph.vertices}

    new_edges = []
    for edge in graph.edges:
        if edge.path:
            arr = np.asarray(edge.path, dtype=np.int64)
            if len(arr) > 1:
                d = np.abs(np.diff(arr, axis=0)).sum(axis=1)
                length = float(np.where(d == 1, 1.0, SQRT2).sum())
            else:
                length = 0.0
            length += _connect_cost(*edge.path[0], cluster_sets[edge.u])
            length += _connect_cost(*edge.path[-1], cluster_sets[edge.v])
            widths = 2.0 * np.sqrt(sq[arr[:, 1], arr[:, 0]]) - 1.0
            width = float(widths.mean())
            count = len(arr)
        else:
            ax, ay, bx, by = _touching_pair(
                by_id[edge.u].pixel_cluster, cluster_sets[edge.v]
            )
            length = _step_cost(ax, ay, bx, by)
            width = float(
                (2.0 * math.sqrt(sq[ay, ax]) - 1.0 + 2.0 * math.sqrt(sq[by, bx]) - 1.0)
                / 2.0
            )
            count = 0
        new_edges.append(
            replace(edge, length=length, width=width, pixel_count=count)
        )
    return replace(graph, edges=tuple(new_edges))


def _touching_pair(cluster_u, cluster_v_set):
    """Raster-first touching pixel pair between two adjacent clusters."""
    best = None
    for x, y in cluster_u:
        for dy, dx in NB8:
            if (x + dx, y + dy) in cluster_v_set:
                if abs(dx) + abs(dy) == 1:
                    return x, y, x + dx, y + dy
                if best is None:
                    best = (x, y, x + dx, y + dy)
    if best is None:
        raise InconsistentSkeletonError("empty-path edge between non-touching clusters")
    return best
