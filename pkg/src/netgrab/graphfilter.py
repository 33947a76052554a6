"""Post-detection graph cleanup filters.

All filters are pure graph-to-graph transforms, idempotent, and applied
in user-declared pipeline order. Vertex degree counts a self-loop as 2.
"""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyGraphError, InvalidParameterError
from .graphdetect import Edge, ExtractedGraph, Vertex

__all__ = [
    "filter_small_components",
    "keep_largest_component",
    "prune_dead_ends",
    "merge_close_junctions",
    "smooth_filtered_ends",
]


def _components(graph: ExtractedGraph) -> list:
    """Vertex-id sets of connected components (isolated vertices included)."""
    parent = {v.id: v.id for v in graph.vertices}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for e in graph.edges:
        ra, rb = find(e.u), find(e.v)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    comps = {}
    for v in graph.vertices:
        comps.setdefault(find(v.id), set()).add(v.id)
    return list(comps.values())


def _restrict(graph: ExtractedGraph, keep_ids: set) -> ExtractedGraph:
    """Drop all vertices outside ``keep_ids``; ids of survivors unchanged."""
    vertices = tuple(v for v in graph.vertices if v.id in keep_ids)
    edges = tuple(e for e in graph.edges if e.u in keep_ids and e.v in keep_ids)
    return replace(graph, vertices=vertices, edges=edges)


def filter_small_components(
    graph: ExtractedGraph, mode: str, threshold: float
) -> ExtractedGraph:
    """Drop components below an absolute or largest-relative vertex count."""
    if mode == "absolute":
        if threshold < 0 or threshold != int(threshold):
            raise InvalidParameterError(
                f"absolute threshold must be a non-negative integer, got {threshold}"
            )
    elif mode == "relative":
        if not 0.0 <= threshold <= 1.0:
            raise InvalidParameterError(
                f"relative threshold must be in [0, 1], got {threshold}"
            )
    else:
        raise InvalidParameterError(f"mode must be 'absolute' or 'relative', got {mode!r}")

    comps = _components(graph)
    if not comps:
        return graph
    cut = threshold if mode == "absolute" else threshold * max(len(c) for c in comps)
    keep = set()
    for comp in comps:
        if len(comp) >= cut:
            keep |= comp
    return _restrict(graph, keep)


def keep_largest_component(graph: ExtractedGraph) -> ExtractedGraph:
    """Keep only the most-vertices component; ties go to the smallest vertex id."""
    if not graph.vertices:
        raise EmptyGraphError("graph has no vertices")
    comps = _components(graph)
    best = min(comps, key=lambda c: (-len(c), min(c)))
    return _restrict(graph, best)


def _degrees(graph: ExtractedGraph) -> dict:
    deg = {v.id: 0 for v in graph.vertices}
    for e in graph.edges:
        deg[e.u] += 1
        deg[e.v] += 1
    return deg


def prune_dead_ends(graph: ExtractedGraph) -> ExtractedGraph:
    """Return the 2-core: cascade-delete vertices of degree < 2.

    Bridge paths between cycles survive (they are part of the 2-core
    even though they lie on no cycle); dropping them would misrepresent
    physically real connections.
    """
    current = graph
    while True:
        deg = _degrees(current)
        keep = {vid for vid, d in deg.items() if d >= 2}
        if len(keep) == len(current.vertices):
            return current
        current = _restrict(current, keep)


def merge_close_junctions(graph: ExtractedGraph, radius: float) -> ExtractedGraph:
    """Collapse chains of vertices whose centroids sit within ``radius``.

    Clusters are connected components of the distance relation, so
    merging chains transitively. Each multi-vertex cluster becomes one
    vertex at the mean of the member centroids with the smallest member
    id; edges inside a cluster are deleted, all others are re-attached
    unchanged (parallel edges survive).
    """
    if radius <= 0:
        raise InvalidParameterError(f"radius must be > 0, got {radius}")
    if not graph.vertices:
        return graph

    points = np.array([(v.x, v.y) for v in graph.vertices])
    pairs = cKDTree(points).query_pairs(radius)
    idx_of = {v.id: i for i, v in enumerate(graph.vertices)}
    parent = list(range(len(graph.vertices)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    clusters = {}
    for i, v in enumerate(graph.vertices):
        clusters.setdefault(find(i), []).append(v)

    rep_id = {}  # vertex id -> surviving vertex id
    new_vertices = []
    for members in clusters.values():
        if len(members) == 1:
            v = members[0]
            rep_id[v.id] = v.id
            new_vertices.append(v)
            continue
        new_id = min(m.id for m in members)
        cx = float(np.mean([m.x for m in members]))
        cy = float(np.mean([m.y for m in members]))
        pixels = sorted(
            {p for m in members for p in m.pixel_cluster}, key=lambda p: (p[1], p[0])
        )
        merged = Vertex(
            new_id, cx, cy, tuple(pixels), is_anchor=all(m.is_anchor for m in members)
        )
        for m in members:
            rep_id[m.id] = new_id
        new_vertices.append(merged)
    new_vertices.sort(key=lambda v: v.id)

    multi = {rep_id[v.id] for members in clusters.values() if len(members) > 1 for v in members}
    new_edges = []
    for e in graph.edges:
        ru, rv = rep_id[e.u], rep_id[e.v]
        if ru == rv and ru in multi:
            continue
        if (ru, rv) != (e.u, e.v):
            e = replace(e, u=ru, v=rv)
        new_edges.append(e)
    return replace(graph, vertices=tuple(new_vertices), edges=tuple(new_edges))


def _oriented_path(edge: Edge, toward_first: int) -> list:
    """Edge path ordered so it starts at vertex ``toward_first``."""
    return list(edge.path) if edge.u == toward_first else list(reversed(edge.path))


def smooth_filtered_ends(graph: ExtractedGraph) -> ExtractedGraph:
    """Concatenate through non-anchor vertices left with degree exactly 2.

    Junction merges can leave real degree-2 vertices behind; this fuses
    their two incident edges (lengths add, widths combine by pixel-count
    weight, paths join through the removed vertex's cluster pixels). A
    vertex whose only incidence ends up being a single self-loop is
    re-flagged as an anchor.
    """
    vertices = {v.id: v for v in graph.vertices}
    edges = {e.id: e for e in graph.edges}

    def incident(vid):
        return [e for e in edges.values() if e.u == vid or e.v == vid]

    while True:
        target = None
        for vid in sorted(vertices):
            if vertices[vid].is_anchor:
                continue
            inc = incident(vid)
            if len(inc) == 2 and all(e.u != e.v for e in inc):
                target = vid
                break
        if target is None:
            break
        e1, e2 = sorted(incident(target), key=lambda e: e.id)
        m = vertices.pop(target)
        del edges[e1.id], edges[e2.id]
        a = e1.v if e1.u == target else e1.u
        b = e2.v if e2.u == target else e2.u

        cluster = list(m.pixel_cluster)
        internal = sum(
            math.dist(cluster[i], cluster[i + 1]) for i in range(len(cluster) - 1)
        )
        path = _oriented_path(e1, a) + cluster + _oriented_path(e2, target)
        n1, n2 = e1.pixel_count, e2.pixel_count
        if n1 + n2 > 0:
            width = (e1.width * n1 + e2.width * n2) / (n1 + n2)
        else:
            width = (e1.width + e2.width) / 2.0
        merged = Edge(
            min(e1.id, e2.id),
            a,
            b,
            tuple(path),
            length=e1.length + e2.length + internal,
            width=width,
            pixel_count=n1 + n2 + len(cluster),
        )
        edges[merged.id] = merged

    new_vertices = []
    for vid in sorted(vertices):
        v = vertices[vid]
        inc = incident(vid)
        if not v.is_anchor and len(inc) == 1 and inc[0].u == inc[0].v:
            v = replace(v, is_anchor=True)
        new_vertices.append(v)
    return replace(
        graph,
        vertices=tuple(new_vertices),
        edges=tuple(sorted(edges.values(), key=lambda e: e.id)),
    )
