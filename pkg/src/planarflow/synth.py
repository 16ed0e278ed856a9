"""Synthetic planar road networks: rectangular grids and random triangulations."""
from __future__ import annotations

import math
from collections import deque

import numpy as np
from scipy.spatial import Delaunay

from .graph import PlanarRoadGraph, load_graph


def grid_document(
    rows: int,
    cols: int,
    edge_length: float = 1.0,
    capacity: int = 1,
    source=None,
    sink=None,
) -> dict:
    """Build a graph document for a rows-by-cols grid of junctions.

    Nodes are numbered 1..rows*cols in row-major order; every horizontal
    and vertical neighbor pair is joined by one edge of the given length
    and capacity.  Terminals default to node 1 and the opposite corner.

    Args:
        rows: number of junction rows, at least 2.
        cols: number of junction columns, at least 2.
        edge_length: length of every edge in meters.
        capacity: capacity of every edge.
        source: optional node id overriding the default corner.
        sink: optional node id overriding the default corner.

    Returns:
        A document dict accepted by load_graph.
    """
    if rows < 2 or cols < 2:
        raise ValueError("grid needs at least 2 rows and 2 columns")
    nodes = []
    for r in range(rows):
        for c in range(cols):
            nodes.append(
                {"id": r * cols + c + 1, "x": c * edge_length, "y": r * edge_length}
            )
    edges = []
    eid = 1
    for r in range(rows):
        for c in range(cols):
            nid = r * cols + c + 1
            if c + 1 < cols:
                edges.append(
                    {"id": eid, "u": nid, "v": nid + 1,
                     "length": edge_length, "capacity": capacity}
                )
                eid += 1
            if r + 1 < rows:
                edges.append(
                    {"id": eid, "u": nid, "v": nid + cols,
                     "length": edge_length, "capacity": capacity}
                )
                eid += 1
    return {
        "nodes": nodes,
        "edges": edges,
        "sources": [1 if source is None else source],
        "sinks": [rows * cols if sink is None else sink],
    }


def grid_graph(
    rows: int,
    cols: int,
    edge_length: float = 1.0,
    capacity: int = 1,
    source=None,
    sink=None,
) -> PlanarRoadGraph:
    """Load the grid document produced by grid_document."""
    return load_graph(
        grid_document(rows, cols, edge_length, capacity, source, sink)
    )


def random_planar_document(
    rng: np.random.Generator,
    n_nodes: int,
    drop_fraction: float = 0.25,
    capacity_choices: tuple[int, ...] = (1, 2),
    unit_lengths: bool = False,
    extent: float = 100.0,
) -> dict:
    """Build a random connected planar graph document.

    Scatters points uniformly, takes their Delaunay triangulation (whose
    straight-line drawing is crossing-free), then removes a random subset
    of non-tree edges.  Terminals are the most distant point pair.

    Args:
        rng: seeded random generator; drives every choice.
        n_nodes: number of nodes, at least 4.
        drop_fraction: probability of removing each non-tree edge.
        capacity_choices: capacities drawn uniformly per edge.
        unit_lengths: use length 1.0 instead of euclidean distance.
        extent: side of the square the points are scattered in.

    Returns:
        A document dict accepted by load_graph.
    """
    if n_nodes < 4:
        raise ValueError("need at least 4 nodes")
    pts = rng.uniform(0.0, extent, size=(n_nodes, 2))
    tri = Delaunay(pts)
    pairs: set[tuple[int, int]] = set()
    for simplex in tri.simplices:
        for a in range(3):
            u, v = int(simplex[a]), int(simplex[(a + 1) % 3])
            pairs.add((u, v) if u < v else (v, u))
    pair_list = sorted(pairs)

    # protect a spanning tree so random drops cannot disconnect the graph
    adj: dict[int, list[tuple[int, int]]] = {i: [] for i in range(n_nodes)}
    for k, (u, v) in enumerate(pair_list):
        adj[u].append((v, k))
        adj[v].append((u, k))
    tree: set[int] = set()
    seen = [False] * n_nodes
    seen[0] = True
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v, k in adj[u]:
            if not seen[v]:
                seen[v] = True
                tree.add(k)
                queue.append(v)
    keep = [
        k for k in range(len(pair_list))
        if k in tree or rng.random() >= drop_fraction
    ]

    d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
    s_idx, t_idx = np.unravel_index(int(np.argmax(d2)), d2.shape)

    nodes = [
        {"id": i + 1, "x": float(pts[i, 0]), "y": float(pts[i, 1])}
        for i in range(n_nodes)
    ]
    edges = []
    for eid, k in enumerate(keep, start=1):
        u, v = pair_list[k]
        length = 1.0 if unit_lengths else float(
            math.dist(pts[u], pts[v])
        )
        edges.append(
            {
                "id": eid,
                "u": u + 1,
                "v": v + 1,
                "length": length,
                "capacity": int(rng.choice(capacity_choices)),
            }
        )
    return {
        "nodes": nodes,
        "edges": edges,
        "sources": [int(s_idx) + 1],
        "sinks": [int(t_idx) + 1],
    }


def random_planar_graph(
    rng: np.random.Generator,
    n_nodes: int,
    **kwargs,
) -> PlanarRoadGraph:
    """Load the document produced by random_planar_document."""
    return load_graph(random_planar_document(rng, n_nodes, **kwargs))
