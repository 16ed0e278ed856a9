"""Planar road-network model: loading, validation, faces, terminal augmentation.

A road network is an undirected planar graph with straight-line node
coordinates, positive edge lengths, and positive integer edge capacities
(lane counts).  Instances carry a single source/sink pair; multi-terminal
inputs are reduced to that shape by wiring a virtual source and sink to the
real terminals with zero-length, effectively-unbounded edges.  Faces come
from the rotation system induced by sorting each node's incident edges by
angle; they drive the rerouting moves of the flow chain.
"""
from __future__ import annotations

import json
import math
import warnings
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import (
    DisconnectedGraphError,
    GraphFormatError,
    PlanarityError,
)

NodeId = int | str
EdgeId = int | str

VIRTUAL_SOURCE_ID = "virtual-source"
VIRTUAL_SINK_ID = "virtual-sink"

_TOP_FIELDS = {"nodes", "edges", "sources", "sinks"}
_NODE_FIELDS = {"id", "x", "y"}
_EDGE_FIELDS = {"id", "u", "v", "length", "capacity"}


@dataclass(frozen=True)
class NodeRecord:
    """One junction: unique id plus planar coordinates in meters."""

    id: NodeId
    x: float
    y: float


@dataclass(frozen=True)
class EdgeRecord:
    """One undirected road segment.

    Attributes:
        id: unique identifier.
        u: id of one endpoint.
        v: id of the other endpoint.
        length: positive length in meters (0.0 only for virtual edges).
        capacity: positive integer lane count; virtual edges carry a
            sentinel larger than any cut.
        virtual: True for terminal-augmentation edges, which never appear
            in any face boundary.
    """

    id: EdgeId
    u: NodeId
    v: NodeId
    length: float
    capacity: int
    virtual: bool = False


@dataclass(frozen=True)
class FaceRecord:
    """One face of the embedding, as a closed boundary walk.

    Attributes:
        id: face index, 0..F-1.
        boundary: edge ids along the walk; a bridge edge appears twice.
        is_outer: True for the unbounded face.
        area: signed area of the walk (shoelace over the darts).
        darts: directed node-index pairs of the walk, in order.
        edge_indices: internal edge indices aligned with ``darts``.
        edge_index_set: the distinct internal edge indices on the walk.
    """

    id: int
    boundary: tuple[EdgeId, ...]
    is_outer: bool
    area: float
    darts: tuple[tuple[int, int], ...]
    edge_indices: tuple[int, ...]
    edge_index_set: frozenset[int]


def _id_sort_key(value: NodeId | EdgeId) -> tuple[int, int | str]:
    # integers order before strings so mixed-id graphs stay deterministic
    return (1, value) if isinstance(value, str) else (0, value)


def _check_id(value, what: str) -> NodeId:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise GraphFormatError(f"{what} id {value!r} must be an integer or string")
    return value


class PlanarRoadGraph:
    """Validated planar road network with faces and one source/sink pair.

    Construction performs full validation: record invariants, connectivity,
    a straight-line planarity check over non-virtual edges (the first
    crossing pair is reported), and face enumeration with an Euler-formula
    consistency check.  Instances are immutable by convention; all derived
    arrays are precomputed.

    Attributes:
        nodes: NodeRecord tuple, aligned with internal node indices.
        edges: EdgeRecord tuple, aligned with internal edge indices.
        faces: FaceRecord tuple over the non-virtual subgraph.
        source: external id of the source node.
        sink: external id of the sink node.
        virtual_edge_ids: external ids of terminal-augmentation edges.
    """

    def __init__(
        self,
        nodes: list[NodeRecord],
        edges: list[EdgeRecord],
        source: NodeId,
        sink: NodeId,
        *,
        faces: tuple[FaceRecord, ...] | None = None,
    ):
        self.nodes: tuple[NodeRecord, ...] = tuple(nodes)
        self.edges: tuple[EdgeRecord, ...] = tuple(edges)
        self._validate_records()

        self.node_index: dict[NodeId, int] = {n.id: i for i, n in enumerate(self.nodes)}
        self.edge_index: dict[EdgeId, int] = {e.id: i for i, e in enumerate(self.edges)}
        n, m = len(self.nodes), len(self.edges)
        self.n_nodes, self.n_edges = n, m

        self.node_xy = np.array([[nd.x, nd.y] for nd in self.nodes], dtype=np.float64)
        self.edge_u_idx = np.array([self.node_index[e.u] for e in self.edges], dtype=np.int64)
        self.edge_v_idx = np.array([self.node_index[e.v] for e in self.edges], dtype=np.int64)
        self.edge_length = np.array([e.length for e in self.edges], dtype=np.float64)
        self.edge_capacity = np.array([e.capacity for e in self.edges], dtype=np.int64)
        self.edge_is_virtual = np.array([e.virtual for e in self.edges], dtype=bool)
        self.virtual_edge_ids: frozenset[EdgeId] = frozenset(
            e.id for e in self.edges if e.virtual
        )
        self.virtual_edge_idx: frozenset[int] = frozenset(
            i for i, e in enumerate(self.edges) if e.virtual
        )
        self.real_edge_count = m - len(self.virtual_edge_idx)

        self.pair_to_edge: dict[tuple[int, int], int] = {}
        for i in range(m):
            a, b = int(self.edge_u_idx[i]), int(self.edge_v_idx[i])
            key = (a, b) if a < b else (b, a)
            if key in self.pair_to_edge:
                other = self.edges[self.pair_to_edge[key]]
                raise GraphFormatError(
                    f"parallel edges {other.id!r} and {self.edges[i].id!r} "
                    f"between nodes {self.edges[i].u!r} and {self.edges[i].v!r}"
                )
            self.pair_to_edge[key] = i

        # adjacency sorted by edge id so augmenting-path searches are deterministic
        adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for i in range(m):
            a, b = int(self.edge_u_idx[i]), int(self.edge_v_idx[i])
            adj[a].append((b, i))
            adj[b].append((a, i))
        self.adjacency: tuple[tuple[tuple[int, int], ...], ...] = tuple(
            tuple(sorted(nbrs, key=lambda p: _id_sort_key(self.edges[p[1]].id)))
            for nbrs in adj
        )

        for node_id in (source, sink):
            if node_id not in self.node_index:
                raise GraphFormatError(f"terminal node {node_id!r} not in graph")
        if source == sink:
            raise GraphFormatError("source and sink must differ")
        self.source: NodeId = source
        self.sink: NodeId = sink
        self.s_idx = self.node_index[source]
        self.t_idx = self.node_index[sink]

        self._check_connected()
        self._check_planarity()
        self.faces: tuple[FaceRecord, ...] = (
            faces if faces is not None else _trace_faces(self)
        )

    # -- validation ------------------------------------------------------

    def _validate_records(self) -> None:
        seen_nodes: set[NodeId] = set()
        for nd in self.nodes:
            _check_id(nd.id, "node")
            if nd.id in seen_nodes:
                raise GraphFormatError(f"duplicate node id {nd.id!r}")
            seen_nodes.add(nd.id)
            if not (math.isfinite(nd.x) and math.isfinite(nd.y)):
                raise GraphFormatError(f"node {nd.id!r} has non-finite coordinates")
        seen_edges: set[EdgeId] = set()
        for e in self.edges:
            _check_id(e.id, "edge")
            if e.id in seen_edges:
                raise GraphFormatError(f"duplicate edge id {e.id!r}")
            seen_edges.add(e.id)
            if e.u not in seen_nodes or e.v not in seen_nodes:
                raise GraphFormatError(f"edge {e.id!r} references unknown node")
            if e.u == e.v:
                raise GraphFormatError(f"edge {e.id!r} is a self-loop")
            if isinstance(e.capacity, bool) or not isinstance(e.capacity, (int, np.integer)):
                raise GraphFormatError(f"edge {e.id!r} capacity must be an integer")
            if e.capacity < 1:
                raise GraphFormatError(f"edge {e.id!r} has non-positive capacity")
            if not math.isfinite(e.length):
                raise GraphFormatError(f"edge {e.id!r} has non-finite length")
            if e.virtual:
                if e.length != 0.0:
                    raise GraphFormatError(f"virtual edge {e.id!r} must have length 0")
            elif e.length <= 0.0:
                raise GraphFormatError(f"edge {e.id!r} has non-positive length")

    def _check_connected(self) -> None:
        if self.n_nodes == 0:
            raise GraphFormatError("graph has no nodes")
        seen = [False] * self.n_nodes
        seen[self.s_idx] = True
        queue = deque([self.s_idx])
        while queue:
            u = queue.popleft()
            for v, _ in self.adjacency[u]:
                if not seen[v]:
                    seen[v] = True
                    queue.append(v)
        if not all(seen):
            missing = self.nodes[seen.index(False)].id
            raise DisconnectedGraphError(
                f"graph is not connected: node {missing!r} unreachable from source "
                f"{self.source!r} (isolated or separate component)"
            )

    def _check_planarity(self) -> None:
        real = [i for i in range(self.n_edges) if not self.edge_is_virtual[i]]
        if len(real) < 2:
            return
        xy = self.node_xy
        eu, ev = self.edge_u_idx, self.edge_v_idx
        x1 = xy[eu[real], 0]; y1 = xy[eu[real], 1]
        x2 = xy[ev[real], 0]; y2 = xy[ev[real], 1]
        lox, hix = np.minimum(x1, x2), np.maximum(x1, x2)
        loy, hiy = np.minimum(y1, y2), np.maximum(y1, y2)
        # bucket edges by bounding box into a uniform grid; only same-cell
        # pairs need the exact test
        spans = np.concatenate([hix - lox, hiy - loy])
        cell = float(np.median(spans[spans > 0])) if np.any(spans > 0) else 1.0
        cell = max(cell, 1e-9)
        buckets: dict[tuple[int, int], list[int]] = {}
        for k in range(len(real)):
            cx0 = int(math.floor(lox[k] / cell)); cx1 = int(math.floor(hix[k] / cell))
            cy0 = int(math.floor(loy[k] / cell)); cy1 = int(math.floor(hiy[k] / cell))
            for cx in range(cx0, cx1 + 1):
                for cy in range(cy0, cy1 + 1):
                    buckets.setdefault((cx, cy), []).append(k)
        checked: set[tuple[int, int]] = set()
        for members in buckets.values():
            for a in range(len(members)):
                for b in range(a + 1, len(members)):
                    ka, kb = members[a], members[b]
                    pair = (ka, kb) if ka < kb else (kb, ka)
                    if pair in checked:
                        continue
                    checked.add(pair)
                    ia, ib = real[pair[0]], real[pair[1]]
                    if self._edges_conflict(ia, ib):
                        raise PlanarityError(self.edges[ia].id, self.edges[ib].id)

    def _edges_conflict(self, ia: int, ib: int) -> bool:
        a1, a2 = int(self.edge_u_idx[ia]), int(self.edge_v_idx[ia])
        b1, b2 = int(self.edge_u_idx[ib]), int(self.edge_v_idx[ib])
        shared = {a1, a2} & {b1, b2}
        xy = self.node_xy
        if shared:
            # endpoint contact is fine; flag only collinear overlap past it
            s = shared.pop()
            pa = a2 if a1 == s else a1
            pb = b2 if b1 == s else b1
            sv = xy[s]; va = xy[pa] - sv; vb = xy[pb] - sv
            crossed = va[0] * vb[1] - va[1] * vb[0]
            return crossed == 0.0 and (va[0] * vb[0] + va[1] * vb[1]) > 0.0
        return _segments_intersect(xy[a1], xy[a2], xy[b1], xy[b2])

    # -- lookups ---------------------------------------------------------

    def edge_between(self, u_idx: int, v_idx: int) -> int | None:
        """Internal edge index joining two node indices, or None."""
        key = (u_idx, v_idx) if u_idx < v_idx else (v_idx, u_idx)
        return self.pair_to_edge.get(key)

    def __repr__(self) -> str:
        return (
            f"PlanarRoadGraph(nodes={self.n_nodes}, edges={self.n_edges}, "
            f"faces={len(self.faces)}, source={self.source!r}, sink={self.sink!r})"
        )


def _orient(p: np.ndarray, q: np.ndarray, r: np.ndarray) -> float:
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])


def _on_segment(p: np.ndarray, q: np.ndarray, r: np.ndarray) -> bool:
    # r known collinear with p-q: is it within the box?
    return (
        min(p[0], q[0]) <= r[0] <= max(p[0], q[0])
        and min(p[1], q[1]) <= r[1] <= max(p[1], q[1])
    )


def _segments_intersect(p1, p2, p3, p4) -> bool:
    d1 = _orient(p3, p4, p1)
    d2 = _orient(p3, p4, p2)
    d3 = _orient(p1, p2, p3)
    d4 = _orient(p1, p2, p4)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
    ):
        return True
    if d1 == 0 and _on_segment(p3, p4, p1):
        return True
    if d2 == 0 and _on_segment(p3, p4, p2):
        return True
    if d3 == 0 and _on_segment(p1, p2, p3):
        return True
    if d4 == 0 and _on_segment(p1, p2, p4):
        return True
    return False


def _trace_faces(graph: PlanarRoadGraph) -> tuple[FaceRecord, ...]:
    # rotation system: darts at each node in counterclockwise angular order;
    # successor of dart (u,v) is (v,w) with w following u in the rotation at v
    xy = graph.node_xy
    rotations: list[list[int]] = [[] for _ in range(graph.n_nodes)]
    for i in range(graph.n_edges):
        if graph.edge_is_virtual[i]:
            continue
        a, b = int(graph.edge_u_idx[i]), int(graph.edge_v_idx[i])
        rotations[a].append(b)
        rotations[b].append(a)
    for v in range(graph.n_nodes):
        rotations[v].sort(key=lambda w: math.atan2(xy[w, 1] - xy[v, 1], xy[w, 0] - xy[v, 0]))
    succ_pos = {
        (v, w): k for v in range(graph.n_nodes) for k, w in enumerate(rotations[v])
    }

    darts = [(v, w) for v in range(graph.n_nodes) for w in rotations[v]]
    unused = set(darts)
    walks: list[list[tuple[int, int]]] = []
    while unused:
        start = unused.pop()
        walk = [start]
        u, v = start
        while True:
            # previous neighbor in ccw order keeps the face interior on the
            # left, so inner walks run ccw (area > 0) and the outer runs cw
            nxt_idx = (succ_pos[(v, u)] - 1) % len(rotations[v])
            u, v = v, rotations[v][nxt_idx]
            if (u, v) == start:
                break
            unused.remove((u, v))
            walk.append((u, v))
        walks.append(walk)

    records = []
    for walk in walks:
        area = 0.5 * sum(
            xy[a, 0] * xy[b, 1] - xy[b, 0] * xy[a, 1] for a, b in walk
        )
        eidx = tuple(graph.edge_between(a, b) for a, b in walk)
        records.append((walk, area, eidx))

    # inner faces come out with positive area under this successor rule;
    # the outer walk is the unique negative one
    outer_pos = 0
    if len(records) > 1:
        outer_pos = min(range(len(records)), key=lambda i: records[i][1])
        negatives = sum(1 for _, area, _ in records if area < 0)
        if negatives != 1 or records[outer_pos][1] >= 0:
            raise AssertionError(
                f"face orientation inconsistent: {negatives} negative-area walks"
            )

    faces = []
    for fid, (walk, area, eidx) in enumerate(records):
        faces.append(
            FaceRecord(
                id=fid,
                boundary=tuple(graph.edges[i].id for i in eidx),
                is_outer=(fid == outer_pos),
                area=area,
                darts=tuple(walk),
                edge_indices=eidx,
                edge_index_set=frozenset(eidx),
            )
        )

    n_real_edges = graph.real_edge_count
    touched: set[int] = set()
    for i in range(graph.n_edges):
        if not graph.edge_is_virtual[i]:
            touched.add(int(graph.edge_u_idx[i]))
            touched.add(int(graph.edge_v_idx[i]))
    n_real_nodes = len(touched)
    if len(faces) + n_real_nodes - n_real_edges != 2:
        raise AssertionError(
            f"face trace inconsistent with Euler's formula: F={len(faces)} "
            f"V={n_real_nodes} E={n_real_edges}"
        )
    counts: dict[int, int] = {}
    for f in faces:
        for i in f.edge_indices:
            counts[i] = counts.get(i, 0) + 1
    if any(c != 2 for c in counts.values()) or len(counts) != n_real_edges:
        raise AssertionError("face trace does not cover every edge exactly twice")
    return tuple(faces)


def compute_faces(graph: PlanarRoadGraph) -> tuple[FaceRecord, ...]:
    """Enumerate all faces of the graph's straight-line embedding.

    Derives the rotation system by sorting each node's incident edges by
    angle and traces boundary walks; virtual edges are excluded.  The
    result includes the outer face and satisfies |F| + |V| - |E| = 2.

    Args:
        graph: a validated graph.

    Returns:
        Tuple of FaceRecord, indexed by face id.
    """
    return _trace_faces(graph)


def augment_terminals(
    graph: PlanarRoadGraph,
    sources: list[NodeId],
    sinks: list[NodeId],
) -> PlanarRoadGraph:
    """Reduce a multi-terminal instance to a single source/sink pair.

    Adds a virtual source wired to every listed source and a virtual sink
    wired from every listed sink.  Virtual edges have length 0 and a
    capacity sentinel exceeding the sum of all real capacities, so they
    never constrain a cut.  They are excluded from the embedding: faces
    are those of the original graph.

    Args:
        graph: a graph without prior augmentation.
        sources: nonempty list of existing node ids.
        sinks: nonempty list of existing node ids, disjoint from sources.

    Returns:
        A new graph whose source/sink are the virtual terminals.

    Raises:
        GraphFormatError: on empty or overlapping terminal sets, unknown
            ids, or an already-augmented graph.
    """
    if graph.virtual_edge_ids:
        raise GraphFormatError("graph already has virtual terminals")
    if not sources or not sinks:
        raise GraphFormatError("sources and sinks must be nonempty")
    if set(sources) & set(sinks):
        raise GraphFormatError("sources and sinks must be disjoint")
    for nid in list(sources) + list(sinks):
        if nid not in graph.node_index:
            raise GraphFormatError(f"terminal node {nid!r} not in graph")
        if nid in (VIRTUAL_SOURCE_ID, VIRTUAL_SINK_ID):
            raise GraphFormatError(f"node id {nid!r} is reserved")
    for reserved in (VIRTUAL_SOURCE_ID, VIRTUAL_SINK_ID):
        if reserved in graph.node_index:
            raise GraphFormatError(f"node id {reserved!r} is reserved")

    sentinel = int(graph.edge_capacity[~graph.edge_is_virtual].sum()) + 1
    sx = float(np.mean([graph.node_xy[graph.node_index[s], 0] for s in sources]))
    sy = float(np.mean([graph.node_xy[graph.node_index[s], 1] for s in sources]))
    tx = float(np.mean([graph.node_xy[graph.node_index[t], 0] for t in sinks]))
    ty = float(np.mean([graph.node_xy[graph.node_index[t], 1] for t in sinks]))

    nodes = list(graph.nodes) + [
        NodeRecord(VIRTUAL_SOURCE_ID, sx, sy),
        NodeRecord(VIRTUAL_SINK_ID, tx, ty),
    ]
    edges = list(graph.edges)
    for nid in sources:
        edges.append(
            EdgeRecord(f"virtual-src-{nid}", VIRTUAL_SOURCE_ID, nid, 0.0, sentinel, True)
        )
    for nid in sinks:
        edges.append(
            EdgeRecord(f"virtual-snk-{nid}", nid, VIRTUAL_SINK_ID, 0.0, sentinel, True)
        )
    base_faces = graph.faces
    out = PlanarRoadGraph(
        nodes, edges, VIRTUAL_SOURCE_ID, VIRTUAL_SINK_ID, faces=base_faces
    )
    return out


def load_graph(document: str | bytes | dict) -> PlanarRoadGraph:
    """Parse and validate a graph document.

    The document is a JSON object with ``nodes`` ({id, x, y}), ``edges``
    ({id, u, v, length, capacity}), ``sources``, and ``sinks``.  Unknown
    fields are ignored with a warning.  When either terminal list has more
    than one entry the loaded graph is terminal-augmented; with exactly one
    source and one sink those nodes are used directly.

    Args:
        document: JSON text, bytes, or an already-parsed mapping.

    Returns:
        A validated PlanarRoadGraph.

    Raises:
        GraphFormatError: on parse errors or invariant violations.
        PlanarityError: when two edges cross (names both edge ids).
        DisconnectedGraphError: when any node is unreachable.
    """
    if isinstance(document, (str, bytes)):
        try:
            data = json.loads(document)
        except json.JSONDecodeError as exc:
            raise GraphFormatError(f"graph document is not valid JSON: {exc}") from exc
    else:
        data = document
    if not isinstance(data, dict):
        raise GraphFormatError("graph document must be a JSON object")

    for key in data:
        if key not in _TOP_FIELDS:
            warnings.warn(f"ignoring unknown graph field {key!r}", stacklevel=2)
    for req in ("nodes", "edges", "sources", "sinks"):
        if req not in data:
            raise GraphFormatError(f"graph document missing {req!r}")

    nodes = []
    for raw in data["nodes"]:
        if not isinstance(raw, dict):
            raise GraphFormatError(f"node entry {raw!r} must be an object")
        for key in raw:
            if key not in _NODE_FIELDS:
                warnings.warn(
                    f"ignoring unknown node field {key!r}", stacklevel=2
                )
        try:
            nodes.append(NodeRecord(raw["id"], float(raw["x"]), float(raw["y"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise GraphFormatError(f"bad node entry {raw!r}: {exc}") from exc

    edges = []
    for raw in data["edges"]:
        if not isinstance(raw, dict):
            raise GraphFormatError(f"edge entry {raw!r} must be an object")
        for key in raw:
            if key not in _EDGE_FIELDS:
                warnings.warn(
                    f"ignoring unknown edge field {key!r}", stacklevel=2
                )
        try:
            cap = raw["capacity"]
            if isinstance(cap, float):
                if not cap.is_integer():
                    raise GraphFormatError(
                        f"edge {raw.get('id')!r} capacity must be an integer"
                    )
                cap = int(cap)
            edges.append(
                EdgeRecord(raw["id"], raw["u"], raw["v"], float(raw["length"]), cap)
            )
        except GraphFormatError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise GraphFormatError(f"bad edge entry {raw!r}: {exc}") from exc

    sources = list(data["sources"])
    sinks = list(data["sinks"])
    if not sources or not sinks:
        raise GraphFormatError("sources and sinks must be nonempty")
    if len(set(sources)) != len(sources) or len(set(sinks)) != len(sinks):
        raise GraphFormatError("duplicate entries in sources or sinks")
    if set(sources) & set(sinks):
        raise GraphFormatError("sources and sinks must be disjoint")

    if len(sources) == 1 and len(sinks) == 1:
        return PlanarRoadGraph(nodes, edges, sources[0], sinks[0])
    base = PlanarRoadGraph(nodes, edges, sources[0], sinks[0])
    return augment_terminals(base, sources, sinks)


def load_graph_path(path) -> PlanarRoadGraph:
    """Read a graph document from a file path and load it."""
    with open(path, "r", encoding="utf-8") as fh:
        return load_graph(fh.read())
