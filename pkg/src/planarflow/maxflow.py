"""Integer maximum flow on road graphs and its unit-path decomposition.

Undirected edges are handled as a signed net flow per edge: pushing along
u->v raises it, along v->u lowers it, and the two residual directions keep
one shared capacity budget.  Opposite pushes therefore cancel instead of
burning capacity in both directions.  Augmenting paths come from either a
breadth-first search (fewest edges) or a shortest-length search over the
residual graph.
"""
from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .chain import FlowState, UnitPath, make_state
from .errors import PlanarflowError
from .graph import PlanarRoadGraph, _id_sort_key

STRATEGIES = ("breadth-first", "shortest-length")


@dataclass(frozen=True)
class IntegerFlow:
    """An integer max flow as signed per-edge net values.

    Attributes:
        graph: the owning graph.
        net: per-edge signed flow, positive along the stored u->v
            orientation; abs(net) is the undirected usage.
        value: the flow value.
        strategy: augmenting strategy that produced it.
    """

    graph: PlanarRoadGraph
    net: np.ndarray
    value: int
    strategy: str

    def usage_by_edge_id(self) -> dict:
        """External edge id -> nonzero undirected usage."""
        return {
            self.graph.edges[e].id: int(abs(self.net[e]))
            for e in range(self.graph.n_edges)
            if self.net[e] != 0
        }


def _residual(graph: PlanarRoadGraph, net: np.ndarray, u: int, v: int, e: int) -> int:
    cap = int(graph.edge_capacity[e])
    if u == graph.edge_u_idx[e]:
        return cap - int(net[e])
    return cap + int(net[e])


def _push(graph: PlanarRoadGraph, net: np.ndarray, u: int, e: int, amount: int) -> None:
    if u == graph.edge_u_idx[e]:
        net[e] += amount
    else:
        net[e] -= amount


def _bfs_augment(graph: PlanarRoadGraph, net: np.ndarray):
    # fewest-edge residual path; adjacency is pre-sorted by edge id so the
    # first discovery is the deterministic winner
    parent_edge = [-1] * graph.n_nodes
    parent_node = [-1] * graph.n_nodes
    parent_edge[graph.s_idx] = -2
    queue = deque([graph.s_idx])
    while queue:
        u = queue.popleft()
        if u == graph.t_idx:
            break
        for v, e in graph.adjacency[u]:
            if parent_edge[v] == -1 and _residual(graph, net, u, v, e) > 0:
                parent_edge[v] = e
                parent_node[v] = u
                queue.append(v)
    if parent_edge[graph.t_idx] == -1:
        return None
    path = []
    v = graph.t_idx
    while v != graph.s_idx:
        path.append((parent_node[v], parent_edge[v]))
        v = parent_node[v]
    path.reverse()
    return path


def _dijkstra_augment(graph: PlanarRoadGraph, net: np.ndarray):
    # minimum-total-length residual path; ties resolved toward smaller edge
    # ids by a greedy walk over the distance labels
    INF = math.inf
    dist = [INF] * graph.n_nodes
    parent = [(-1, -1)] * graph.n_nodes
    dist[graph.t_idx] = 0.0
    counter = 0
    heap = [(0.0, counter, graph.t_idx)]
    while heap:
        d, _, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, e in graph.adjacency[u]:
            # arc v->u must have residual room, since we search backward
            if _residual(graph, net, v, u, e) <= 0:
                continue
            nd = d + float(graph.edge_length[e])
            if nd < dist[v]:
                dist[v] = nd
                parent[v] = (u, e)
                counter += 1
                heapq.heappush(heap, (nd, counter, v))
    if dist[graph.s_idx] == INF:
        return None

    path = []
    u = graph.s_idx
    visited = {u}
    ok = True
    while u != graph.t_idx:
        best = None
        for v, e in graph.adjacency[u]:
            if v in visited or _residual(graph, net, u, v, e) <= 0:
                continue
            if dist[v] == INF:
                continue
            slack = dist[u] - (float(graph.edge_length[e]) + dist[v])
            if abs(slack) <= 1e-9 * max(1.0, dist[u]):
                key = _id_sort_key(graph.edges[e].id)
                if best is None or key < best[0]:
                    best = (key, v, e)
        if best is None:
            ok = False
            break
        path.append((u, best[2]))
        u = best[1]
        visited.add(u)
    if ok:
        return path
    # float-equality dead end: fall back to the label parent chain
    path = []
    u = graph.s_idx
    while u != graph.t_idx:
        v, e = parent[u]
        path.append((u, e))
        u = v
    return path


def max_flow(graph: PlanarRoadGraph, strategy: str = "breadth-first") -> IntegerFlow:
    """Compute an integer maximum flow between the graph's terminals.

    Args:
        graph: validated road graph.
        strategy: "breadth-first" augments along fewest-edge residual
            paths; "shortest-length" along minimum-total-length ones.

    Returns:
        IntegerFlow whose value equals the min-cut capacity.
    """
    if strategy not in STRATEGIES:
        raise PlanarflowError(
            f"unknown strategy {strategy!r}; expected one of {STRATEGIES}"
        )
    find = _bfs_augment if strategy == "breadth-first" else _dijkstra_augment
    net = np.zeros(graph.n_edges, dtype=np.int64)
    value = 0
    while True:
        path = find(graph, net)
        if path is None:
            break
        bottleneck = min(
            _residual(graph, net, u, _other(graph, u, e), e) for u, e in path
        )
        for u, e in path:
            _push(graph, net, u, e, bottleneck)
        value += bottleneck
    return IntegerFlow(graph, net, value, strategy)


def _other(graph: PlanarRoadGraph, u: int, e: int) -> int:
    a, b = int(graph.edge_u_idx[e]), int(graph.edge_v_idx[e])
    return b if u == a else a


def decompose(flow: IntegerFlow) -> FlowState:
    """Split an integer max flow into unit source-to-sink paths.

    Repeatedly takes the fewest-edge path through the positive-net-flow
    digraph and subtracts one unit, yielding exactly ``value`` simple
    paths.  Leftover flow, if any, consists of circulations with no
    source-to-sink throughput and is discarded.

    Returns:
        A FlowState whose paths superimpose to the flow's usage (minus
        discarded circulations).
    """
    graph = flow.graph
    remaining: dict[tuple[int, int], int] = {}
    arc_edge: dict[tuple[int, int], int] = {}
    out_arcs: list[list[tuple[int, int]]] = [[] for _ in range(graph.n_nodes)]
    order = sorted(
        range(graph.n_edges), key=lambda e: _id_sort_key(graph.edges[e].id)
    )
    for e in order:
        f = int(flow.net[e])
        if f == 0:
            continue
        u, v = int(graph.edge_u_idx[e]), int(graph.edge_v_idx[e])
        if f < 0:
            u, v = v, u
            f = -f
        remaining[(u, v)] = f
        arc_edge[(u, v)] = e
        out_arcs[u].append((v, e))

    paths: list[UnitPath] = []
    for _ in range(flow.value):
        parent: dict[int, tuple[int, int]] = {graph.s_idx: (-1, -1)}
        queue = deque([graph.s_idx])
        while queue:
            u = queue.popleft()
            if u == graph.t_idx:
                break
            for v, e in out_arcs[u]:
                if v not in parent and remaining.get((u, v), 0) > 0:
                    parent[v] = (u, e)
                    queue.append(v)
        if graph.t_idx not in parent:
            raise PlanarflowError(
                "flow decomposition failed: missing source-to-sink throughput"
            )
        rev = []
        v = graph.t_idx
        while v != graph.s_idx:
            u, e = parent[v]
            rev.append((u, v, e))
            v = u
        rev.reverse()
        nodes = tuple(u for u, _, _ in rev) + (graph.t_idx,)
        edges = tuple(e for _, _, e in rev)
        for u, v, _ in rev:
            remaining[(u, v)] -= 1
        length = float(sum(graph.edge_length[e] for e in edges))
        paths.append(UnitPath(nodes, edges, length, frozenset(edges)))

    # anything left must be circulation only; a reachable sink here means
    # the claimed value was wrong
    parent_check: set[int] = {graph.s_idx}
    queue = deque([graph.s_idx])
    while queue:
        u = queue.popleft()
        for v, _e in out_arcs[u]:
            if v not in parent_check and remaining.get((u, v), 0) > 0:
                parent_check.add(v)
                queue.append(v)
    if graph.t_idx in parent_check:
        raise PlanarflowError(
            "flow decomposition failed: throughput left after value paths"
        )
    return make_state(graph, paths)
