"""One transition of the flow-rerouting Markov chain.

A state is an ordered multiset of unit-flow source-to-sink paths whose
superposition is an integer maximum flow.  A step flips a lazy coin, picks
a face and a path index uniformly, tries to reroute the path's segment
shared with the face along the face's complementary arc, and accepts the
candidate with the Metropolis probability min{1, lambda^(new - old total
length)} evaluated in log space.  Every failure mode is a self-loop, so
each call keeps at least probability 1/2 of returning the state unchanged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import GraphFormatError, PlanarflowError
from .graph import FaceRecord, PlanarRoadGraph


@dataclass(frozen=True)
class UnitPath:
    """A simple source-to-sink path carrying one unit of flow.

    Node and edge entries are internal indices into the owning graph's
    ``nodes``/``edges`` tuples; use FlowState helpers to render external
    ids.  ``length`` is the sum of member edge lengths in meters.
    """

    nodes: tuple[int, ...]
    edges: tuple[int, ...]
    length: float
    edge_set: frozenset[int]


@dataclass(frozen=True)
class FlowState:
    """An integer max flow as an ordered multiset of unit paths.

    Attributes:
        graph: the owning graph.
        paths: the unit paths; their count is the flow value.
        edge_usage: internal edge index -> number of paths using it
            (nonzero entries only).
        total_length: sum of path lengths in meters.
    """

    graph: PlanarRoadGraph
    paths: tuple[UnitPath, ...]
    edge_usage: dict[int, int]
    total_length: float

    @property
    def value(self) -> int:
        return len(self.paths)

    def path_node_ids(self, i: int) -> tuple:
        """External node ids of path i."""
        return tuple(self.graph.nodes[n].id for n in self.paths[i].nodes)

    def usage_by_edge_id(self, include_virtual: bool = False) -> dict:
        """External edge id -> usage count."""
        out = {}
        for e, c in self.edge_usage.items():
            if not include_virtual and e in self.graph.virtual_edge_idx:
                continue
            out[self.graph.edges[e].id] = c
        return out

    def used_real_edges(self) -> frozenset[int]:
        """Internal indices of non-virtual edges with usage >= 1."""
        return frozenset(
            e for e in self.edge_usage if e not in self.graph.virtual_edge_idx
        )


@dataclass(frozen=True)
class ChainParams:
    """Chain hyperparameters: length preference and RNG seed."""

    lambda_: float
    rng_seed: int = 0

    def __post_init__(self):
        if not (self.lambda_ > 0.0 and math.isfinite(self.lambda_)):
            raise PlanarflowError("lambda must be positive and finite")

    @cached_property
    def log_lambda(self) -> float:
        return math.log(self.lambda_)


def make_rng(params: ChainParams) -> np.random.Generator:
    """Fresh generator seeded from the params."""
    return np.random.default_rng(params.rng_seed)


def path_from_node_ids(graph: PlanarRoadGraph, node_ids) -> UnitPath:
    """Build a UnitPath from a sequence of external node ids.

    Raises:
        GraphFormatError: on unknown ids, missing edges, or repeats.
    """
    try:
        idx = tuple(graph.node_index[n] for n in node_ids)
    except KeyError as exc:
        raise GraphFormatError(f"unknown node id {exc.args[0]!r} in path") from exc
    return path_from_indices(graph, idx)


def path_from_indices(graph: PlanarRoadGraph, node_idx) -> UnitPath:
    """Build a UnitPath from internal node indices, validating adjacency."""
    nodes = tuple(node_idx)
    if len(nodes) < 2:
        raise GraphFormatError("path needs at least two nodes")
    if len(set(nodes)) != len(nodes):
        raise GraphFormatError("path repeats a node")
    edges = []
    for a, b in zip(nodes, nodes[1:]):
        e = graph.edge_between(a, b)
        if e is None:
            raise GraphFormatError(
                f"no edge between {graph.nodes[a].id!r} and {graph.nodes[b].id!r}"
            )
        edges.append(e)
    length = float(sum(graph.edge_length[e] for e in edges))
    return UnitPath(nodes, tuple(edges), length, frozenset(edges))


def make_state(graph: PlanarRoadGraph, paths) -> FlowState:
    """Assemble and validate a FlowState from unit paths.

    Checks that every path runs from the graph's source to its sink, is
    simple, and that superimposed usage respects every capacity.
    """
    paths = tuple(paths)
    if not paths:
        raise PlanarflowError("a flow state needs at least one path")
    usage: dict[int, int] = {}
    for p in paths:
        if p.nodes[0] != graph.s_idx or p.nodes[-1] != graph.t_idx:
            raise PlanarflowError("path does not run from source to sink")
        if len(set(p.nodes)) != len(p.nodes):
            raise PlanarflowError("path repeats a node")
        for e in p.edges:
            usage[e] = usage.get(e, 0) + 1
    for e, c in usage.items():
        if c > graph.edge_capacity[e]:
            raise PlanarflowError(
                f"edge {graph.edges[e].id!r} usage {c} exceeds capacity "
                f"{int(graph.edge_capacity[e])}"
            )
    total = float(sum(p.length for p in paths))
    return FlowState(graph, paths, usage, total)


def state_key(state: FlowState) -> tuple:
    """Canonical multiset key: sorted tuple of path node sequences."""
    return tuple(sorted(p.nodes for p in state.paths))


def usage_key(state: FlowState) -> tuple:
    """Canonical key of the non-virtual edge usage map."""
    items = [
        (e, c) for e, c in state.edge_usage.items()
        if e not in state.graph.virtual_edge_idx
    ]
    return tuple(sorted(items))


def acceptance_log_ratio(x_len: float, y_len: float, lambda_: float) -> float:
    """Log of the Metropolis acceptance probability min{1, lambda^(y-x)}.

    Computed as min(0, (y_len - x_len) * ln(lambda)) so meter-scale
    lengths never underflow.
    """
    return min(0.0, (y_len - x_len) * math.log(lambda_))


def _occurrences(walk: tuple, seq: tuple) -> list[int]:
    # cyclic occurrences of dart sequence seq within walk
    n, L = len(walk), len(seq)
    if L > n:
        return []
    first = seq[0]
    out = []
    for start in range(n):
        if walk[start] != first:
            continue
        if all(walk[(start + j) % n] == seq[j] for j in range(1, L)):
            out.append(start)
    return out


def reroute(path: UnitPath, face: FaceRecord, state: FlowState) -> UnitPath | None:
    """Replace the path segment shared with a face by the face's other arc.

    Defined only when the shared edges form one contiguous segment of the
    path, that segment matches exactly one contiguous stretch of the face's
    boundary walk (in either direction), the complementary arc is likewise
    unambiguous, and the spliced result is a simple path.  The uniqueness
    conditions make the move an involution: rerouting the result along the
    same face restores the input, which the reversibility of the chain
    depends on.  Returns None when undefined; capacity is checked by the
    caller.
    """
    g = state.graph
    shared = path.edge_set & face.edge_index_set
    if not shared:
        return None
    pos = [i for i, e in enumerate(path.edges) if e in shared]
    if pos[-1] - pos[0] + 1 != len(pos):
        return None  # shared edges split into two or more path segments
    a = pos[0]
    L = len(pos)
    seg = tuple((path.nodes[i], path.nodes[i + 1]) for i in range(a, a + L))

    walk = face.darts
    n = len(walk)
    rev_seg = tuple((v, u) for (u, v) in reversed(seg))
    occ_f = _occurrences(walk, seg)
    occ_r = _occurrences(walk, rev_seg)
    if len(occ_f) + len(occ_r) != 1:
        return None  # absent or ambiguous along the boundary (e.g. bridges)

    if occ_f:
        start = occ_f[0]
        comp = tuple(walk[(start + L + j) % n] for j in range(n - L))
        # comp runs segment-end -> segment-start; flip it
        middle = tuple((v, u) for (u, v) in reversed(comp))
    else:
        start = occ_r[0]
        middle = tuple(walk[(start + L + j) % n] for j in range(n - L))

    comp_rev = tuple((v, u) for (u, v) in reversed(middle))
    # the complementary arc must be unambiguous too, or the reverse move
    # would not find this segment
    if len(_occurrences(walk, middle)) + len(_occurrences(walk, comp_rev)) != 1:
        return None

    mid_nodes = (middle[0][0],) + tuple(v for (_, v) in middle)
    new_nodes = path.nodes[:a] + mid_nodes + path.nodes[a + L + 1:]
    if len(set(new_nodes)) != len(new_nodes):
        return None  # rerouted walk revisits a node

    new_edges = tuple(
        g.edge_between(u, v) for u, v in zip(new_nodes, new_nodes[1:])
    )
    length = float(sum(g.edge_length[e] for e in new_edges))
    return UnitPath(new_nodes, new_edges, length, frozenset(new_edges))


def step(
    state: FlowState,
    params: ChainParams,
    rng: np.random.Generator,
) -> FlowState:
    """Advance the chain by one transition.

    Draw order on the generator: a lazy bit; then, if active, a face index
    and a path index; then one uniform variate only when the candidate is
    strictly downhill.  Any undefined or capacity-violating proposal and
    any rejected candidate return the input state object unchanged, so the
    self-loop probability is at least 1/2 per call.

    Args:
        state: current flow state.
        params: lambda and seed bundle (the seed is not consulted here).
        rng: the chain's random stream.

    Returns:
        The next state; identical object on a self-loop.
    """
    if int(rng.integers(0, 2)) == 0:
        return state
    g = state.graph
    faces = g.faces
    face = faces[int(rng.integers(0, len(faces)))]
    p_idx = int(rng.integers(0, len(state.paths)))
    path = state.paths[p_idx]

    if not (path.edge_set & face.edge_index_set):
        return state
    candidate = reroute(path, face, state)
    if candidate is None:
        return state

    usage = state.edge_usage
    cap = g.edge_capacity
    for e in candidate.edge_set - path.edge_set:
        if usage.get(e, 0) + 1 > cap[e]:
            return state

    new_total = state.total_length - path.length + candidate.length
    log_ratio = min(0.0, (new_total - state.total_length) * params.log_lambda)
    if log_ratio < 0.0 and math.log(rng.random()) >= log_ratio:
        return state

    new_usage = dict(usage)
    for e in path.edges:
        c = new_usage[e] - 1
        if c:
            new_usage[e] = c
        else:
            del new_usage[e]
    for e in candidate.edges:
        new_usage[e] = new_usage.get(e, 0) + 1
    new_paths = state.paths[:p_idx] + (candidate,) + state.paths[p_idx + 1:]
    total = float(sum(p.length for p in new_paths))
    return FlowState(g, new_paths, new_usage, total)
