"""Brute-force ground truth for the flow chain on small instances.

Enumerates every integer max flow (as a multiset of unit paths), builds
the exact one-step transition matrix of the rerouting chain, and derives
its exact stationary distribution.  Used to verify detailed balance,
stationarity, irreducibility, and empirical convergence.

The stationary weight of a state multiset m is R(m) * lambda^|m|, where
R(m) counts the distinct orderings of m's paths (value! divided by the
factorials of duplicate multiplicities).  Uniform index choice makes every
ordering of a state equally likely, so states with repeated paths are
proposed-into proportionally less often; R(m) accounts for that exactly.
For states whose paths are pairwise distinct (always the case under unit
capacities) R is constant and the weight reduces to plain lambda^|m|.
Weights are shift-normalized by the minimum total length so meter-scale
instances cannot underflow.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .chain import (
    ChainParams,
    FlowState,
    UnitPath,
    make_rng,
    make_state,
    reroute,
    state_key,
    step,
)
from .errors import PlanarflowError, StateCapExceededError
from .graph import PlanarRoadGraph
from .maxflow import decompose, max_flow

DEFAULT_STATE_CAP = 100_000


@dataclass
class StateSpace:
    """All integer max flows of a graph, canonically ordered.

    Attributes:
        graph: the owning graph.
        states: every FlowState, paths sorted within each state.
        index: canonical state key -> position in ``states``.
        mf: the max flow value.
    """

    graph: PlanarRoadGraph
    states: tuple[FlowState, ...]
    index: dict[tuple, int]
    mf: int
    _proposals: list[dict[int, int]] | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.states)

    def lengths(self) -> np.ndarray:
        """Total length of each state, aligned with ``states``."""
        return np.array([s.total_length for s in self.states], dtype=np.float64)


@dataclass
class ExactDistribution:
    """Exact stationary distribution and transition matrix at one lambda.

    Attributes:
        space: the enumerated state space.
        lambda_: the length-preference parameter.
        pi: stationary probabilities, aligned with the space.
        Z: normalizing constant of the shift-normalized weights.
        P: row-stochastic transition matrix (CSR).
    """

    space: StateSpace
    lambda_: float
    pi: np.ndarray
    Z: float
    P: sp.csr_matrix


def all_simple_paths(
    graph: PlanarRoadGraph, cap: int = DEFAULT_STATE_CAP
) -> list[UnitPath]:
    """Every simple source-to-sink path, sorted by node sequence.

    Raises:
        StateCapExceededError: when more than ``cap`` paths exist.
    """
    paths: list[tuple[int, ...]] = []
    target = graph.t_idx
    on_path = [False] * graph.n_nodes
    seq: list[int] = [graph.s_idx]
    on_path[graph.s_idx] = True

    def visit(u: int) -> None:
        if u == target:
            paths.append(tuple(seq))
            if len(paths) > cap:
                raise StateCapExceededError(cap, len(paths), "paths")
            return
        for v, _e in graph.adjacency[u]:
            if not on_path[v]:
                on_path[v] = True
                seq.append(v)
                visit(v)
                seq.pop()
                on_path[v] = False

    visit(graph.s_idx)
    paths.sort()
    out = []
    for nodes in paths:
        edges = tuple(
            graph.edge_between(a, b) for a, b in zip(nodes, nodes[1:])
        )
        length = float(sum(graph.edge_length[e] for e in edges))
        out.append(UnitPath(nodes, edges, length, frozenset(edges)))
    return out


def enumerate_states(
    graph: PlanarRoadGraph, cap: int = DEFAULT_STATE_CAP
) -> StateSpace:
    """Exhaustively enumerate every integer max flow of the graph.

    Searches multisets of simple paths in non-decreasing canonical order
    with incremental capacity pruning, so each state is produced exactly
    once.

    Args:
        graph: small validated graph.
        cap: refuse (with the partial count) beyond this many states.

    Raises:
        StateCapExceededError: when the cap is exceeded.
    """
    mf = max_flow(graph).value
    if mf == 0:
        raise PlanarflowError("graph has max flow 0; no states to enumerate")
    paths = all_simple_paths(graph, cap)
    capacity = graph.edge_capacity
    usage: dict[int, int] = {}
    chosen: list[UnitPath] = []
    found: list[tuple[UnitPath, ...]] = []

    def fits(p: UnitPath) -> bool:
        return all(usage.get(e, 0) < capacity[e] for e in p.edges)

    def visit(start: int) -> None:
        if len(chosen) == mf:
            found.append(tuple(chosen))
            if len(found) > cap:
                raise StateCapExceededError(cap, len(found))
            return
        for i in range(start, len(paths)):
            p = paths[i]
            if fits(p):
                for e in p.edges:
                    usage[e] = usage.get(e, 0) + 1
                chosen.append(p)
                visit(i)
                chosen.pop()
                for e in p.edges:
                    usage[e] -= 1

    visit(0)
    states = tuple(make_state(graph, combo) for combo in found)
    index = {state_key(s): i for i, s in enumerate(states)}
    if len(index) != len(states):
        raise AssertionError("state enumeration produced a duplicate")
    return StateSpace(graph, states, index, mf)


def enumerate_states_bruteforce(
    graph: PlanarRoadGraph,
    cap: int = DEFAULT_STATE_CAP,
    combo_budget: int = 2_000_000,
) -> set[tuple]:
    """Independent recount of the state space, as canonical keys.

    Uses a different path discovery (backward search, reversed neighbor
    order) and no pruning: every multiset of paths is generated and tested
    in full.  Exists to cross-check enumerate_states.
    """
    target = graph.s_idx
    on_path = [False] * graph.n_nodes
    seq: list[int] = [graph.t_idx]
    on_path[graph.t_idx] = True
    raw: list[tuple[int, ...]] = []

    def visit(u: int) -> None:
        if u == target:
            raw.append(tuple(reversed(seq)))
            if len(raw) > cap:
                raise StateCapExceededError(cap, len(raw), "paths")
            return
        for v, _e in reversed(graph.adjacency[u]):
            if not on_path[v]:
                on_path[v] = True
                seq.append(v)
                visit(v)
                seq.pop()
                on_path[v] = False

    visit(graph.t_idx)
    mf = max_flow(graph, "shortest-length").value
    n_combos = math.comb(len(raw) + mf - 1, mf)
    if n_combos > combo_budget:
        raise StateCapExceededError(combo_budget, n_combos, "combinations")

    edge_lists = []
    for nodes in raw:
        edge_lists.append(
            tuple(graph.edge_between(a, b) for a, b in zip(nodes, nodes[1:]))
        )
    capacity = graph.edge_capacity
    keys: set[tuple] = set()
    for combo in itertools.combinations_with_replacement(range(len(raw)), mf):
        usage: dict[int, int] = {}
        ok = True
        for i in combo:
            for e in edge_lists[i]:
                c = usage.get(e, 0) + 1
                if c > capacity[e]:
                    ok = False
                    break
                usage[e] = c
            if not ok:
                break
        if ok:
            keys.add(tuple(sorted(raw[i] for i in combo)))
            if len(keys) > cap:
                raise StateCapExceededError(cap, len(keys))
    return keys


def _proposal_counts(space: StateSpace) -> list[dict[int, int]]:
    # counts[x][y] = number of (face, path-index) pairs proposing y from x
    if space._proposals is not None:
        return space._proposals
    graph = space.graph
    capacity = graph.edge_capacity
    counts: list[dict[int, int]] = []
    for xi, st in enumerate(space.states):
        row: dict[int, int] = {}
        for face in graph.faces:
            for i, path in enumerate(st.paths):
                cand = reroute(path, face, st)
                if cand is None:
                    continue
                feasible = True
                for e in cand.edge_set - path.edge_set:
                    if st.edge_usage.get(e, 0) + 1 > capacity[e]:
                        feasible = False
                        break
                if not feasible:
                    continue
                new_paths = sorted(
                    st.paths[:i] + (cand,) + st.paths[i + 1:],
                    key=lambda p: p.nodes,
                )
                key = tuple(p.nodes for p in new_paths)
                yi = space.index.get(key)
                if yi is None:
                    raise AssertionError(
                        "reroute produced a state outside the enumerated space"
                    )
                if yi == xi:
                    raise AssertionError("reroute returned the very state it left")
                row[yi] = row.get(yi, 0) + 1
        counts.append(row)
    space._proposals = counts
    return counts


def _ordering_counts(space: StateSpace) -> np.ndarray:
    # distinct orderings of each state's path multiset
    out = np.empty(len(space.states), dtype=np.float64)
    for i, st in enumerate(space.states):
        r = math.factorial(len(st.paths))
        for _, group in itertools.groupby(sorted(p.nodes for p in st.paths)):
            r //= math.factorial(sum(1 for _ in group))
        out[i] = float(r)
    return out


def exact_stationary(space: StateSpace, lambda_: float) -> tuple[np.ndarray, float]:
    """Exact stationary probabilities and normalizing constant."""
    lengths = space.lengths()
    shift = lengths.min()
    w = _ordering_counts(space) * np.power(lambda_, lengths - shift)
    Z = float(w.sum())
    return w / Z, Z


def exact_transition_matrix(space: StateSpace, lambda_: float) -> ExactDistribution:
    """Build the exact transition matrix and stationary law at one lambda.

    Off-diagonal entries are (1/2) * (1/F) * (1/mf) * N(x,y) * min{1,
    lambda^(|y|-|x|)} with N the proposal count; each diagonal absorbs the
    remaining probability.
    """
    graph = space.graph
    counts = _proposal_counts(space)
    lengths = space.lengths()
    F = len(graph.faces)
    base = 0.5 / (F * space.mf)
    n = len(space.states)
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    log_lam = math.log(lambda_)
    for xi, row in enumerate(counts):
        acc = 0.0
        for yi, cnt in row.items():
            accept = math.exp(min(0.0, (lengths[yi] - lengths[xi]) * log_lam))
            p = base * cnt * accept
            rows.append(xi)
            cols.append(yi)
            vals.append(p)
            acc += p
        rows.append(xi)
        cols.append(xi)
        vals.append(1.0 - acc)
    P = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    pi, Z = exact_stationary(space, lambda_)
    return ExactDistribution(space, lambda_, pi, Z, P)


def detailed_balance_residual(dist: ExactDistribution) -> float:
    """Max |pi(x)P(x,y) - pi(y)P(y,x)| over all state pairs."""
    flux = sp.diags(dist.pi) @ dist.P
    gap = (flux - flux.T).tocoo()
    return float(np.abs(gap.data).max()) if gap.nnz else 0.0


def stationarity_residual(dist: ExactDistribution) -> float:
    """Max-norm of pi P - pi."""
    return float(np.abs(dist.pi @ dist.P - dist.pi).max())


def check_irreducible(space: StateSpace):
    """Test strong connectivity of the transition graph over the space.

    Returns:
        (True, None) when every state reaches every other; otherwise
        (False, (state_a, state_b)) with a mutually unreachable pair.
    """
    n = len(space.states)
    if n == 1:
        return True, None
    counts = _proposal_counts(space)
    rows, cols = [], []
    for xi, row in enumerate(counts):
        for yi in row:
            rows.append(xi)
            cols.append(yi)
    support = sp.csr_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(n, n)
    )
    n_comp, labels = connected_components(support, directed=True, connection="strong")
    if n_comp == 1:
        return True, None
    a = int(np.argmax(labels == labels.min()))
    first_other = int(np.argmax(labels != labels[a]))
    return False, (space.states[a], space.states[first_other])


def tv_distance(empirical, dist: ExactDistribution) -> float:
    """Total variation between an empirical histogram and the exact law.

    Args:
        empirical: visit counts (or probabilities) aligned with the space.
        dist: exact distribution for the same space.

    Returns:
        Half the L1 distance, in [0, 1].
    """
    emp = np.asarray(empirical, dtype=np.float64)
    if emp.shape != dist.pi.shape:
        raise PlanarflowError(
            f"histogram has {emp.shape} entries, state space has {dist.pi.shape}"
        )
    total = emp.sum()
    if total <= 0:
        raise PlanarflowError("empirical histogram is empty")
    return float(0.5 * np.abs(emp / total - dist.pi).sum())


def simulate_histogram(
    dist: ExactDistribution,
    steps: int,
    seed: int,
    burn_in: int = 0,
    checkpoints: tuple[int, ...] = (),
):
    """Run the real chain and histogram its visits over the space.

    Starts from the decomposed breadth-first max flow, discards ``burn_in``
    steps, then counts each visited state for ``steps`` steps.

    Args:
        dist: exact distribution (fixes graph and lambda).
        steps: number of counted steps.
        seed: chain seed.
        burn_in: steps discarded before counting.
        checkpoints: counted-step indices at which to record TV distance.

    Returns:
        (counts, trajectory): visit counts aligned with the space and a
        list of (step, tv) pairs for each checkpoint.
    """
    space = dist.space
    graph = space.graph
    params = ChainParams(lambda_=dist.lambda_, rng_seed=seed)
    rng = make_rng(params)
    state = decompose(max_flow(graph))
    idx = space.index.get(state_key(state))
    if idx is None:
        raise AssertionError("initial state missing from the enumerated space")
    counts = np.zeros(len(space.states), dtype=np.int64)
    for _ in range(burn_in):
        state = step(state, params, rng)
    marks = sorted(set(checkpoints))
    trajectory = []
    mark_pos = 0
    cur = idx
    for k in range(1, steps + 1):
        nxt = step(state, params, rng)
        if nxt is not state:
            cur = space.index[state_key(nxt)]
            state = nxt
        counts[cur] += 1
        if mark_pos < len(marks) and k == marks[mark_pos]:
            trajectory.append((k, tv_distance(counts, dist)))
            mark_pos += 1
    return counts, trajectory
