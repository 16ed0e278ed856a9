"""Diverse max-flow sampling: burn-in, periodic draws, pairwise-overlap filtering.

The sampler wraps one rerouting chain.  It burns in for a configured number of
iterations, then inspects the current state at a fixed frequency and keeps it
when it shares at most ``k`` edges with every solution kept so far.  Two exit
modes are supported: a fixed number of sampling iterations, or run until a
target number of solutions has been collected (bounded by a hard iteration
ceiling so unreachable targets cannot loop forever).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterator

from .chain import ChainParams, FlowState, make_rng, step, usage_key
from .errors import GraphMismatchError
from .graph import PlanarRoadGraph
from .maxflow import decompose, max_flow

__all__ = [
    "SamplerConfig",
    "SolutionSet",
    "common_edges",
    "is_koptimal",
    "sample_koptimal",
]

#: Default ceiling on total chain iterations for the target-count exit mode.
DEFAULT_MAX_TOTAL_ITER = 10_000_000


@dataclass(frozen=True)
class SamplerConfig:
    """Parameters for one sampling run.

    Attributes:
        lambda_: Geometric length-bias parameter of the chain; must be > 0.
        k: Maximum number of shared edges allowed between any two kept
            solutions; must be >= 0.
        mix_iter: Chain iterations to discard before sampling begins.
        num_iter: Sampling iterations after burn-in (fixed-iterations exit).
            Mutually exclusive with ``target_solutions``.
        sf: Sampling frequency; the state is inspected every ``sf``-th
            post-burn-in iteration.  Must be >= 1.
        target_solutions: Stop once this many solutions are kept
            (target-solution-count exit).  Mutually exclusive with
            ``num_iter``.
        seed: 64-bit seed making the run reproducible.
        max_total_iter: Hard ceiling on total chain iterations, so the
            target-count mode terminates even when the target is unreachable.
    """

    lambda_: float
    k: int
    mix_iter: int
    sf: int
    num_iter: int | None = None
    target_solutions: int | None = None
    seed: int = 0
    max_total_iter: int = DEFAULT_MAX_TOTAL_ITER

    def __post_init__(self) -> None:
        if not self.lambda_ > 0.0:
            raise ValueError(f"lambda must be positive, got {self.lambda_}")
        if self.k < 0:
            raise ValueError(f"k must be non-negative, got {self.k}")
        if self.mix_iter < 0:
            raise ValueError(f"mix_iter must be non-negative, got {self.mix_iter}")
        if self.sf < 1:
            raise ValueError(f"sf must be at least 1, got {self.sf}")
        fixed = self.num_iter is not None
        target = self.target_solutions is not None
        if fixed == target:
            raise ValueError(
                "exactly one exit condition must be set: "
                "either num_iter or target_solutions"
            )
        if fixed and self.num_iter < 0:
            raise ValueError(f"num_iter must be non-negative, got {self.num_iter}")
        if target and self.target_solutions < 1:
            raise ValueError(
                f"target_solutions must be positive, got {self.target_solutions}"
            )
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must fit in 64 bits, got {self.seed}")
        if self.max_total_iter < 1:
            raise ValueError(
                f"max_total_iter must be positive, got {self.max_total_iter}"
            )


@dataclass(frozen=True)
class SolutionSet:
    """Ordered collection of pairwise-diverse integer max flows.

    Attributes:
        graph: The graph all solutions live on.
        states: Kept flow states, in the order they were accepted.
        iterations: Chain iteration index at which each state was kept.
        seed: Seed of the run that produced the set.
        config: Echo of the sampler configuration, when produced by
            :func:`sample_koptimal` (None for hand-built sets).
    """

    graph: PlanarRoadGraph
    states: tuple[FlowState, ...]
    iterations: tuple[int, ...]
    seed: int = 0
    config: SamplerConfig | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if len(self.states) != len(self.iterations):
            raise ValueError("states and iterations must have equal length")
        for st in self.states:
            if st.graph is not self.graph:
                raise GraphMismatchError(
                    "solution set contains a state from a different graph"
                )

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self) -> Iterator[FlowState]:
        return iter(self.states)


def common_edges(x: FlowState, y: FlowState) -> int:
    """Count non-virtual edges carrying flow in both states.

    Args:
        x: First flow state.
        y: Second flow state on the same graph.

    Returns:
        Size of the intersection of the two states' used real edge sets.
        Multiplicity is ignored: an edge used twice on both sides counts once.

    Raises:
        GraphMismatchError: If the states belong to different graphs.
    """
    if x.graph is not y.graph:
        raise GraphMismatchError("states belong to different graphs")
    return len(x.used_real_edges() & y.used_real_edges())


def is_koptimal(candidate: FlowState, solutions: SolutionSet, k: int) -> bool:
    """Check whether a candidate keeps the set pairwise within ``k`` overlaps.

    Args:
        candidate: Flow state under consideration.
        solutions: Already-kept solutions.
        k: Maximum allowed shared-edge count against every member.

    Returns:
        True iff ``common_edges(candidate, y) <= k`` for every member ``y``.
        An empty set vacuously accepts any candidate.
    """
    return all(common_edges(candidate, y) <= k for y in solutions)


def sample_koptimal(graph: PlanarRoadGraph, config: SamplerConfig) -> SolutionSet:
    """Sample a set of pairwise-diverse integer max flows.

    Starts the chain from the augmenting-path max flow, burns in for
    ``config.mix_iter`` iterations, then every ``config.sf``-th iteration
    keeps the current state when it is not a duplicate of a kept solution
    (identical edge-usage map) and shares at most ``config.k`` edges with
    every kept solution.

    Args:
        graph: Planar road graph to sample on.
        config: Run parameters; see :class:`SamplerConfig`.

    Returns:
        The collected :class:`SolutionSet`.  May be empty (with a warning)
        when no state passes the filter within the iteration budget.
    """
    params = ChainParams(lambda_=config.lambda_, rng_seed=config.seed)
    rng = make_rng(params)
    state = decompose(max_flow(graph, strategy="breadth-first"))

    kept: list[FlowState] = []
    kept_iters: list[int] = []
    seen_usage: set[tuple] = set()

    if config.num_iter is not None:
        total_iter = config.mix_iter + config.num_iter
        target = None
    else:
        total_iter = config.max_total_iter
        target = config.target_solutions

    it = 0
    while it < total_iter:
        it += 1
        state = step(state, params, rng)
        if it <= config.mix_iter or (it - config.mix_iter) % config.sf != 0:
            continue
        key = usage_key(state)
        if key in seen_usage:
            continue
        candidate_ok = all(common_edges(state, y) <= config.k for y in kept)
        if not candidate_ok:
            continue
        kept.append(state)
        kept_iters.append(it)
        seen_usage.add(key)
        if target is not None and len(kept) >= target:
            break

    if target is not None and len(kept) < target:
        warnings.warn(
            f"iteration budget {total_iter} exhausted with {len(kept)} of "
            f"{target} requested solutions",
            stacklevel=2,
        )
    if not kept:
        warnings.warn("no state passed the diversity filter; returning an empty set",
                      stacklevel=2)
    return SolutionSet(
        graph=graph,
        states=tuple(kept),
        iterations=tuple(kept_iters),
        seed=config.seed,
        config=config,
    )
