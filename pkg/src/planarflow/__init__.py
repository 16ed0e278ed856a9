"""Diverse integer max-flow sampling on planar road networks.

The package computes integer maximum flows on undirected planar graphs,
walks a Metropolis-style rerouting chain over the space of unit-path
decompositions, filters the visited states into sets of pairwise-diverse
solutions, and quantifies how rotating through such a set spreads link
loading across the network.  A brute-force oracle verifies the chain's
exact stationary law on small instances.
"""

from __future__ import annotations

try:
    from importlib.metadata import PackageNotFoundError, version

    try:
        __version__ = version("planarflow")
    except PackageNotFoundError:
        __version__ = "0.1.0"
except ImportError:  # pragma: no cover
    __version__ = "0.1.0"

from .chain import (
    ChainParams,
    FlowState,
    UnitPath,
    acceptance_log_ratio,
    make_state,
    path_from_node_ids,
    reroute,
    state_key,
    step,
    usage_key,
)
from .errors import (
    DisconnectedGraphError,
    GraphFormatError,
    GraphMismatchError,
    PlanarflowError,
    PlanarityError,
    StateCapExceededError,
)
from .graph import (
    EdgeRecord,
    FaceRecord,
    NodeRecord,
    PlanarRoadGraph,
    augment_terminals,
    compute_faces,
    load_graph,
    load_graph_path,
)
from .maxflow import STRATEGIES, IntegerFlow, decompose, max_flow
from .metrics import (
    LoadingReport,
    edge_loading,
    loading_geojson,
    solution_length_stats,
)
from .oracle import (
    ExactDistribution,
    StateSpace,
    check_irreducible,
    detailed_balance_residual,
    enumerate_states,
    enumerate_states_bruteforce,
    exact_stationary,
    exact_transition_matrix,
    simulate_histogram,
    stationarity_residual,
    tv_distance,
)
from .sampler import (
    SamplerConfig,
    SolutionSet,
    common_edges,
    is_koptimal,
    sample_koptimal,
)
from .synth import grid_document, grid_graph, random_planar_document, random_planar_graph

__all__ = [
    "ChainParams",
    "DisconnectedGraphError",
    "EdgeRecord",
    "ExactDistribution",
    "FaceRecord",
    "FlowState",
    "GraphFormatError",
    "GraphMismatchError",
    "IntegerFlow",
    "LoadingReport",
    "NodeRecord",
    "PlanarRoadGraph",
    "PlanarflowError",
    "PlanarityError",
    "STRATEGIES",
    "SamplerConfig",
    "SolutionSet",
    "StateCapExceededError",
    "StateSpace",
    "UnitPath",
    "acceptance_log_ratio",
    "augment_terminals",
    "check_irreducible",
    "common_edges",
    "compute_faces",
    "decompose",
    "detailed_balance_residual",
    "edge_loading",
    "enumerate_states",
    "enumerate_states_bruteforce",
    "exact_stationary",
    "exact_transition_matrix",
    "grid_document",
    "grid_graph",
    "is_koptimal",
    "load_graph",
    "load_graph_path",
    "loading_geojson",
    "make_state",
    "max_flow",
    "path_from_node_ids",
    "random_planar_document",
    "random_planar_graph",
    "reroute",
    "sample_koptimal",
    "simulate_histogram",
    "solution_length_stats",
    "state_key",
    "stationarity_residual",
    "step",
    "tv_distance",
    "usage_key",
]
