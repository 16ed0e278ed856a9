"""Link-loading and length statistics for solution sets.

Rotating through a set of diverse flow solutions spreads traffic over more
roads than replaying one fixed solution.  The loading metric quantifies that:
every unit path of every solution deposits load equal to the edge's length on
each edge it traverses, loads are accumulated across the whole set, and the
mean load over loaded edges is normalized by the number of solutions.  Spread
sets touch more edges, so their normalized mean drops.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graph import PlanarRoadGraph
from .sampler import SolutionSet

__all__ = [
    "LoadingReport",
    "edge_loading",
    "loading_geojson",
    "solution_length_stats",
]


@dataclass(frozen=True)
class LoadingReport:
    """Accumulated per-edge load over a rotation of flow solutions.

    Attributes:
        per_edge_load: Map from real edge id to total deposited load
            (unit flows times meters, summed over all solutions).
        mean_load: Mean load over loaded edges.
        max_load: Largest single-edge load.
        loaded_edge_count: Number of edges with positive load.
        normalized_mean: ``mean_load`` divided by the number of solutions.
        avg_solution_length: Mean total length of a solution, in meters.
        n_solutions: Number of solutions the report aggregates.
    """

    per_edge_load: dict
    mean_load: float
    max_load: float
    loaded_edge_count: int
    normalized_mean: float
    avg_solution_length: float
    n_solutions: int

    def __post_init__(self) -> None:
        loaded = sum(1 for v in self.per_edge_load.values() if v > 0.0)
        if loaded != self.loaded_edge_count:
            raise ValueError(
                f"loaded_edge_count {self.loaded_edge_count} does not match "
                f"positive entries {loaded}"
            )


def edge_loading(solutions: SolutionSet) -> LoadingReport:
    """Accumulate length-weighted load over all solutions of a set.

    Args:
        solutions: Nonempty solution set on one graph.

    Returns:
        A :class:`LoadingReport`; virtual terminal edges are excluded.

    Raises:
        ValueError: If the set is empty.
    """
    if len(solutions) == 0:
        raise ValueError("cannot compute loading for an empty solution set")
    graph = solutions.graph
    load: dict = {}
    total_length = 0.0
    for state in solutions:
        for path in state.paths:
            for e in path.edges:
                if graph.edge_is_virtual[e]:
                    continue
                eid = graph.edges[e].id
                load[eid] = load.get(eid, 0.0) + float(graph.edge_length[e])
        total_length += sum(
            float(graph.edge_length[e])
            for p in state.paths
            for e in p.edges
            if not graph.edge_is_virtual[e]
        )
    n = len(solutions)
    loaded = len(load)
    mean_load = sum(load.values()) / loaded
    return LoadingReport(
        per_edge_load=load,
        mean_load=mean_load,
        max_load=max(load.values()),
        loaded_edge_count=loaded,
        normalized_mean=mean_load / n,
        avg_solution_length=total_length / n,
        n_solutions=n,
    )


def solution_length_stats(solutions: SolutionSet) -> tuple[float, float]:
    """Average per-path length and total length over a solution set.

    Args:
        solutions: Nonempty solution set.

    Returns:
        Pair ``(avg_path_length, total_length)`` in meters, where the average
        runs over every path of every solution and the total sums them all.
        Virtual terminal edges are excluded from path lengths.

    Raises:
        ValueError: If the set is empty.
    """
    if len(solutions) == 0:
        raise ValueError("cannot compute length stats for an empty solution set")
    graph = solutions.graph
    lengths = [
        sum(
            float(graph.edge_length[e])
            for e in p.edges
            if not graph.edge_is_virtual[e]
        )
        for state in solutions
        for p in state.paths
    ]
    total = sum(lengths)
    return total / len(lengths), total


def loading_geojson(graph: PlanarRoadGraph, report: LoadingReport) -> dict:
    """Render a loading report as a GeoJSON feature collection.

    Every real edge becomes a LineString feature carrying its id, length,
    capacity, and accumulated load, so standard GIS viewers can draw a heat
    layer without extra tooling.

    Args:
        graph: The graph the report was computed on.
        report: Loading report to export.

    Returns:
        A GeoJSON ``FeatureCollection`` dict.
    """
    features = []
    for e, rec in enumerate(graph.edges):
        if graph.edge_is_virtual[e]:
            continue
        u = graph.node_index[rec.u]
        v = graph.node_index[rec.v]
        features.append(
            {
                "type": "Feature",
                "geometry": {
                    "type": "LineString",
                    "coordinates": [
                        [float(graph.node_xy[u, 0]), float(graph.node_xy[u, 1])],
                        [float(graph.node_xy[v, 0]), float(graph.node_xy[v, 1])],
                    ],
                },
                "properties": {
                    "edge": rec.id,
                    "length": float(rec.length),
                    "capacity": int(rec.capacity),
                    "load": float(report.per_edge_load.get(rec.id, 0.0)),
                },
            }
        )
    return {"type": "FeatureCollection", "features": features}
