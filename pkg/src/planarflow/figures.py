"""Matplotlib renderings: loading heatmaps, solution overlays, TV curves.

All figures render headlessly to files.  The heatmap mirrors the GeoJSON
export (edges colored by accumulated load); the overlay draws each solution's
used edges in its own color on a gray base map; the trajectory plot tracks
total-variation distance against chain steps.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.collections import LineCollection

from .graph import VIRTUAL_SINK_ID, VIRTUAL_SOURCE_ID, PlanarRoadGraph
from .metrics import LoadingReport
from .sampler import SolutionSet

__all__ = [
    "save_loading_heatmap",
    "save_solution_overlay",
    "save_tv_trajectory",
]


def _real_edge_segments(graph: PlanarRoadGraph) -> tuple[list, list]:
    """Line segments and edge indices for all non-virtual edges."""
    segments = []
    indices = []
    for e in range(graph.n_edges):
        if graph.edge_is_virtual[e]:
            continue
        u, v = graph.edge_u_idx[e], graph.edge_v_idx[e]
        segments.append([graph.node_xy[u], graph.node_xy[v]])
        indices.append(e)
    return segments, indices


def _terminal_markers(ax, graph: PlanarRoadGraph) -> None:
    """Mark source and sink (skipping off-map virtual terminals)."""
    for idx, label in ((graph.s_idx, "s"), (graph.t_idx, "t")):
        node_id = graph.nodes[idx].id
        if node_id in (VIRTUAL_SOURCE_ID, VIRTUAL_SINK_ID):
            continue
        x, y = graph.node_xy[idx]
        ax.plot([x], [y], marker="o", markersize=9, color="black", zorder=5)
        ax.annotate(
            label, (x, y), textcoords="offset points", xytext=(6, 6), fontsize=11
        )


def save_loading_heatmap(
    graph: PlanarRoadGraph, report: LoadingReport, path: str
) -> None:
    """Render per-edge load as a colored edge map and save it.

    Args:
        graph: Graph the report was computed on.
        report: Loading report supplying per-edge loads.
        path: Output image path (format from extension).
    """
    segments, indices = _real_edge_segments(graph)
    loads = np.array(
        [report.per_edge_load.get(graph.edges[e].id, 0.0) for e in indices]
    )
    fig, ax = plt.subplots(figsize=(7, 6))
    lc = LineCollection(segments, cmap="inferno", linewidths=3.0)
    lc.set_array(loads)
    ax.add_collection(lc)
    fig.colorbar(lc, ax=ax, label="accumulated load (flow x meters)")
    _terminal_markers(ax, graph)
    ax.autoscale()
    ax.set_aspect("equal")
    ax.set_title(
        f"link loading over {report.n_solutions} solution(s), "
        f"normalized mean {report.normalized_mean:.3g}"
    )
    ax.set_xticks([])
    ax.set_yticks([])
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_solution_overlay(
    graph: PlanarRoadGraph, solutions: SolutionSet, path: str
) -> None:
    """Draw every solution's used edges in its own color over the base map.

    Args:
        graph: Graph the solutions live on.
        solutions: Solution set to draw.
        path: Output image path.
    """
    segments, indices = _real_edge_segments(graph)
    fig, ax = plt.subplots(figsize=(7, 6))
    base = LineCollection(segments, colors="0.85", linewidths=1.0, zorder=1)
    ax.add_collection(base)
    cmap = plt.get_cmap("tab10")
    for j, state in enumerate(solutions):
        used = state.used_real_edges()
        segs = [
            [graph.node_xy[graph.edge_u_idx[e]], graph.node_xy[graph.edge_v_idx[e]]]
            for e in used
        ]
        lc = LineCollection(
            segs,
            colors=[cmap(j % 10)],
            linewidths=2.5,
            alpha=0.65,
            zorder=2 + j,
            label=f"solution {j + 1}",
        )
        ax.add_collection(lc)
    _terminal_markers(ax, graph)
    ax.autoscale()
    ax.set_aspect("equal")
    ax.set_title(f"{len(solutions)} diverse max-flow solution(s)")
    ax.set_xticks([])
    ax.set_yticks([])
    if 0 < len(solutions) <= 10:
        ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_tv_trajectory(trajectory, path: str, title: str | None = None) -> None:
    """Plot total-variation distance against chain steps and save it.

    Args:
        trajectory: Sequence of ``(step, tv)`` pairs.
        path: Output image path.
        title: Optional plot title.
    """
    steps = [s for s, _ in trajectory]
    tvs = [tv for _, tv in trajectory]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(steps, tvs, marker="o")
    ax.set_xscale("log")
    ax.set_xlabel("chain steps")
    ax.set_ylabel("TV distance to exact stationary law")
    ax.set_ylim(bottom=0.0)
    ax.grid(True, which="both", alpha=0.3)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
