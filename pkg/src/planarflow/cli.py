"""Command-line interface for graph generation, flows, sampling, and reports.

Subcommands:
    gen-grid   write a synthetic grid graph file
    maxflow    compute an integer max flow and its path decomposition
    sample     run the diverse-solution sampler
    validate   run the exact small-instance diagnostics
    metrics    compute link loading for a stored solution set

Exit codes: 0 on success, 2 on validation errors (bad flags, malformed or
non-planar graphs, graph/solution mismatches), 3 when an enumeration cap or
iteration budget refuses the request.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .errors import PlanarflowError, StateCapExceededError
from .fileio import (
    RunManifest,
    read_solution_set_path,
    solution_set_to_doc,
    write_json,
    write_tsv,
)
from .figures import save_loading_heatmap, save_solution_overlay, save_tv_trajectory
from .graph import load_graph_path
from .maxflow import STRATEGIES, decompose, max_flow
from .metrics import edge_loading, loading_geojson, solution_length_stats
from .oracle import (
    DEFAULT_STATE_CAP,
    check_irreducible,
    detailed_balance_residual,
    enumerate_states,
    exact_transition_matrix,
    simulate_histogram,
    stationarity_residual,
    tv_distance,
)
from .sampler import SamplerConfig, sample_koptimal
from .synth import grid_document

__all__ = ["main"]


def _add_sample_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lambda", dest="lambda_", type=float, required=True,
                   help="length-bias parameter of the chain (> 0)")
    p.add_argument("--k", type=int, required=True,
                   help="max shared edges between any two kept solutions")
    p.add_argument("--mix-iter", type=int, default=0,
                   help="burn-in iterations before sampling starts")
    p.add_argument("--sf", type=int, default=1,
                   help="sampling frequency in iterations")
    p.add_argument("--num-iter", type=int, default=None,
                   help="sampling iterations (fixed-iterations exit)")
    p.add_argument("--target-solutions", type=int, default=None,
                   help="stop after this many solutions (target-count exit)")
    p.add_argument("--seed", type=int, default=0, help="RNG seed")
    p.add_argument("--max-total-iter", type=int, default=10_000_000,
                   help="hard ceiling on chain iterations in target-count mode")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="planarflow",
        description="Sample diverse integer max-flow solutions on planar road networks.",
    )
    parser.add_argument("--version", action="version", version=f"planarflow {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-grid", help="write a synthetic grid graph file")
    p.add_argument("rows", type=int)
    p.add_argument("cols", type=int)
    p.add_argument("-o", "--output", required=True, help="graph JSON path")
    p.add_argument("--edge-length", type=float, default=1.0)
    p.add_argument("--capacity", type=int, default=1)

    p = sub.add_parser("maxflow", help="compute max flow and decomposition")
    p.add_argument("graph", help="graph JSON path")
    p.add_argument("--strategy", choices=STRATEGIES, default="breadth-first")
    p.add_argument("-o", "--output", default=None, help="flow report JSON path")

    p = sub.add_parser("sample", help="sample diverse max-flow solutions")
    p.add_argument("graph", help="graph JSON path")
    _add_sample_flags(p)
    p.add_argument("-o", "--output", default=None,
                   help="solution-set JSON path (single run)")
    p.add_argument("--manifest", default=None, help="run manifest JSON path")
    p.add_argument("--figure", default=None, help="solution overlay image path")
    p.add_argument("--runs", type=int, default=1,
                   help="number of independent seeded runs")
    p.add_argument("--out-dir", default=None,
                   help="output directory for --runs > 1")
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes for --runs > 1")

    p = sub.add_parser("validate", help="exact diagnostics on a small instance")
    p.add_argument("graph", help="graph JSON path")
    p.add_argument("--lambda", dest="lambda_", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=100_000,
                   help="simulated chain steps for the TV trajectory")
    p.add_argument("--cap", type=int, default=DEFAULT_STATE_CAP,
                   help="refuse instances with more states than this")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default=None, help="diagnostic report JSON path")
    p.add_argument("--figure", default=None, help="TV trajectory image path")

    p = sub.add_parser("metrics", help="link loading for a stored solution set")
    p.add_argument("graph", help="graph JSON path")
    p.add_argument("solutions", help="solution-set JSON path")
    p.add_argument("-o", "--output", required=True,
                   help="per-edge loading TSV path")
    p.add_argument("--summary", default=None, help="summary JSON path")
    p.add_argument("--geojson", default=None, help="GeoJSON heat layer path")
    p.add_argument("--heatmap", default=None, help="heatmap image path")

    return parser


def _cmd_gen_grid(args: argparse.Namespace) -> int:
    if args.rows < 2 or args.cols < 2:
        print("error: grid needs at least 2 rows and 2 columns", file=sys.stderr)
        return 2
    doc = grid_document(
        args.rows, args.cols, edge_length=args.edge_length, capacity=args.capacity
    )
    write_json(args.output, doc)
    print(f"wrote {args.rows}x{args.cols} grid to {args.output}")
    return 0


def _cmd_maxflow(args: argparse.Namespace) -> int:
    graph = load_graph_path(args.graph)
    flow = max_flow(graph, strategy=args.strategy)
    state = decompose(flow)
    paths = [list(state.path_node_ids(i)) for i in range(len(state.paths))]
    lengths = [
        sum(float(graph.edge_length[e]) for e in p.edges
            if not graph.edge_is_virtual[e])
        for p in state.paths
    ]
    print(f"max flow value: {flow.value} (strategy: {args.strategy})")
    for p, ln in zip(paths, lengths):
        print(f"  path ({ln:g} m): {' -> '.join(str(n) for n in p)}")
    if args.output:
        write_json(
            args.output,
            {
                "kind": "flow-report",
                "strategy": args.strategy,
                "value": flow.value,
                "paths": paths,
                "path_lengths": lengths,
                "total_length": sum(lengths),
            },
        )
    return 0


def _run_config(args: argparse.Namespace, seed: int) -> SamplerConfig:
    return SamplerConfig(
        lambda_=args.lambda_,
        k=args.k,
        mix_iter=args.mix_iter,
        sf=args.sf,
        num_iter=args.num_iter,
        target_solutions=args.target_solutions,
        seed=seed,
        max_total_iter=args.max_total_iter,
    )


def _spawned_seed(base_seed: int, run_index: int) -> int:
    seq = np.random.SeedSequence(base_seed, spawn_key=(run_index,))
    return int(seq.generate_state(1, np.uint64)[0])


def _sample_worker(payload: tuple) -> tuple:
    graph_path, config_kwargs, out_path = payload
    graph = load_graph_path(graph_path)
    config = SamplerConfig(**config_kwargs)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        solutions = sample_koptimal(graph, config)
    write_json(out_path, solution_set_to_doc(solutions))
    if len(solutions) > 0:
        report = edge_loading(solutions)
        stats = (report.avg_solution_length, report.normalized_mean)
    else:
        stats = (None, None)
    return out_path, config.seed, len(solutions), stats


def _cmd_sample(args: argparse.Namespace) -> int:
    if args.runs < 1:
        print("error: --runs must be positive", file=sys.stderr)
        return 2
    if args.runs == 1:
        if not args.output:
            print("error: -o/--output is required for a single run", file=sys.stderr)
            return 2
        graph = load_graph_path(args.graph)
        config = _run_config(args, args.seed)
        solutions = sample_koptimal(graph, config)
        write_json(args.output, solution_set_to_doc(solutions))
        print(f"kept {len(solutions)} solution(s) -> {args.output}")
        outputs = [args.output]
        if args.figure:
            save_solution_overlay(graph, solutions, args.figure)
            outputs.append(args.figure)
        if args.manifest:
            RunManifest(
                graph_path=args.graph,
                command="sample",
                params={
                    "lambda": args.lambda_,
                    "k": args.k,
                    "mix_iter": args.mix_iter,
                    "sf": args.sf,
                    "num_iter": args.num_iter,
                    "target_solutions": args.target_solutions,
                    "max_total_iter": args.max_total_iter,
                },
                output_paths=tuple(outputs),
                seed=args.seed,
                version=__version__,
            ).write(args.manifest)
        return 0

    if not args.out_dir:
        print("error: --out-dir is required for --runs > 1", file=sys.stderr)
        return 2
    import os

    os.makedirs(args.out_dir, exist_ok=True)
    payloads = []
    for i in range(args.runs):
        seed = _spawned_seed(args.seed, i)
        config = _run_config(args, seed)
        out_path = os.path.join(args.out_dir, f"run-{i:03d}.solutions.json")
        payloads.append((args.graph, dataclasses.asdict(config), out_path))
    results = []
    with ProcessPoolExecutor(max_workers=args.workers) as pool:
        for out_path, seed, size, (avg_len, norm_mean) in pool.map(
            _sample_worker, payloads
        ):
            results.append(
                {
                    "path": out_path,
                    "seed": seed,
                    "solutions": size,
                    "avg_solution_length": avg_len,
                    "normalized_mean": norm_mean,
                }
            )
    summary_path = os.path.join(args.out_dir, "summary.json")
    write_json(summary_path, {"kind": "run-summary", "runs": results})
    print(f"completed {args.runs} runs -> {summary_path}")
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    graph = load_graph_path(args.graph)
    space = enumerate_states(graph, cap=args.cap)
    dist = exact_transition_matrix(space, args.lambda_)
    db = detailed_balance_residual(dist)
    fixpoint = stationarity_residual(dist)
    connected, witness = check_irreducible(space)
    checkpoints = sorted(
        {int(c) for c in (10_000, 100_000, 1_000_000) if c <= args.steps} | {args.steps}
    )
    counts, trajectory = simulate_histogram(
        dist, steps=args.steps, seed=args.seed, checkpoints=checkpoints
    )
    final_tv = tv_distance(counts, dist)
    witness_doc = None
    if witness is not None:
        witness_doc = [
            [[graph.nodes[n].id for n in p.nodes] for p in st.paths] for st in witness
        ]
    report = {
        "kind": "validation-report",
        "graph": args.graph,
        "lambda": args.lambda_,
        "states": len(space),
        "max_flow_value": space.mf,
        "detailed_balance_residual": db,
        "stationarity_residual": fixpoint,
        "strongly_connected": bool(connected),
        "disconnection_witness": witness_doc,
        "tv_trajectory": [[s, tv] for s, tv in trajectory],
        "tv_final": final_tv,
        "steps": args.steps,
        "seed": args.seed,
    }
    print(f"states: {len(space)} (max flow {space.mf})")
    print(f"detailed balance residual: {db:.3e}")
    print(f"stationarity residual:     {fixpoint:.3e}")
    print(f"strongly connected: {connected}")
    if witness_doc is not None:
        print(f"  witness pair (mutually unreachable): {witness_doc[0]} | {witness_doc[1]}")
    print(f"TV after {args.steps} steps: {final_tv:.4f}")
    if args.output:
        write_json(args.output, report)
    if args.figure:
        save_tv_trajectory(
            trajectory, args.figure,
            title=f"lambda={args.lambda_:g}, {len(space)} states",
        )
    return 0


def _cmd_metrics(args: argparse.Namespace) -> int:
    graph = load_graph_path(args.graph)
    solutions = read_solution_set_path(args.solutions, graph)
    if len(solutions) == 0:
        print("error: solution set is empty", file=sys.stderr)
        return 2
    report = edge_loading(solutions)
    avg_path_len, total_len = solution_length_stats(solutions)
    rows = [
        (eid, f"{load:.6g}")
        for eid, load in sorted(report.per_edge_load.items(), key=lambda kv: str(kv[0]))
    ]
    write_tsv(args.output, ["edge", "load"], rows)
    print(f"solutions: {report.n_solutions}")
    print(f"loaded edges: {report.loaded_edge_count}")
    print(f"normalized mean load: {report.normalized_mean:.6g}")
    print(f"avg solution length: {report.avg_solution_length:.6g} m")
    if args.summary:
        write_json(
            args.summary,
            {
                "kind": "loading-summary",
                "n_solutions": report.n_solutions,
                "loaded_edge_count": report.loaded_edge_count,
                "mean_load": report.mean_load,
                "max_load": report.max_load,
                "normalized_mean": report.normalized_mean,
                "avg_solution_length": report.avg_solution_length,
                "avg_path_length": avg_path_len,
                "total_length": total_len,
            },
        )
    if args.geojson:
        write_json(args.geojson, loading_geojson(graph, report))
    if args.heatmap:
        save_loading_heatmap(graph, report, args.heatmap)
    return 0


def main(argv: list | None = None) -> int:
    """CLI entry point; returns the process exit code."""
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "gen-grid": _cmd_gen_grid,
        "maxflow": _cmd_maxflow,
        "sample": _cmd_sample,
        "validate": _cmd_validate,
        "metrics": _cmd_metrics,
    }
    try:
        return handlers[args.command](args)
    except StateCapExceededError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 3
    except PlanarflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
