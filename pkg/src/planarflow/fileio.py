"""Atomic file output, solution-set serialization, and run manifests.

All writers go through a write-temp-then-rename path so interrupted runs
never leave truncated files behind.  Solution sets serialize to JSON with
paths as node-id sequences plus a per-edge usage map; manifests record
everything needed to reproduce a run.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import asdict, dataclass

from .chain import make_state, path_from_node_ids
from .errors import GraphFormatError, GraphMismatchError
from .graph import PlanarRoadGraph
from .sampler import SamplerConfig, SolutionSet

__all__ = [
    "RunManifest",
    "atomic_write_text",
    "load_solution_set",
    "read_solution_set_path",
    "solution_set_to_doc",
    "write_json",
    "write_tsv",
]


def atomic_write_text(path: str, text: str) -> None:
    """Write text to ``path`` atomically (temp file + rename).

    Args:
        path: Destination file path.
        text: Full file content.
    """
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_json(path: str, doc: dict) -> None:
    """Serialize ``doc`` as stable, human-readable JSON and write atomically."""
    atomic_write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def write_tsv(path: str, header: list, rows: list) -> None:
    """Write a tab-separated table atomically.

    Args:
        path: Destination file path.
        header: Column names.
        rows: Sequences of cell values; rendered with ``str``.
    """
    lines = ["\t".join(str(c) for c in header)]
    lines.extend("\t".join(str(c) for c in row) for row in rows)
    atomic_write_text(path, "\n".join(lines) + "\n")


def solution_set_to_doc(solutions: SolutionSet) -> dict:
    """Serialize a solution set to a JSON-ready dict.

    Paths are stored as node-id sequences; the edge-usage map is stored as a
    list of ``[edge_id, count]`` pairs to keep integer and string edge ids
    distinguishable through JSON.

    Args:
        solutions: The set to serialize.

    Returns:
        A dict round-trippable via :func:`load_solution_set`.
    """
    config = None
    if solutions.config is not None:
        config = asdict(solutions.config)
    entries = []
    for state, it in zip(solutions.states, solutions.iterations):
        entries.append(
            {
                "iteration": it,
                "paths": [list(state.path_node_ids(i)) for i in range(len(state.paths))],
                "edge_usage": [
                    [eid, count]
                    for eid, count in sorted(
                        state.usage_by_edge_id().items(), key=lambda kv: str(kv[0])
                    )
                ],
                "total_length": state.total_length,
            }
        )
    return {
        "kind": "solution-set",
        "seed": solutions.seed,
        "config": config,
        "solutions": entries,
    }


def load_solution_set(doc: dict, graph: PlanarRoadGraph) -> SolutionSet:
    """Rebuild a solution set from its serialized form.

    Every path is revalidated against ``graph`` (endpoints, simplicity,
    capacities), and the stored edge-usage map is checked against the usage
    recomputed from the paths, so a solution file cannot silently drift from
    the graph it claims to describe.

    Args:
        doc: Dict produced by :func:`solution_set_to_doc`.
        graph: Graph the solutions must live on.

    Returns:
        The reconstructed :class:`SolutionSet`.

    Raises:
        GraphFormatError: If the document structure is malformed.
        GraphMismatchError: If a path or usage map does not fit the graph.
    """
    if not isinstance(doc, dict) or doc.get("kind") != "solution-set":
        raise GraphFormatError("not a solution-set document")
    config = None
    if doc.get("config") is not None:
        raw = dict(doc["config"])
        raw["num_iter"] = raw.get("num_iter")
        raw["target_solutions"] = raw.get("target_solutions")
        config = SamplerConfig(**raw)
    states = []
    iterations = []
    for entry in doc.get("solutions", ()):
        try:
            paths = [list(p) for p in entry["paths"]]
            stored_usage = {eid: count for eid, count in entry["edge_usage"]}
            iteration = int(entry["iteration"])
        except (KeyError, TypeError, ValueError) as exc:
            raise GraphFormatError(f"malformed solution entry: {exc}") from exc
        try:
            units = [path_from_node_ids(graph, p) for p in paths]
            state = make_state(graph, units)
        except Exception as exc:
            raise GraphMismatchError(
                f"solution paths do not fit the graph: {exc}"
            ) from exc
        if state.usage_by_edge_id() != stored_usage:
            raise GraphMismatchError(
                "stored edge usage disagrees with usage recomputed from paths"
            )
        states.append(state)
        iterations.append(iteration)
    return SolutionSet(
        graph=graph,
        states=tuple(states),
        iterations=tuple(iterations),
        seed=int(doc.get("seed", 0)),
        config=config,
    )


def read_solution_set_path(path: str, graph: PlanarRoadGraph) -> SolutionSet:
    """Read and validate a solution-set JSON file against a graph."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return load_solution_set(doc, graph)


@dataclass(frozen=True)
class RunManifest:
    """Record of one CLI run, sufficient to reproduce it.

    Attributes:
        graph_path: Path of the input graph file.
        command: CLI subcommand name.
        params: Echo of the run parameters (flag values).
        output_paths: Files the run wrote.
        seed: Seed used.
        version: Tool version string.
    """

    graph_path: str
    command: str
    params: dict
    output_paths: tuple[str, ...]
    seed: int
    version: str

    def to_doc(self) -> dict:
        """Serialize to a JSON-ready dict."""
        return {
            "kind": "run-manifest",
            "graph_path": self.graph_path,
            "command": self.command,
            "params": self.params,
            "output_paths": list(self.output_paths),
            "seed": self.seed,
            "version": self.version,
        }

    @staticmethod
    def from_doc(doc: dict) -> "RunManifest":
        """Rebuild a manifest from its serialized form."""
        if not isinstance(doc, dict) or doc.get("kind") != "run-manifest":
            raise GraphFormatError("not a run-manifest document")
        return RunManifest(
            graph_path=doc["graph_path"],
            command=doc["command"],
            params=dict(doc["params"]),
            output_paths=tuple(doc["output_paths"]),
            seed=int(doc["seed"]),
            version=doc["version"],
        )

    def write(self, path: str) -> None:
        """Write the manifest as JSON, atomically."""
        write_json(path, self.to_doc())

    @staticmethod
    def read(path: str) -> "RunManifest":
        """Read a manifest file."""
        with open(path, "r", encoding="utf-8") as fh:
            return RunManifest.from_doc(json.load(fh))
