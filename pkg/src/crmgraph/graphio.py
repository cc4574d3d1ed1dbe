"""Edge-list ingestion, trace serialization, and run configuration files."""

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyGraphError, ParseError, SchemaError
from .graphs import BipartiteGraph, DirectedMultigraph, UndirectedGraph

TRACE_HEADER = ["iteration", "chain", "alpha", "sigma", "tau", "w_star", "log_post"]
CONFIG_SCHEMA_VERSION = 1
COMMENT_PREFIXES = ("#", "%")


@dataclass(frozen=True)
class EdgeListSource:
    path: str
    directed: bool = False
    comment_prefixes: tuple = COMMENT_PREFIXES


@dataclass
class IngestResult:
    graph: object
    id_map: dict                    # external id -> contiguous id
    n_lines: int = 0
    n_duplicates: int = 0


def _parse_lines(path, comment_prefixes):
    pairs = []
    n_lines = 0
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith(comment_prefixes):
                continue
            n_lines += 1
            fields = line.split()
            if len(fields) < 2:
                raise ParseError(lineno, f"expected two ids, got {line!r}")
            try:
                a, b = int(fields[0]), int(fields[1])
            except ValueError:
                raise ParseError(lineno, f"non-integer node id in {line!r}") from None
            pairs.append((a, b))
    return pairs, n_lines


def read_edge_list(source):
    """Parse a SNAP-style edge list into a graph with contiguous node ids.

    Lines starting with '#' or '%' and blank lines are skipped; duplicate
    edges (including reversed duplicates in the undirected case) collapse;
    self-loops are kept. Nodes are numbered by first appearance.
    """
    if isinstance(source, str):
        source = EdgeListSource(source)
    pairs, n_lines = _parse_lines(source.path, tuple(source.comment_prefixes))
    if not pairs:
        raise EmptyGraphError(f"no edges found in {source.path}")

    id_map = {}
    edges = np.empty((len(pairs), 2), dtype=np.int64)
    for k, (a, b) in enumerate(pairs):
        for pos, x in enumerate((a, b)):
            if x not in id_map:
                id_map[x] = len(id_map)
            edges[k, pos] = id_map[x]
    n = len(id_map)

    if source.directed:
        keys = edges[:, 0] * n + edges[:, 1]
        uniq, counts = np.unique(keys, return_counts=True)
        graph = DirectedMultigraph(n, uniq // n, uniq % n, counts)
        n_dup = len(pairs) - len(uniq)
    else:
        lo = np.minimum(edges[:, 0], edges[:, 1])
        hi = np.maximum(edges[:, 0], edges[:, 1])
        uniq = np.unique(lo * n + hi)
        graph = UndirectedGraph(n, uniq // n, uniq % n)
        n_dup = len(pairs) - len(uniq)
    return IngestResult(graph=graph, id_map=id_map, n_lines=n_lines, n_duplicates=n_dup)


def read_bipartite_edge_list(source):
    """Edge list where column 1 indexes the left set and column 2 the right set."""
    if isinstance(source, str):
        source = EdgeListSource(source)
    pairs, _ = _parse_lines(source.path, tuple(source.comment_prefixes))
    if not pairs:
        raise EmptyGraphError(f"no edges found in {source.path}")
    left_map, right_map = {}, {}
    li, ri = [], []
    for a, b in pairs:
        if a not in left_map:
            left_map[a] = len(left_map)
        if b not in right_map:
            right_map[b] = len(right_map)
        li.append(left_map[a])
        ri.append(right_map[b])
    n_r = len(right_map)
    keys = np.unique(np.asarray(li, dtype=np.int64) * n_r + np.asarray(ri, dtype=np.int64))
    graph = BipartiteGraph(len(left_map), n_r, keys // n_r, keys % n_r)
    return IngestResult(graph=graph, id_map={"left": left_map, "right": right_map})


def write_edge_list(graph, path, header=None):
    with open(path, "w") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        if isinstance(graph, DirectedMultigraph):
            for s, d, c in zip(graph.src, graph.dst, graph.counts):
                for _ in range(int(c)):
                    fh.write(f"{s} {d}\n")
        else:
            for i, j in zip(graph.edge_i, graph.edge_j):
                fh.write(f"{i} {j}\n")


def _fmt(x):
    return format(float(x), ".17g")


def write_trace_csv(traces, path):
    """Serialize chain traces with the fixed scalar-column header."""
    if not isinstance(traces, (list, tuple)):
        traces = [traces]
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(TRACE_HEADER)
        for t in traces:
            n = len(t)
            for i in range(n):
                wr.writerow(
                    [i, t.chain_id]
                    + [_fmt(t.records[k][i]) for k in ("alpha", "sigma", "tau",
                                                       "w_star", "log_post")]
                )


def read_trace_csv(path):
    """Inverse of write_trace_csv; returns a list of ChainTrace objects."""
    from .inference import ChainTrace

    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd, None)
        if header != TRACE_HEADER:
            raise SchemaError(
                f"bad trace header {header!r}; expected {TRACE_HEADER!r}"
            )
        by_chain = {}
        for row in rd:
            if len(row) != len(TRACE_HEADER):
                raise SchemaError(f"row has {len(row)} fields, expected {len(TRACE_HEADER)}")
            chain = int(row[1])
            by_chain.setdefault(chain, []).append([float(x) for x in row[2:]])
    traces = []
    for chain in sorted(by_chain):
        mat = np.asarray(by_chain[chain], dtype=float)
        recs = {
            k: mat[:, c]
            for c, k in enumerate(("alpha", "sigma", "tau", "w_star", "log_post"))
        }
        traces.append(ChainTrace(records=recs, chain_id=chain))
    return traces


_CONFIG_KEYS = {
    "schema_version", "alpha", "sigma", "tau", "eps", "seed", "path",
    "include_self_loops", "n_iter", "n_chains", "leapfrog_steps",
    "target_accept", "adapt_iters", "rw_sd", "thin", "latent_mode", "priors",
    "omega_record_stride", "output",
}

_CONFIG_DEFAULTS = {
    "eps": 1e-6,
    "seed": 0,
    "path": "truncated",
    "include_self_loops": True,
    "n_chains": 3,
    "leapfrog_steps": 10,
    "target_accept": 0.6,
    "adapt_iters": None,
    "rw_sd": 0.02,
    "thin": 1,
    "latent_mode": "exact",
    "priors": "improper",
    "omega_record_stride": 0,
    "output": None,
}


def load_run_config(path):
    """Versioned JSON run configuration; unknown keys are rejected."""
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("schema_version") != CONFIG_SCHEMA_VERSION:
        raise SchemaError(
            f"unsupported config schema_version {doc.get('schema_version')!r}"
        )
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise SchemaError(f"unknown config keys: {sorted(unknown)}")
    out = dict(_CONFIG_DEFAULTS)
    out.update(doc)
    return out


def save_run_config(doc, path):
    doc = dict(doc)
    doc["schema_version"] = CONFIG_SCHEMA_VERSION
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise SchemaError(f"unknown config keys: {sorted(unknown)}")
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_sidecar(out_path, fields):
    """Provenance metadata for a generated artifact."""
    from . import __version__

    doc = {"schema_version": CONFIG_SCHEMA_VERSION, "library_version": __version__}
    doc.update(fields)
    with open(out_path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
