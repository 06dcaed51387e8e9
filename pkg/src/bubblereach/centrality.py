"""Shortest-path centralities: betweenness, bridgeness and intergroup bridging.

All three metrics share one Brandes pass per source (hop-count BFS, then
dependency accumulation in order of non-increasing distance). They differ
only in which dependencies are credited to a node ``w``:

* betweenness: every source ``s != w``;
* bridgeness: sources outside ``N(w)``, and only the part of the dependency
  owed to targets outside ``N(w)``;
* intergroup bridging: every source except same-orientation neighbours of
  ``w`` (the filter is applied on the source side only).

Scores are raw sums over ordered ``(s, t)`` pairs. Sources are processed in
fixed-size blocks whose partial sums are reduced in block order, so the
result is bitwise identical for any number of workers.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numba
import numpy as np

from .graph import UNKNOWN_CODE, LabeledGraph

METRICS = ("betweenness", "bridgeness", "intergroup")
BLOCK_SIZE = 256


@dataclass(frozen=True, eq=False)
class CentralityScores:
    metric: str
    ids: tuple[str, ...]
    values: np.ndarray
    normalized: bool = False

    def __post_init__(self) -> None:
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")

    def __getitem__(self, node: str) -> float:
        return float(self.values[self.ids.index(node)])

    def __len__(self) -> int:
        return len(self.ids)

    def as_dict(self) -> dict[str, float]:
        return {node: float(x) for node, x in zip(self.ids, self.values)}


@numba.njit(cache=True, nogil=True)
def _brandes_block(indptr, indices, orient, lo, hi, want, out):
    # want[k] enables metric k (betweenness, bridgeness, intergroup); out is (3, n).
    n = indptr.shape[0] - 1
    dist = np.full(n, -1, dtype=np.int32)
    sigma = np.zeros(n, dtype=np.float64)
    delta = np.zeros(n, dtype=np.float64)
    delta_far = np.zeros(n, dtype=np.float64)
    order = np.empty(n, dtype=np.int32)
    adj_mark = np.full(n, -1, dtype=np.int32)
    # Shortest-path DAG edges (v -> w) in discovery order.
    dag_v = np.empty(indices.shape[0], dtype=np.int32)
    dag_w = np.empty(indices.shape[0], dtype=np.int32)
    for s in range(lo, hi):
        for k in range(indptr[s], indptr[s + 1]):
            adj_mark[indices[k]] = s
        dist[s] = 0
        sigma[s] = 1.0
        order[0] = s
        head = 0
        tail = 1
        n_dag = 0
        while head < tail:
            v = order[head]
            head += 1
            dv = dist[v]
            sv = sigma[v]
            for k in range(indptr[v], indptr[v + 1]):
                w = indices[k]
                dw = dist[w]
                if dw < 0:
                    dw = dv + 1
                    dist[w] = dw
                    order[tail] = w
                    tail += 1
                if dw == dv + 1:
                    sigma[w] += sv
                    dag_v[n_dag] = v
                    dag_w[n_dag] = w
                    n_dag += 1
        # Reverse discovery order: all edges leaving w precede those entering it,
        # so delta[w] is final whenever it is read.
        for e in range(n_dag - 1, -1, -1):
            v = dag_v[e]
            w = dag_w[e]
            c = sigma[v] / sigma[w]
            dlt = delta[w]
            delta[v] += c * (1.0 + dlt)
            delta_far[v] += c * dlt
        for pos in range(1, tail):
            w = order[pos]
            neighbour = adj_mark[w] == s
            if want[0]:
                out[0, w] += delta[w]
            if want[1] and not neighbour:
                out[1, w] += delta_far[w]
            if want[2] and (not neighbour or orient[w] != orient[s]):
                out[2, w] += delta[w]
        for pos in range(tail):
            w = order[pos]
            dist[w] = -1
            sigma[w] = 0.0
            delta[w] = 0.0
            delta_far[w] = 0.0


def _run(graph: LabeledGraph, want: tuple[bool, bool, bool], workers: int) -> np.ndarray:
    if graph.n_nodes == 0:
        raise ValueError("centrality of an empty graph is undefined")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    n = graph.n_nodes
    flags = np.array(want, dtype=np.bool_)
    if len(graph.indices) >= 2**31:
        raise ValueError("graph too large for 32-bit adjacency offsets")
    indptr = graph.indptr.astype(np.int32)
    indices = graph.indices.astype(np.int32)
    blocks = [(lo, min(lo + BLOCK_SIZE, n)) for lo in range(0, n, BLOCK_SIZE)]

    def block(bounds):
        part = np.zeros((3, n), dtype=np.float64)
        _brandes_block(indptr, indices, graph.orientation, bounds[0], bounds[1], flags, part)
        return part

    total = np.zeros((3, n), dtype=np.float64)
    if workers == 1 or len(blocks) == 1:
        for bounds in blocks:
            total += block(bounds)
    else:
        # map() yields in submission order, which fixes the reduction order.
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(block, blocks):
                total += part
    return total


def _check_labels(graph: LabeledGraph) -> None:
    if np.any(graph.orientation == UNKNOWN_CODE):
        bad = graph.ids[int(np.flatnonzero(graph.orientation == UNKNOWN_CODE)[0])]
        raise ValueError(f"node {bad!r} has orientation '?'; intergroup bridging needs L/N/R")


def betweenness(graph: LabeledGraph, workers: int = 1) -> CentralityScores:
    out = _run(graph, (True, False, False), workers)
    return CentralityScores("betweenness", graph.ids, out[0])


def bridgeness(graph: LabeledGraph, workers: int = 1) -> CentralityScores:
    out = _run(graph, (False, True, False), workers)
    return CentralityScores("bridgeness", graph.ids, out[1])


def intergroup_bridging(graph: LabeledGraph, workers: int = 1) -> CentralityScores:
    _check_labels(graph)
    out = _run(graph, (False, False, True), workers)
    return CentralityScores("intergroup", graph.ids, out[2])


def all_centralities(graph: LabeledGraph, workers: int = 1) -> dict[str, CentralityScores]:
    """The three metrics from a single set of BFS passes."""
    _check_labels(graph)
    out = _run(graph, (True, True, True), workers)
    return {m: CentralityScores(m, graph.ids, out[k]) for k, m in enumerate(METRICS)}


def normalize_minmax(scores: CentralityScores) -> CentralityScores:
    x = scores.values
    if len(x) == 0:
        return CentralityScores(scores.metric, scores.ids, x.copy(), True)
    lo, hi = float(x.min()), float(x.max())
    if hi == lo:
        out = np.zeros_like(x, dtype=np.float64)
    else:
        out = (x - lo) / (hi - lo)
    return CentralityScores(scores.metric, scores.ids, out, True)


def top_k(scores: CentralityScores, k: int) -> list[tuple[str, float]]:
    """Highest ``k`` scores, descending; ties go to the smaller node ID."""
    if k < 1:
        raise ValueError("k must be >= 1")
    ranked = sorted(zip(scores.ids, scores.values.tolist()), key=lambda p: (-p[1], p[0]))
    return ranked[:k]


def write_scores_csv(path: str | Path, scores: list[CentralityScores]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["node_id", "metric", "score", "normalized"])
        for sc in scores:
            flag = "true" if sc.normalized else "false"
            for node, x in zip(sc.ids, sc.values.tolist()):
                writer.writerow([node, sc.metric, repr(x), flag])


def read_scores_csv(path: str | Path) -> list[CentralityScores]:
    rows: dict[tuple[str, bool], list[tuple[str, float]]] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            key = (row["metric"], row["normalized"].strip().lower() == "true")
            value = float(row["score"])
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"invalid score {row['score']!r} for {row['node_id']!r}")
            rows.setdefault(key, []).append((row["node_id"], value))
    return [
        CentralityScores(metric, tuple(n for n, _ in pairs), np.array([v for _, v in pairs]), norm)
        for (metric, norm), pairs in rows.items()
    ]
