"""Brute-force reference for the centrality kernels.

Enumerates every shortest path of every ordered pair explicitly and applies
each metric's pair predicate node by node. Quadratic memory in the number of
paths, so only meant for graphs of a dozen or so nodes.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .graph import LabeledGraph


def _bfs_dist(graph: LabeledGraph, s: int) -> list[int]:
    dist = [-1] * graph.n_nodes
    dist[s] = 0
    queue = deque([s])
    while queue:
        v = queue.popleft()
        for w in graph.neighbors(v):
            w = int(w)
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def all_shortest_paths(graph: LabeledGraph, s: int, t: int) -> list[tuple[int, ...]]:
    """Every hop-count shortest path from ``s`` to ``t`` as a node tuple."""
    dist = _bfs_dist(graph, s)
    if dist[t] < 0:
        return []
    paths: list[tuple[int, ...]] = []

    def walk(path: list[int]) -> None:
        v = path[-1]
        if v == s:
            paths.append(tuple(reversed(path)))
            return
        for u in graph.neighbors(v):
            u = int(u)
            if dist[u] == dist[v] - 1:
                path.append(u)
                walk(path)
                path.pop()

    walk([t])
    return paths


def brute_force_centrality(graph: LabeledGraph, metric: str) -> np.ndarray:
    n = graph.n_nodes
    adjacent = [set(int(u) for u in graph.neighbors(v)) for v in range(n)]
    orient = graph.orientation

    def admits(v: int, s: int, t: int) -> bool:
        if metric == "betweenness":
            return True
        if metric == "bridgeness":
            return s not in adjacent[v] and t not in adjacent[v]
        if metric == "intergroup":
            return not (s in adjacent[v] and orient[s] == orient[v])
        raise ValueError(f"unknown metric {metric!r}")

    scores = np.zeros(n)
    for s in range(n):
        for t in range(n):
            if s == t:
                continue
            paths = all_shortest_paths(graph, s, t)
            if not paths:
                continue
            through = [0] * n
            for path in paths:
                for v in path[1:-1]:
                    through[v] += 1
            for v in range(n):
                if through[v] and admits(v, s, t):
                    scores[v] += through[v] / len(paths)
    return scores
