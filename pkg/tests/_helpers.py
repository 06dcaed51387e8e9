"""Small graph builders shared by the test modules."""

from __future__ import annotations

from bubblereach.graph import LabeledGraph, Orientation


def graph_from(edges, labels, weights=None) -> LabeledGraph:
    """Graph over named nodes; ``labels`` maps node -> 'L' | 'N' | 'R' | '?'."""
    ids = list(labels)
    pos = {node: i for i, node in enumerate(ids)}
    table = {}
    for k, (u, v) in enumerate(edges):
        a, b = sorted((pos[u], pos[v]))
        table[(a, b)] = 1 if weights is None else weights[k]
    codes = [Orientation.parse(labels[node]).code for node in ids]
    return LabeledGraph.from_edges(ids, table, codes)


def path3(labels="LNR") -> LabeledGraph:
    return graph_from([("a", "b"), ("b", "c")], dict(zip("abc", labels)))


def star(leaves: int, center="N", leaf="L") -> LabeledGraph:
    labels = {"c": center} | {f"x{k}": leaf for k in range(leaves)}
    return graph_from([("c", f"x{k}") for k in range(leaves)], labels)
