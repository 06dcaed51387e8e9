"""Labeled undirected graphs and the two network builders.

Retweet networks connect users who retweeted each other; hashtag
co-occurrence networks connect hashtags used in the same tweet. Both are
stored as an immutable CSR adjacency with integer weights and a per-node
orientation code, which is what the centrality kernels traverse.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np


class Orientation(str, enum.Enum):
    L = "L"
    N = "N"
    R = "R"
    UNKNOWN = "?"

    @property
    def code(self) -> int:
        return _CODES[self]

    @classmethod
    def from_code(cls, code: int) -> "Orientation":
        return ORIENTATIONS[code]

    @classmethod
    def parse(cls, text: str) -> "Orientation":
        try:
            return cls(text.strip().upper())
        except ValueError:
            raise ValueError(f"unknown orientation label {text!r}") from None


# Fixed class order L < N < R < ?; also the argmax tie-break order.
ORIENTATIONS: tuple[Orientation, ...] = (
    Orientation.L,
    Orientation.N,
    Orientation.R,
    Orientation.UNKNOWN,
)
_CODES = {o: i for i, o in enumerate(ORIENTATIONS)}
UNKNOWN_CODE = _CODES[Orientation.UNKNOWN]


@dataclass(frozen=True)
class RetweetEvent:
    """One retweet: ``retweeting_user`` retweeted ``retweeted_user``."""

    retweeted_user: str
    retweeting_user: str
    week: int = 1
    hashtags: tuple[str, ...] = ()
    domain: str | None = None
    content: str | None = None
    topic: str | None = None


@dataclass(frozen=True, eq=False)
class LabeledGraph:
    """Weighted undirected simple graph with per-node orientations.

    Node ``i`` has external ID ``ids[i]``; its neighbours are
    ``indices[indptr[i]:indptr[i+1]]`` (ascending) with matching ``weights``.
    """

    ids: tuple[str, ...]
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    orientation: np.ndarray
    _index: dict[str, int] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if not self._index:
            self._index.update((node, i) for i, node in enumerate(self.ids))
        for arr in (self.indptr, self.indices, self.weights, self.orientation):
            arr.setflags(write=False)

    @classmethod
    def from_edges(
        cls,
        ids: Sequence[str],
        edges: Mapping[tuple[int, int], int],
        orientation: Sequence[int] | np.ndarray,
    ) -> "LabeledGraph":
        """Build from ``{(i, j): weight}`` over dense indices ``i != j``.

        Nodes left without any edge are dropped and the remaining indices are
        compacted, preserving their relative order.
        """
        n = len(ids)
        orientation = np.asarray(orientation, dtype=np.int8)
        if orientation.shape != (n,):
            raise ValueError("orientation must have one entry per node")
        degree = np.zeros(n, dtype=np.int64)
        for (i, j), w in edges.items():
            if i == j:
                raise ValueError(f"self-loop on node {ids[i]!r}")
            if w < 1:
                raise ValueError(f"edge ({ids[i]!r}, {ids[j]!r}) has weight {w} < 1")
            degree[i] += 1
            degree[j] += 1
        keep = np.flatnonzero(degree > 0)
        remap = np.full(n, -1, dtype=np.int64)
        remap[keep] = np.arange(len(keep))

        m = len(edges)
        src = np.empty(2 * m, dtype=np.int64)
        dst = np.empty(2 * m, dtype=np.int64)
        wts = np.empty(2 * m, dtype=np.int64)
        for k, ((i, j), w) in enumerate(edges.items()):
            a, b = remap[i], remap[j]
            src[2 * k], dst[2 * k] = a, b
            src[2 * k + 1], dst[2 * k + 1] = b, a
            wts[2 * k] = wts[2 * k + 1] = w
        return cls._from_arrays(
            tuple(ids[i] for i in keep), src, dst, wts, orientation[keep]
        )

    @classmethod
    def _from_arrays(cls, ids, src, dst, wts, orientation) -> "LabeledGraph":
        # Both directions of every edge must already be present in src/dst.
        n = len(ids)
        order = np.lexsort((dst, src))
        src, dst, wts = src[order], dst[order], wts[order]
        if len(src) > 1:
            dup = (src[1:] == src[:-1]) & (dst[1:] == dst[:-1])
            if dup.any():
                raise ValueError("duplicate edge in edge list")
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        return cls(
            ids=tuple(ids),
            indptr=indptr,
            indices=np.ascontiguousarray(dst, dtype=np.int64),
            weights=np.ascontiguousarray(wts, dtype=np.int64),
            orientation=np.ascontiguousarray(orientation, dtype=np.int8),
        )

    @property
    def n_nodes(self) -> int:
        return len(self.ids)

    @property
    def n_edges(self) -> int:
        return len(self.indices) // 2

    def __len__(self) -> int:
        return self.n_nodes

    def __contains__(self, node: object) -> bool:
        return node in self._index

    def index_of(self, node: str) -> int:
        return self._index[node]

    def node_id(self, i: int) -> str:
        return self.ids[i]

    def orientation_of(self, node: str) -> Orientation:
        return Orientation.from_code(int(self.orientation[self._index[node]]))

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i] : self.indptr[i + 1]]

    def degree(self, i: int) -> int:
        return int(self.indptr[i + 1] - self.indptr[i])

    def weight(self, u: str, v: str) -> int:
        """Edge weight between two node IDs, 0 when not adjacent."""
        i, j = self._index[u], self._index[v]
        lo, hi = self.indptr[i], self.indptr[i + 1]
        k = lo + np.searchsorted(self.indices[lo:hi], j)
        if k < hi and self.indices[k] == j:
            return int(self.weights[k])
        return 0

    def edges(self) -> Iterator[tuple[int, int, int]]:
        """Yield ``(i, j, weight)`` once per undirected edge, ``i < j``."""
        for i in range(self.n_nodes):
            for k in range(self.indptr[i], self.indptr[i + 1]):
                j = int(self.indices[k])
                if i < j:
                    yield i, j, int(self.weights[k])

    def total_weight(self) -> int:
        return int(self.weights.sum()) // 2

    def with_orientation(self, orientation: Sequence[int] | np.ndarray) -> "LabeledGraph":
        orientation = np.asarray(orientation, dtype=np.int8)
        if orientation.shape != (self.n_nodes,):
            raise ValueError("orientation must have one entry per node")
        return LabeledGraph(
            self.ids, self.indptr, self.indices, self.weights, orientation, dict(self._index)
        )

    def subgraph(self, keep: Iterable[int]) -> "LabeledGraph":
        """Induced subgraph on node indices ``keep``; isolates are dropped."""
        keep = sorted(set(int(i) for i in keep))
        remap = {old: new for new, old in enumerate(keep)}
        edges = {}
        for i, j, w in self.edges():
            if i in remap and j in remap:
                edges[(remap[i], remap[j])] = w
        ids = [self.ids[i] for i in keep]
        return LabeledGraph.from_edges(ids, edges, self.orientation[keep])


def build_retweet_network(
    events: Iterable[RetweetEvent],
    orientations: Mapping[str, Orientation],
) -> LabeledGraph:
    """Aggregate retweet events into a weighted undirected user graph.

    The weight of ``(u, v)`` counts retweets in either direction. Self-retweets
    are dropped before aggregation, and users that end up without an edge do
    not become nodes.
    """
    index: dict[str, int] = {}
    ids: list[str] = []
    codes: list[int] = []
    edges: dict[tuple[int, int], int] = {}

    def lookup(user: str) -> int:
        i = index.get(user)
        if i is None:
            i = index[user] = len(ids)
            ids.append(user)
            codes.append(_user_code(user, orientations))
        return i

    for ev in events:
        if ev.retweeted_user == ev.retweeting_user:
            _user_code(ev.retweeted_user, orientations)
            continue
        a, b = lookup(ev.retweeted_user), lookup(ev.retweeting_user)
        key = (a, b) if a < b else (b, a)
        edges[key] = edges.get(key, 0) + 1
    return LabeledGraph.from_edges(ids, edges, codes)


def _user_code(user: str, orientations: Mapping[str, Orientation]) -> int:
    try:
        o = Orientation(orientations[user])
    except KeyError:
        raise ValueError(f"no orientation for user {user!r}") from None
    if o is Orientation.UNKNOWN:
        raise ValueError(f"user {user!r} has orientation '?'; users must be L, N or R")
    return o.code


def build_cooccurrence_network(tweets: Iterable[Iterable[str]]) -> LabeledGraph:
    """Hashtag co-occurrence graph; orientation is UNKNOWN everywhere.

    Each tweet adds 1 to every pair of its distinct hashtags. Hashtags that
    never share a tweet with another hashtag produce no node.
    """
    index: dict[str, int] = {}
    ids: list[str] = []
    edges: dict[tuple[int, int], int] = {}
    for tags in tweets:
        distinct = list(dict.fromkeys(tags))
        if len(distinct) < 2:
            continue
        idx = []
        for tag in distinct:
            i = index.get(tag)
            if i is None:
                i = index[tag] = len(ids)
                ids.append(tag)
            idx.append(i)
        for a, b in itertools.combinations(idx, 2):
            key = (a, b) if a < b else (b, a)
            edges[key] = edges.get(key, 0) + 1
    return LabeledGraph.from_edges(ids, edges, np.full(len(ids), UNKNOWN_CODE))


def write_edgelist(graph: LabeledGraph, path: str | Path) -> None:
    """Write ``u<TAB>v<TAB>weight<TAB>orient(u)<TAB>orient(v)`` lines."""
    labels = [o.value for o in ORIENTATIONS]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i, j, w in graph.edges():
            fh.write(
                f"{graph.ids[i]}\t{graph.ids[j]}\t{w}\t"
                f"{labels[graph.orientation[i]]}\t{labels[graph.orientation[j]]}\n"
            )


def read_edgelist(path: str | Path) -> LabeledGraph:
    index: dict[str, int] = {}
    ids: list[str] = []
    codes: list[int] = []
    edges: dict[tuple[int, int], int] = {}

    def lookup(node: str, label: str, lineno: int) -> int:
        code = Orientation.parse(label).code
        i = index.get(node)
        if i is None:
            i = index[node] = len(ids)
            ids.append(node)
            codes.append(code)
        elif codes[i] != code:
            raise ValueError(f"line {lineno}: conflicting orientation for {node!r}")
        return i

    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                raise ValueError(f"line {lineno}: expected 5 tab-separated fields")
            u, v, w, ou, ov = parts
            a, b = lookup(u, ou, lineno), lookup(v, ov, lineno)
            if a == b:
                raise ValueError(f"line {lineno}: self-loop on {u!r}")
            key = (a, b) if a < b else (b, a)
            if key in edges:
                raise ValueError(f"line {lineno}: duplicate edge {u!r}-{v!r}")
            edges[key] = int(w)
    return LabeledGraph.from_edges(ids, edges, codes)
