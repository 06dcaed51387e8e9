"""Synthetic fixtures: planted-bridge networks, engagement data and tweet corpora.

Every generator is a pure function of its arguments and seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .graph import LabeledGraph, Orientation, build_cooccurrence_network
from .polarity import EngagementRecord

MAX_ATTEMPTS = 100
# 2018-10-01 00:00:00 UTC, a Monday.
DEFAULT_START = 1538352000


@dataclass(frozen=True)
class PlantedBridgeSpec:
    """Two opposed communities joined only through neutral bridge nodes.

    Each community is core-periphery: a random local hub holds a periphery
    of pendant nodes (each non-attachment node joins it with probability
    ``periphery``) and the remaining core is Erdos-Renyi with ``p_intra``.
    Each bridge links to ``attach`` random nodes of both communities.
    """

    n_left: int = 10
    n_right: int = 10
    p_intra: float = 0.6
    n_bridges: int = 1
    attach: int = 3
    seed: int = 0
    periphery: float = 0.7
    left_label: Orientation = Orientation.L
    right_label: Orientation = Orientation.R
    bridge_label: Orientation = Orientation.N


def _connected(n: int, edges: dict[tuple[int, int], int]) -> bool:
    if n == 0:
        return False
    rows = [i for i, _ in edges] + [j for _, j in edges]
    cols = [j for _, j in edges] + [i for i, _ in edges]
    adj = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    return connected_components(adj, directed=False)[0] == 1


def generate_planted_bridge(spec: PlantedBridgeSpec) -> LabeledGraph:
    if min(spec.n_left, spec.n_right) < 3:
        raise ValueError("each community needs at least 3 nodes")
    if not 0 < spec.p_intra <= 1:
        raise ValueError("p_intra must lie in (0, 1]")
    if not 0 <= spec.periphery <= 1:
        raise ValueError("periphery must lie in [0, 1]")
    if not 1 <= spec.attach <= min(spec.n_left, spec.n_right):
        raise ValueError("attach must be between 1 and the smaller community size")
    if spec.n_bridges < 1:
        raise ValueError("without bridge nodes the two communities are disconnected")

    for attempt in range(MAX_ATTEMPTS):
        rng = np.random.default_rng([spec.seed, attempt])
        ids: list[str] = []
        codes: list[int] = []
        edges: dict[tuple[int, int], int] = {}
        attach_sets = []
        for prefix, size, label in (("L", spec.n_left, spec.left_label),
                                    ("R", spec.n_right, spec.right_label)):
            base = len(ids)
            ids.extend(f"{prefix}{k}" for k in range(size))
            codes.extend([label.code] * size)
            nodes = list(range(base, base + size))
            attached = set(int(v) for v in rng.choice(nodes, spec.attach, replace=False))
            hub = int(rng.choice(nodes))
            periphery = [v for v in nodes
                         if v != hub and v not in attached and rng.random() < spec.periphery]
            core = [v for v in nodes if v not in set(periphery)]
            for a in range(len(core)):
                for b in range(a + 1, len(core)):
                    if rng.random() < spec.p_intra:
                        edges[(core[a], core[b])] = 1
            for v in periphery:
                edges[(min(hub, v), max(hub, v))] = 1
            attach_sets.append(sorted(attached))
        for b in range(spec.n_bridges):
            bridge = len(ids)
            ids.append(f"B{b}")
            codes.append(spec.bridge_label.code)
            for attached in attach_sets:
                for v in attached:
                    edges[(v, bridge)] = 1
        if _connected(len(ids), edges):
            return LabeledGraph.from_edges(ids, edges, codes)
    raise ValueError(f"no connected planted-bridge graph within {MAX_ATTEMPTS} attempts")


def random_graph(n: int, p: float, seed: int, labels: int = 3) -> LabeledGraph:
    """G(n, p) with uniformly random L/N/R labels (first ``labels`` classes)."""
    rng = np.random.default_rng(seed)
    edges = {}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                edges[(i, j)] = 1
    codes = rng.integers(0, labels, n)
    return LabeledGraph.from_edges([f"v{i}" for i in range(n)], edges, codes)


def random_connected_graph(n: int, p: float, seed: int, labels: int = 3) -> LabeledGraph:
    for attempt in range(MAX_ATTEMPTS):
        g = random_graph(n, p, seed * MAX_ATTEMPTS + attempt, labels)
        if g.n_nodes == n and _connected(n, {(i, j): w for i, j, w in g.edges()}):
            return g
    raise ValueError(f"no connected G({n}, {p}) within {MAX_ATTEMPTS} attempts")


def random_labeled_graph(n: int, m: int, seed: int) -> LabeledGraph:
    """Uniform random simple graph with ``m`` edges and random L/N/R labels.

    Isolated nodes are dropped, so slightly fewer than ``n`` nodes may remain.
    """
    if m > n * (n - 1) // 2:
        raise ValueError("too many edges for a simple graph")
    rng = np.random.default_rng(seed)
    keys = np.empty(0, dtype=np.int64)
    while len(keys) < m:
        a = rng.integers(0, n, 2 * m)
        b = rng.integers(0, n, 2 * m)
        ok = a != b
        lo, hi = np.minimum(a[ok], b[ok]), np.maximum(a[ok], b[ok])
        new = lo * n + hi
        keys = np.concatenate([keys, new[~np.isin(new, keys)]])
        _, first = np.unique(keys, return_index=True)
        keys = keys[np.sort(first)]
    keys = keys[:m]
    i, j = keys // n, keys % n
    codes = rng.integers(0, 3, n)
    present = np.zeros(n, dtype=bool)
    present[i] = present[j] = True
    remap = np.cumsum(present) - 1
    ids = tuple(f"u{k}" for k in np.flatnonzero(present))
    src = np.concatenate([remap[i], remap[j]])
    dst = np.concatenate([remap[j], remap[i]])
    return LabeledGraph._from_arrays(ids, src, dst, np.ones(len(src), dtype=np.int64),
                                     codes[present])


def two_cluster_cooccurrence(
    cluster_size: int = 30,
    p_intra: float = 0.3,
    cross_edges: int = 3,
    seeds_per_cluster: int = 10,
    seed: int = 0,
) -> tuple[LabeledGraph, dict[str, Orientation]]:
    """Two hashtag clusters (L and R) with sparse cross co-occurrences."""
    rng = np.random.default_rng(seed)
    tweets: list[list[str]] = []
    names = {"L": [f"l{k:03d}" for k in range(cluster_size)],
             "R": [f"r{k:03d}" for k in range(cluster_size)]}
    for tags in names.values():
        for a in range(cluster_size):
            for b in range(a + 1, cluster_size):
                if rng.random() < p_intra:
                    tweets.extend([[tags[a], tags[b]]] * int(rng.integers(1, 4)))
        # a ring keeps each cluster connected
        for a in range(cluster_size):
            tweets.append([tags[a], tags[(a + 1) % cluster_size]])
    for _ in range(cross_edges):
        tweets.append([names["L"][rng.integers(cluster_size)],
                       names["R"][rng.integers(cluster_size)]])
    graph = build_cooccurrence_network(tweets)
    seeds = {}
    for label, tags in names.items():
        for t in rng.choice(tags, seeds_per_cluster, replace=False):
            seeds[str(t)] = Orientation(label)
    return graph, seeds


def _choice_weights(p_user: float, p_entities: np.ndarray, alignment: float, tau: float):
    kernel = np.exp(-np.abs(p_user - p_entities) / tau)
    uniform = np.full(len(p_entities), 1.0 / len(p_entities))
    return (1.0 - alignment) * uniform + alignment * kernel / kernel.sum()


def generate_engagement(
    users: int,
    entities: int,
    alignment_strength: float,
    seed: int,
    n_records: int = 5000,
    tau: float = 0.2,
    kind: str = "content",
) -> list[EngagementRecord]:
    """Selective-exposure engagement: users favour entities of similar polarity.

    Users and entity latent polarities are uniform on [-1, 1]. Each record
    picks a user uniformly and an entity from a mixture of the uniform
    distribution and the kernel ``exp(-|p_user - p_entity| / tau)``, the
    kernel weighted by ``alignment_strength``.
    """
    if users < 2 or entities < 2:
        raise ValueError("need at least two users and two entities")
    if not 0 <= alignment_strength <= 1:
        raise ValueError("alignment_strength must lie in [0, 1]")
    if tau <= 0:
        raise ValueError("tau must be positive")
    rng = np.random.default_rng(seed)
    p_user = rng.uniform(-1.0, 1.0, users)
    p_entity = rng.uniform(-1.0, 1.0, entities)
    probs = np.array([_choice_weights(p, p_entity, alignment_strength, tau) for p in p_user])
    cum = np.cumsum(probs, axis=1)
    who = rng.integers(0, users, n_records)
    draw = rng.random(n_records) * cum[who, -1]
    picks = np.array([np.searchsorted(cum[u], x, side="right") for u, x in zip(who, draw)])
    picks = np.minimum(picks, entities - 1)
    return [
        EngagementRecord(f"user{u}", float(p_user[u]), f"{kind}{e}", kind, 1, f"ev{i}")
        for i, (u, e) in enumerate(zip(who, picks))
    ]


@dataclass(frozen=True)
class TweetDatasetSpec:
    """Parameters of a synthetic election-style tweet corpus."""

    users: int = 400
    media: int = 4
    weeks: int = 2
    tweets_per_week: int = 20
    retweet_rate: float = 0.8
    media_share: float = 0.8
    # Few contents with many retweets each keep the circular part of the
    # user-vs-content correlation small when alignment is zero.
    contents: int = 6
    topics: int = 4
    tags_per_class: int = 12
    seeds_per_class: int = 4
    alignment_strength: float = 1.0
    tau: float = 0.2
    seed: int = 0
    start: int = DEFAULT_START


def _class_probs(u: float) -> np.ndarray:
    p_l = ((1 - u) / 2) ** 2
    p_r = ((1 + u) / 2) ** 2
    return np.array([p_l, 1.0 - p_l - p_r, p_r])


def generate_tweet_dataset(spec: TweetDatasetSpec) -> tuple[list[dict], list[tuple[str, str]]]:
    """Tweet records (the ingest schema) and seed hashtag labels.

    Regular users have a latent polarity that drives which hashtag class they
    use and, through ``alignment_strength``, which news content they retweet.
    Media accounts are neutral and publish all link-bearing content, so they
    bridge the two sides of the retweet network.
    """
    rng = np.random.default_rng(spec.seed)
    vocab = {c: [f"{c.lower()}{k:02d}" for k in range(spec.tags_per_class)] for c in "LNR"}
    uncertain = ["q00", "q01"]
    classes = "LNR"

    user_ids = [f"user{k:04d}" for k in range(spec.users)]
    latent = rng.uniform(-1.0, 1.0, spec.users)
    media_ids = [f"media{k}" for k in range(spec.media)]

    content_pol = np.sort(rng.uniform(-1.0, 1.0, spec.contents))
    content_ids = [f"c{k:03d}" for k in range(spec.contents)]
    content_media = rng.integers(0, spec.media, spec.contents)
    content_topic = rng.integers(0, spec.topics, spec.contents)
    content_weights = [_choice_weights(u, content_pol, spec.alignment_strength, spec.tau)
                       for u in latent]
    order = np.argsort(latent)

    def tags_for(probs: np.ndarray) -> list[str]:
        c = classes[rng.choice(3, p=probs)]
        tags = list(rng.choice(vocab[c], 2, replace=False))
        if c != "N" and rng.random() < 0.3:
            tags.append(str(rng.choice(vocab["N"])))
        if rng.random() < 0.02:
            tags.append(str(rng.choice(uncertain)))
        return [str(t) for t in tags]

    tweets: list[dict] = []
    week_len = 7 * 86400
    for week in range(spec.weeks):
        t0 = spec.start + week * week_len
        for m, media in enumerate(media_ids):
            for _ in range(spec.tweets_per_week):
                tweets.append(_tweet(media, None, t0 + int(rng.integers(week_len)),
                                     tags_for(np.array([0.15, 0.7, 0.15]))))
        for k, user in enumerate(user_ids):
            for _ in range(spec.tweets_per_week):
                ts = t0 + int(rng.integers(week_len))
                tags = tags_for(_class_probs(latent[k]))
                if rng.random() >= spec.retweet_rate:
                    tweets.append(_tweet(user, None, ts, tags))
                elif rng.random() < spec.media_share:
                    c = int(rng.choice(spec.contents, p=content_weights[k]))
                    tweets.append(_tweet(
                        user, media_ids[content_media[c]], ts, tags,
                        domain=f"site{content_media[c]}.example",
                        content=content_ids[c], topic=f"topic{content_topic[c]}",
                    ))
                else:
                    # homophilous retweet of a user with nearby latent polarity
                    pos = int(np.searchsorted(latent[order], latent[k]))
                    lo, hi = max(0, pos - 10), min(spec.users, pos + 10)
                    other = int(order[rng.integers(lo, hi)])
                    if other != k:
                        tweets.append(_tweet(user, user_ids[other], ts, tags))
                    else:
                        tweets.append(_tweet(user, None, ts, tags))
    tweets.sort(key=lambda t: (t["timestamp"], t["user_id"]))
    for i, t in enumerate(tweets):
        t["tweet_id"] = f"t{i:07d}"

    seeds = [(tag, c) for c in classes for tag in vocab[c][: spec.seeds_per_class]]
    seeds.append((uncertain[0], "?"))
    return tweets, seeds


def _tweet(user, retweeted, ts, tags, domain=None, content=None, topic=None) -> dict:
    return {
        "tweet_id": "",
        "user_id": user,
        "retweeted_user_id": retweeted,
        "timestamp": int(ts),
        "hashtags": ["#" + t for t in tags],
        "domain_id": domain,
        "content_id": content,
        "topic_id": topic,
    }


def write_tweet_dataset(
    directory: str | Path, tweets: list[dict], seeds: list[tuple[str, str]]
) -> tuple[Path, Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    tweets_path = directory / "tweets.jsonl"
    seeds_path = directory / "seeds.csv"
    with open(tweets_path, "w", encoding="utf-8", newline="\n") as fh:
        for t in tweets:
            fh.write(json.dumps(t, sort_keys=True) + "\n")
    with open(seeds_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("hashtag,orientation\n")
        for tag, label in seeds:
            fh.write(f"{tag},{label}\n")
    return tweets_path, seeds_path
