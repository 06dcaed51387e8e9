"""Hashtag orientation labeling.

Seed hashtags carry manual labels; the rest are labeled by harmonic
label propagation over the co-occurrence network, where each unlabeled
hashtag repeatedly takes the co-occurrence-weighted average of its
neighbours' class distributions while seeds stay clamped. Stability of the
procedure is measured by re-running it with random seeds hidden and scoring
agreement between runs with Fleiss' kappa.
"""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .graph import ORIENTATIONS, LabeledGraph, Orientation

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 1000
MAX_REDRAWS = 100

SEED = "seed"
PROPAGATED = "propagated"


@dataclass(frozen=True)
class HashtagLabel:
    orientation: Orientation
    provenance: str
    confidence: float


@dataclass
class HashtagClassification:
    labels: dict[str, HashtagLabel]
    distributions: np.ndarray | None = None
    iterations: int = 0
    converged: bool = True

    def __getitem__(self, tag: str) -> HashtagLabel:
        return self.labels[tag]

    def __len__(self) -> int:
        return len(self.labels)

    def orientation(self, tag: str) -> Orientation:
        label = self.labels.get(tag)
        return label.orientation if label else Orientation.UNKNOWN

    def classified(self) -> dict[str, Orientation]:
        """Hashtags labeled L, N or R; '?' and unreached hashtags are left out."""
        return {
            tag: lab.orientation
            for tag, lab in self.labels.items()
            if lab.orientation is not Orientation.UNKNOWN
        }


def _transition_matrix(graph: LabeledGraph) -> sp.csr_matrix:
    n = graph.n_nodes
    weights = graph.weights.astype(np.float64)
    row_sum = np.add.reduceat(weights, graph.indptr[:-1]) if n else np.zeros(0)
    data = weights / np.repeat(row_sum, np.diff(graph.indptr))
    return sp.csr_matrix((data, graph.indices, graph.indptr), shape=(n, n))


def propagate_labels(
    graph: LabeledGraph,
    seeds: Mapping[str, Orientation],
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> HashtagClassification:
    if not seeds:
        raise ValueError("label propagation needs at least one seed label")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")

    n, k = graph.n_nodes, len(ORIENTATIONS)
    seed_idx: list[int] = []
    seed_cls: list[int] = []
    missing = []
    for tag, label in seeds.items():
        if tag not in graph:
            missing.append(tag)
            continue
        seed_idx.append(graph.index_of(tag))
        seed_cls.append(Orientation(label).code)
    if missing:
        logger.warning("dropping %d seed hashtag(s) absent from the graph: %s",
                       len(missing), ", ".join(sorted(missing)[:10]))
    if not seed_idx:
        raise ValueError("none of the seed hashtags occur in the co-occurrence network")

    seed_idx_arr = np.array(seed_idx, dtype=np.int64)
    clamp = np.zeros((len(seed_idx), k))
    clamp[np.arange(len(seed_idx)), seed_cls] = 1.0

    dist = np.full((n, k), 1.0 / k)
    dist[seed_idx_arr] = clamp
    transition = _transition_matrix(graph)

    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        nxt = transition @ dist
        nxt[seed_idx_arr] = clamp
        change = float(np.max(np.abs(nxt - dist))) if n else 0.0
        dist = nxt
        if change < tol:
            converged = True
            break
    if not converged:
        logger.warning("label propagation stopped at max_iter=%d before reaching tol=%g",
                       max_iter, tol)

    adjacency = sp.csr_matrix((np.ones(len(graph.indices)), graph.indices, graph.indptr),
                              shape=(n, n))
    _, component = connected_components(adjacency, directed=False)
    seeded = np.zeros(component.max() + 1 if n else 0, dtype=bool)
    seeded[component[seed_idx_arr]] = True
    reachable = seeded[component]

    is_seed = np.zeros(n, dtype=bool)
    is_seed[seed_idx_arr] = True
    winner = np.argmax(dist, axis=1)
    labels: dict[str, HashtagLabel] = {}
    for i, tag in enumerate(graph.ids):
        if is_seed[i]:
            labels[tag] = HashtagLabel(ORIENTATIONS[winner[i]], SEED, 1.0)
        elif reachable[i]:
            labels[tag] = HashtagLabel(ORIENTATIONS[winner[i]], PROPAGATED,
                                       float(dist[i, winner[i]]))
        else:
            labels[tag] = HashtagLabel(Orientation.UNKNOWN, PROPAGATED, 0.0)
    return HashtagClassification(labels, dist, it, converged)


def fleiss_kappa(matrix: Sequence[Sequence[int]] | np.ndarray) -> float:
    """Fleiss' kappa of an items x categories count matrix."""
    counts = np.asarray(matrix, dtype=np.float64)
    if counts.ndim != 2 or counts.shape[0] < 2:
        raise ValueError("need a 2-D matrix with at least two items")
    if np.any(counts < 0) or np.any(counts != np.round(counts)):
        raise ValueError("ratings must be non-negative integers")
    raters = counts.sum(axis=1)
    n = raters[0]
    if n < 2 or np.any(raters != n):
        raise ValueError("every item must be rated by the same number (>= 2) of raters")

    items = counts.shape[0]
    p_item = (np.sum(counts * counts, axis=1) - n) / (n * (n - 1))
    p_bar = float(p_item.mean())
    p_cat = counts.sum(axis=0) / (items * n)
    p_e = float(np.sum(p_cat * p_cat))
    if p_e == 1.0:
        if p_bar == 1.0:
            return 1.0
        raise ValueError("kappa undefined: expected agreement is 1")
    if p_bar == 1.0:
        return 1.0
    return (p_bar - p_e) / (1.0 - p_e)


@dataclass
class StabilityResult:
    kappa: float
    items: list[str]
    trials: list[HashtagClassification]
    hidden: list[list[str]]


def stability_eval(
    graph: LabeledGraph,
    seeds: Mapping[str, Orientation],
    hide_fraction: float,
    trials: int,
    rng_seed: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    workers: int = 1,
) -> StabilityResult:
    """Re-run propagation ``trials`` times with a random share of seeds hidden.

    Each trial acts as one rater; the items are the seed hashtags hidden in at
    least one trial. Trial ``i`` draws from ``rng_seed + i``.
    """
    if not 0 < hide_fraction < 1:
        raise ValueError("hide_fraction must lie strictly between 0 and 1")
    if trials < 2:
        raise ValueError("stability evaluation needs at least two trials")
    present = {t: Orientation(o) for t, o in seeds.items() if t in graph}
    if not present:
        raise ValueError("none of the seed hashtags occur in the co-occurrence network")
    tags = list(present)
    classes = {present[t] for t in tags}
    n_hide = max(1, int(round(hide_fraction * len(tags))))
    if n_hide >= len(tags):
        raise ValueError("hide_fraction would hide every seed")

    def run_trial(i: int) -> tuple[list[str], HashtagClassification]:
        rng = np.random.default_rng(rng_seed + i)
        for _ in range(MAX_REDRAWS):
            hidden_idx = rng.choice(len(tags), size=n_hide, replace=False)
            hidden = {tags[j] for j in hidden_idx}
            kept = {t: present[t] for t in tags if t not in hidden}
            if {present[t] for t in kept} == classes:
                break
        else:
            raise ValueError(f"trial {i}: could not keep a seed of every class "
                             f"after {MAX_REDRAWS} redraws")
        hidden_list = [t for t in tags if t in hidden]
        return hidden_list, propagate_labels(graph, kept, tol, max_iter)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_trial, range(trials)))
    else:
        results = [run_trial(i) for i in range(trials)]

    hidden_any: set[str] = set()
    for hidden, _ in results:
        hidden_any.update(hidden)
    items = [t for t in tags if t in hidden_any]
    counts = np.zeros((len(items), len(ORIENTATIONS)), dtype=np.int64)
    for row, tag in enumerate(items):
        for _, result in results:
            counts[row, result.orientation(tag).code] += 1
    kappa = fleiss_kappa(counts)
    return StabilityResult(kappa, items, [r for _, r in results], [h for h, _ in results])


def read_seed_file(path: str | Path) -> dict[str, Orientation]:
    """Read a ``hashtag,orientation`` CSV (a header row is optional)."""
    seeds: dict[str, Orientation] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or not "".join(row).strip():
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'hashtag,orientation'")
            tag, label = row[0].strip(), row[1].strip()
            if lineno == 1 and (tag.lower(), label.lower()) == ("hashtag", "orientation"):
                continue
            seeds[normalize_hashtag(tag)] = Orientation.parse(label)
    return seeds


def normalize_hashtag(tag: str) -> str:
    return tag.strip().lstrip("#").lower()


def write_classification(path: str | Path, classification: HashtagClassification) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["hashtag", "orientation", "provenance", "confidence"])
        for tag, lab in classification.labels.items():
            writer.writerow([tag, lab.orientation.value, lab.provenance, repr(lab.confidence)])


def read_classification(path: str | Path) -> HashtagClassification:
    labels = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            labels[row["hashtag"]] = HashtagLabel(
                Orientation.parse(row["orientation"]), row["provenance"], float(row["confidence"])
            )
    return HashtagClassification(labels)
