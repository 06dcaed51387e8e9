"""User polarity P(H), entity relative polarity RP(H) and circularity null models."""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .graph import Orientation

KINDS = ("domain", "content", "topic")
N_BINS = 21
BIN_POLARITY = np.arange(-10, 11) / 10.0
ZERO_BIN = 10
BIN_LABELS = tuple(f"{x:+.1f}" for x in BIN_POLARITY)


@dataclass(frozen=True)
class UserPolarity:
    user: str
    week: int
    p_h: float
    orientation: Orientation
    h_l: int
    h_n: int
    h_r: int


@dataclass(frozen=True)
class EngagementRecord:
    """A retweet joining the retweeting user's polarity to one engaged entity.

    Records created from the same retweet share ``event`` so that, e.g., a
    content can be paired with the domain that published it.
    """

    user: str
    p_h: float
    entity: str
    kind: str
    week: int = 1
    event: str | None = None

    def __post_init__(self) -> None:
        if not -1.0 <= self.p_h <= 1.0:
            raise ValueError(f"p_h={self.p_h} outside [-1, 1] for user {self.user!r}")
        if self.kind not in KINDS:
            raise ValueError(f"unknown entity kind {self.kind!r}")


@dataclass(frozen=True, eq=False)
class EntityPolarity:
    entity: str
    kind: str
    counts: np.ndarray
    bins: np.ndarray
    rp_h: float


def user_polarity(h_l: int, h_n: int, h_r: int) -> float:
    """Class-weighted polarity of a user's L/N/R hashtag counts, in [-1, 1].

    Each class is weighted by the mean size of the two other classes over the
    total, so frequent classes are damped. When only one class is present
    every populated weight is zero and the result is that class's pole.
    """
    if min(h_l, h_n, h_r) < 0:
        raise ValueError("hashtag counts must be non-negative")
    total = h_l + h_n + h_r
    if total == 0:
        raise ValueError("user has no classified hashtags")
    # Weights scaled by 2 * total: the common factor cancels and the
    # arithmetic stays in exact integers up to the final division.
    w_l = h_n + h_r
    w_n = h_r + h_l
    w_r = h_l + h_n
    den = h_l * w_l + h_n * w_n + h_r * w_r
    if den == 0:
        if h_l:
            return -1.0
        if h_r:
            return 1.0
        return 0.0
    return (h_r * w_r - h_l * w_l) / den


def classify_user(p_h: float) -> Orientation:
    """Thirds of the polarity scale; the neutral third is closed on both ends."""
    if not -1.0 <= p_h <= 1.0:
        raise ValueError(f"polarity {p_h!r} outside [-1, 1]")
    if p_h < -1 / 3:
        return Orientation.L
    if p_h > 1 / 3:
        return Orientation.R
    return Orientation.N


def polarity_bin(p_h: float) -> int:
    """Index (0..20) of the nearest 0.1-spaced bin; halves round away from zero."""
    if not -1.0 <= p_h <= 1.0:
        raise ValueError(f"polarity {p_h!r} outside [-1, 1]")
    return int(_bin_indices(np.array([p_h]))[0])


def _bin_indices(p: np.ndarray) -> np.ndarray:
    # The 1e-9 nudge makes decimal halves like 0.35 round up despite binary error.
    step = np.floor(np.abs(p) * 10 + 0.5 + 1e-9)
    return (ZERO_BIN + np.copysign(step, p)).astype(np.int64)


def _rp_values(p: np.ndarray, entity_idx: np.ndarray, n_entities: int):
    counts = np.zeros((n_entities, N_BINS))
    np.add.at(counts, (entity_idx, _bin_indices(p)), 1.0)
    bins = _normalize(counts)
    return counts, bins, _rp_from_bins(bins)


def entity_rp(records: Sequence[EngagementRecord]) -> list[EntityPolarity]:
    """Relative polarity of every entity engaged in ``records`` (one kind).

    Counts land in a entities x 21 histogram, each column is scaled by its
    maximum over all entities, each row is min-max scaled, and RP(H) is the
    mean of cell x bin polarity over the non-zero cells outside the 0.0 bin.
    """
    if not records:
        raise ValueError("no engagement records")
    kinds = {r.kind for r in records}
    if len(kinds) != 1:
        raise ValueError(f"records mix entity kinds: {sorted(kinds)}")
    kind = kinds.pop()

    index: dict[str, int] = {}
    for r in records:
        index.setdefault(r.entity, len(index))
    p = np.array([r.p_h for r in records])
    entity_idx = np.array([index[r.entity] for r in records])
    counts, bins, rp = _rp_values(p, entity_idx, len(index))
    return [
        EntityPolarity(entity, kind, counts[i], bins[i], float(rp[i]))
        for entity, i in index.items()
    ]


def _normalize(counts: np.ndarray) -> np.ndarray:
    col_max = counts.max(axis=0)
    scaled = np.divide(counts, col_max, out=np.zeros_like(counts), where=col_max > 0)
    lo = scaled.min(axis=1, keepdims=True)
    hi = scaled.max(axis=1, keepdims=True)
    span = hi - lo
    # A row with every bin equal carries no shape; treat it as uniformly full.
    return np.divide(scaled - lo, span, out=np.ones_like(scaled), where=span > 0)


def _rp_from_bins(bins: np.ndarray) -> np.ndarray:
    used = (bins != 0)
    used[:, ZERO_BIN] = False
    n_used = used.sum(axis=1)
    total = np.where(used, bins * BIN_POLARITY, 0.0).sum(axis=1)
    return np.divide(total, n_used, out=np.zeros(len(bins)), where=n_used > 0)


def rp_from_bins(bins: Sequence[float]) -> float:
    """RP(H) of one already-normalized 21-bin row."""
    row = np.asarray(bins, dtype=np.float64).reshape(1, N_BINS)
    return float(_rp_from_bins(row)[0])


def rp_lookup(records: Sequence[EngagementRecord], kind: str) -> dict[str, float]:
    subset = [r for r in records if r.kind == kind]
    if not subset:
        return {}
    return {e.entity: e.rp_h for e in entity_rp(subset)}


@dataclass
class NullModelResult:
    mode: str
    n: int
    pearson: np.ndarray
    spearman: np.ndarray

    @property
    def pearson_mean(self) -> float:
        return float(self.pearson.mean())

    @property
    def pearson_maxdev(self) -> float:
        return float(np.max(np.abs(self.pearson - self.pearson.mean())))

    @property
    def spearman_mean(self) -> float:
        return float(self.spearman.mean())

    @property
    def spearman_maxdev(self) -> float:
        return float(np.max(np.abs(self.spearman - self.spearman.mean())))


def null_model(
    records: Sequence[EngagementRecord],
    mode: str,
    replicates: int,
    rng_seed: int,
) -> NullModelResult:
    """Correlation of user and entity polarity under randomized user polarities.

    Every replicate keeps who retweeted what and redraws each (user, week)
    polarity uniformly on [-1, 1]. Model ``"A"`` recomputes RP(H) from the
    redrawn polarities; model ``"B"`` draws RP(H) uniformly per entity.
    """
    from .stats import correlate

    if mode not in ("A", "B"):
        raise ValueError(f"null model must be 'A' or 'B', got {mode!r}")
    if replicates < 2:
        raise ValueError("null model needs at least two replicates")
    if not records:
        raise ValueError("no engagement records")
    kinds = {r.kind for r in records}
    if len(kinds) != 1:
        raise ValueError(f"records mix entity kinds: {sorted(kinds)}")

    user_keys = list(dict.fromkeys((r.user, r.week) for r in records))
    user_pos = {key: i for i, key in enumerate(user_keys)}
    entities = list(dict.fromkeys(r.entity for r in records))
    entity_pos = {e: i for i, e in enumerate(entities)}
    rec_user = np.array([user_pos[(r.user, r.week)] for r in records])
    rec_entity = np.array([entity_pos[r.entity] for r in records])

    pearson = np.empty(replicates)
    spearman = np.empty(replicates)
    for i in range(replicates):
        rng = np.random.default_rng([rng_seed, i])
        p_user = rng.uniform(-1.0, 1.0, len(user_keys))
        x = p_user[rec_user]
        if mode == "A":
            y = _rp_values(x, rec_entity, len(entities))[2][rec_entity]
        else:
            y = rng.uniform(-1.0, 1.0, len(entities))[rec_entity]
        res = correlate(x, y)
        pearson[i] = res.pearson_r
        spearman[i] = res.spearman_rho
    return NullModelResult(mode, len(records), pearson, spearman)


ENGAGEMENT_FIELDS = ["user_id", "p_h", "entity_id", "kind", "week", "event_id"]


def write_engagement(path: str | Path, records: Iterable[EngagementRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ENGAGEMENT_FIELDS)
        for r in records:
            writer.writerow([r.user, repr(r.p_h), r.entity, r.kind, r.week, r.event or ""])


def read_engagement(path: str | Path) -> list[EngagementRecord]:
    with open(path, encoding="utf-8", newline="") as fh:
        return [
            EngagementRecord(
                user=row["user_id"],
                p_h=float(row["p_h"]),
                entity=row["entity_id"],
                kind=row["kind"],
                week=int(row["week"]),
                event=row.get("event_id") or None,
            )
            for row in csv.DictReader(fh)
        ]


def entity_table_rows(polarities: Iterable[EntityPolarity], use_counts: bool = False):
    header = ["entity_id", "kind", "rp_h"] + [f"bin_{label}" for label in BIN_LABELS]
    rows = []
    for e in polarities:
        cells = e.counts if use_counts else e.bins
        rows.append([e.entity, e.kind, repr(e.rp_h)] + [repr(float(x)) for x in cells])
    return header, rows


def hashtag_counts(tags: Iterable[str], classes: dict[str, Orientation]) -> tuple[int, int, int]:
    """Sizes of the L/N/R multisets among ``tags``; unclassified tags are ignored."""
    tally = Counter(classes.get(t) for t in tags)
    return tally[Orientation.L], tally[Orientation.N], tally[Orientation.R]
