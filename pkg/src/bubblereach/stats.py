"""Polarization summaries, orientation assortativity and correlation tests."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import stats as sps

from .graph import ORIENTATIONS, LabeledGraph, Orientation
from .polarity import EngagementRecord, classify_user, rp_lookup


class UndefinedStatistic(ValueError):
    """The statistic has no value for this input (e.g. zero variance)."""


@dataclass(frozen=True)
class PolarizationSummary:
    n: int
    variance: float
    kurtosis: float
    degree: float


@dataclass(frozen=True)
class CorrelationResult:
    n: int
    pearson_r: float
    pearson_p: float
    spearman_rho: float
    spearman_p: float


def polarization_summary(p_h: Iterable[float]) -> PolarizationSummary:
    """Population variance, excess kurtosis and mean |P(H)|."""
    x = np.asarray(list(p_h), dtype=np.float64)
    if len(x) < 2:
        raise ValueError("polarization summary needs at least two users")
    dev = x - x.mean()
    m2 = float(np.mean(dev**2))
    if m2 == 0:
        raise UndefinedStatistic("kurtosis undefined: every polarity is identical")
    m4 = float(np.mean(dev**4))
    return PolarizationSummary(
        n=len(x), variance=m2, kurtosis=m4 / m2**2 - 3.0, degree=float(np.mean(np.abs(x)))
    )


def mixing_matrix(graph: LabeledGraph) -> np.ndarray:
    """Weighted orientation mixing matrix ``e``, symmetric and summing to 1."""
    k = len(ORIENTATIONS)
    e = np.zeros((k, k))
    o = graph.orientation
    for i, j, w in graph.edges():
        e[o[i], o[j]] += w
        e[o[j], o[i]] += w
    total = e.sum()
    return e / total if total else e


def assortativity(
    graph: LabeledGraph, classes: Iterable[Orientation] | None = None
) -> float:
    """Newman's categorical assortativity of node orientations.

    ``classes`` restricts the graph to nodes of those orientations first,
    e.g. ``(L, R)`` for the network without neutral users.
    """
    if classes is not None:
        codes = {Orientation(c).code for c in classes}
        keep = [i for i in range(graph.n_nodes) if graph.orientation[i] in codes]
        graph = graph.subgraph(keep)
    if graph.n_edges == 0:
        raise ValueError("assortativity needs at least one edge")
    e = mixing_matrix(graph)
    a = e.sum(axis=1)
    expected = float(np.dot(a, a))
    if expected == 1.0:
        raise UndefinedStatistic("assortativity undefined: a single orientation is present")
    return (float(np.trace(e)) - expected) / (1.0 - expected)


def _t_pvalue(r: float, n: int) -> float:
    if abs(r) >= 1.0:
        return 0.0
    t = r * np.sqrt((n - 2) / (1.0 - r * r))
    return float(2.0 * sps.t.sf(abs(t), n - 2))


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    dx = x - x.mean()
    dy = y - y.mean()
    r = float(np.dot(dx, dy) / np.sqrt(np.dot(dx, dx) * np.dot(dy, dy)))
    return max(-1.0, min(1.0, r))


def correlate(x: Sequence[float], y: Sequence[float]) -> CorrelationResult:
    """Pearson and Spearman (average ranks) with two-tailed t-test p-values."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D and of equal length")
    n = len(x)
    if n < 3:
        raise ValueError("correlation needs at least three observations")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise UndefinedStatistic("correlation undefined: a series has zero variance")
    r = _pearson(x, y)
    rho = _pearson(sps.rankdata(x), sps.rankdata(y))
    return CorrelationResult(n, r, _t_pvalue(r, n), rho, _t_pvalue(rho, n))


USER_FILTERS = ("all", "neutral", "polarized")
DOMAIN_FILTERS = ("all", "neutral_domains", "polarized_domains")


def _keep(p: float, flt: str) -> bool:
    if flt == "all":
        return True
    neutral = classify_user(p) is Orientation.N
    return neutral if flt.startswith("neutral") else not neutral


def engagement_correlation(
    records: Sequence[EngagementRecord],
    kind: str,
    *,
    user_filter: str | None = None,
    domain_filter: str | None = None,
) -> CorrelationResult:
    """Correlate engaged-entity RP(H) with user P(H) or with domain RP(H).

    With ``user_filter`` each retweet pairs its user's P(H) with the RP(H) of
    the ``kind`` entity it engaged. With ``domain_filter`` each retweet pairs
    the RP(H) of its domain with the RP(H) of its ``kind`` entity; records are
    joined on their shared ``event``. RP(H) is always computed over all
    records of a kind before filtering.
    """
    if user_filter is not None and domain_filter is not None:
        raise ValueError("give either user_filter or domain_filter, not both")
    rp = rp_lookup(records, kind)
    if domain_filter is None:
        flt = user_filter or "all"
        if flt not in USER_FILTERS:
            raise ValueError(f"unknown user filter {flt!r}")
        pairs = [(r.p_h, rp[r.entity]) for r in records
                 if r.kind == kind and _keep(r.p_h, flt)]
    else:
        flt = domain_filter
        if flt not in DOMAIN_FILTERS:
            raise ValueError(f"unknown domain filter {flt!r}")
        if kind == "domain":
            raise ValueError("domain RP(H) is compared against content or topic RP(H)")
        domain_rp = rp_lookup(records, "domain")
        by_event: dict[str, dict[str, str]] = defaultdict(dict)
        for r in records:
            if r.event is not None and r.kind in ("domain", kind):
                by_event[r.event][r.kind] = r.entity
        pairs = []
        for ev in by_event.values():
            if "domain" in ev and kind in ev:
                d = domain_rp[ev["domain"]]
                if _keep(d, flt):
                    pairs.append((d, rp[ev[kind]]))
    if not pairs:
        raise ValueError(f"no records left after filter {flt!r}")
    x, y = zip(*pairs)
    return correlate(x, y)
