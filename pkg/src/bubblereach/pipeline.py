"""Batch pipeline from tweet records to polarization reports.

Stages run in order: ingest, classify (hashtag labels), polarity (weekly
user P(H)), network (weekly retweet graphs), centrality and rank (bubble
reachers), stats, rp (entity polarity), correlate and nullmodel. Each stage
only consumes the outputs of earlier stages, and every stage has a public
function so the CLI can re-run it from files written by a previous run.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from datetime import date, datetime
from pathlib import Path
from typing import Iterable, Sequence
from zoneinfo import ZoneInfo

from . import centrality as cent
from .graph import LabeledGraph, Orientation, RetweetEvent, build_cooccurrence_network, \
    build_retweet_network, write_edgelist
from .labeling import HashtagClassification, normalize_hashtag, propagate_labels, \
    read_seed_file, write_classification
from .polarity import KINDS, EngagementRecord, UserPolarity, classify_user, entity_rp, \
    entity_table_rows, hashtag_counts, null_model, user_polarity, write_engagement
from .stats import DOMAIN_FILTERS, USER_FILTERS, UndefinedStatistic, assortativity, \
    engagement_correlation, polarization_summary

logger = logging.getLogger(__name__)

MAX_MALFORMED_SHARE = 0.5
CORRELATION_HEADER = ["test_id", "filter", "n", "pearson_r", "pearson_p",
                      "spearman_rho", "spearman_p"]


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: str):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineConfig:
    tweets: list[Path]
    seeds: Path
    output: Path
    min_tweets: int = 5
    top_k: int = 100
    tol: float = 1e-6
    max_iter: int = 1000
    seed: int = 0
    timezone: str = "UTC"
    week_start: str = "monday"
    exclude_domains: Path | None = None
    null_replicates: int = 100
    workers: int = 1
    fmt: str = "csv"

    def __post_init__(self) -> None:
        self.tweets = [Path(p) for p in self.tweets]
        self.seeds = Path(self.seeds)
        self.output = Path(self.output)
        if self.week_start != "monday":
            raise ValueError("weeks always start on Monday")
        if self.fmt not in ("csv", "json"):
            raise ValueError("format must be 'csv' or 'json'")
        if self.min_tweets < 1 or self.top_k < 1 or self.workers < 1:
            raise ValueError("min_tweets, top_k and workers must be >= 1")
        if self.null_replicates < 2:
            raise ValueError("null_replicates must be >= 2")
        ZoneInfo(self.timezone)


@dataclass(frozen=True)
class Tweet:
    tweet_id: str
    user: str
    timestamp: int
    hashtags: tuple[str, ...]
    retweeted_user: str | None = None
    domain: str | None = None
    content: str | None = None
    topic: str | None = None

    def entity(self, kind: str) -> str | None:
        return getattr(self, kind)

    def as_event(self, week: int) -> RetweetEvent:
        return RetweetEvent(self.retweeted_user, self.user, week, self.hashtags,
                            self.domain, self.content, self.topic)


@dataclass
class IngestResult:
    tweets: list[Tweet]
    lines: int = 0
    dropped: int = 0
    reasons: dict[str, int] = field(default_factory=dict)

    def summary(self) -> dict:
        return {"lines": self.lines, "tweets": len(self.tweets), "dropped": self.dropped,
                "reasons": dict(sorted(self.reasons.items()))}


def _optional_str(value, name: str) -> str | None:
    if value is None or value == "":
        return None
    if not isinstance(value, (str, int)) or isinstance(value, bool):
        raise ValueError(f"bad {name}")
    return str(value)


def _parse_tweet(line: str) -> Tweet:
    rec = json.loads(line)
    if not isinstance(rec, dict):
        raise ValueError("not an object")
    user = _optional_str(rec.get("user_id"), "user_id")
    if user is None:
        raise ValueError("missing user_id")
    ts = rec.get("timestamp")
    if isinstance(ts, bool) or not isinstance(ts, (int, float)) or not math.isfinite(ts):
        raise ValueError("bad timestamp")
    tags = rec.get("hashtags", [])
    if not isinstance(tags, list) or not all(isinstance(t, str) for t in tags):
        raise ValueError("bad hashtags")
    tags = tuple(t for t in (normalize_hashtag(t) for t in tags) if t)
    return Tweet(
        tweet_id=_optional_str(rec.get("tweet_id"), "tweet_id") or "",
        user=user,
        timestamp=int(ts),
        hashtags=tags,
        retweeted_user=_optional_str(rec.get("retweeted_user_id"), "retweeted_user_id"),
        domain=_optional_str(rec.get("domain_id"), "domain_id"),
        content=_optional_str(rec.get("content_id"), "content_id"),
        topic=_optional_str(rec.get("topic_id"), "topic_id"),
    )


def ingest(path: str | Path) -> IngestResult:
    """Parse a JSON-lines tweet file, skipping (and counting) malformed lines."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise PipelineError("ingest", f"cannot read {path}: {exc}") from exc
    result = IngestResult([])
    reasons: Counter[str] = Counter()
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        result.lines += 1
        try:
            tweet = _parse_tweet(line)
        except json.JSONDecodeError:
            reasons["invalid json"] += 1
            continue
        except ValueError as exc:
            reasons[str(exc)] += 1
            continue
        if not tweet.tweet_id:
            tweet = Tweet(f"{path.name}:{lineno}", *_fields_after_id(tweet))
        result.tweets.append(tweet)
    result.dropped = sum(reasons.values())
    result.reasons = dict(reasons)
    if result.lines and result.dropped / result.lines > MAX_MALFORMED_SHARE:
        raise PipelineError(
            "ingest", f"{result.dropped} of {result.lines} lines in {path} are malformed; "
            "is this the normalized tweet format?")
    return result


def _fields_after_id(t: Tweet) -> tuple:
    return (t.user, t.timestamp, t.hashtags, t.retweeted_user, t.domain, t.content, t.topic)


def assign_weeks(tweets: Sequence[Tweet], timezone: str = "UTC") -> list[int]:
    """1-based Monday-to-Sunday week index of each tweet, relative to the first."""
    tz = ZoneInfo(timezone)
    mondays: list[date] = []
    for t in tweets:
        day = datetime.fromtimestamp(t.timestamp, tz).date()
        mondays.append(date.fromordinal(day.toordinal() - day.weekday()))
    if not mondays:
        return []
    first = min(mondays)
    return [(m - first).days // 7 + 1 for m in mondays]


def classify_hashtags(
    tweets: Iterable[Tweet], seeds: dict[str, Orientation], tol: float, max_iter: int
) -> HashtagClassification:
    graph = build_cooccurrence_network(t.hashtags for t in tweets)
    if graph.n_nodes == 0:
        raise ValueError("no hashtag co-occurs with another; the co-occurrence network is empty")
    return propagate_labels(graph, seeds, tol, max_iter)


def weekly_polarities(
    tweets: Sequence[Tweet],
    weeks: Sequence[int],
    classes: dict[str, Orientation],
    min_tweets: int,
) -> dict[int, dict[str, UserPolarity]]:
    """P(H) per active user and week, from tweets carrying a classified hashtag."""
    per_user: dict[tuple[int, str], list[Tweet]] = defaultdict(list)
    for t, w in zip(tweets, weeks):
        if any(tag in classes for tag in t.hashtags):
            per_user[(w, t.user)].append(t)
    out: dict[int, dict[str, UserPolarity]] = {}
    for (week, user), mine in sorted(per_user.items()):
        if len(mine) < min_tweets:
            continue
        h_l, h_n, h_r = hashtag_counts((tag for t in mine for tag in t.hashtags), classes)
        p = user_polarity(h_l, h_n, h_r)
        out.setdefault(week, {})[user] = UserPolarity(user, week, p, classify_user(p),
                                                      h_l, h_n, h_r)
    return out


def weekly_networks(
    tweets: Sequence[Tweet],
    weeks: Sequence[int],
    classes: dict[str, Orientation],
    polarities: dict[int, dict[str, UserPolarity]],
) -> tuple[dict[int, LabeledGraph], int]:
    """Retweet graph per week among users with a P(H) that week.

    Returns the graphs and the number of retweets dropped because one side had
    no polarity.
    """
    events: dict[int, list[RetweetEvent]] = defaultdict(list)
    dropped = 0
    for t, w in zip(tweets, weeks):
        if t.retweeted_user is None or not any(tag in classes for tag in t.hashtags):
            continue
        users = polarities.get(w, {})
        if t.user in users and t.retweeted_user in users:
            events[w].append(t.as_event(w))
        else:
            dropped += 1
    graphs = {}
    for week in sorted(polarities):
        orient = {u: p.orientation for u, p in polarities[week].items()}
        graphs[week] = build_retweet_network(events.get(week, []), orient)
    return graphs, dropped


def engagement_records(
    tweets: Sequence[Tweet],
    weeks: Sequence[int],
    polarities: dict[int, dict[str, UserPolarity]],
    reachers: dict[int, set[str]],
    excluded_domains: set[str] = frozenset(),
) -> list[EngagementRecord]:
    """One record per (retweet of a bubble reacher, entity kind present)."""
    records = []
    for t, w in zip(tweets, weeks):
        if t.retweeted_user is None or t.retweeted_user not in reachers.get(w, ()):
            continue
        user = polarities.get(w, {}).get(t.user)
        if user is None or t.domain in excluded_domains:
            continue
        for kind in KINDS:
            entity = t.entity(kind)
            if entity is not None:
                records.append(EngagementRecord(t.user, user.p_h, entity, kind, w, t.tweet_id))
    return records


def correlation_rows(records: Sequence[EngagementRecord]) -> tuple[list[list], list[list]]:
    """Rows shaped like the user-vs-entity and domain-vs-entity correlation tables."""
    user_rows, domain_rows = [], []
    kinds_present = {r.kind for r in records}
    for kind in KINDS:
        for flt in USER_FILTERS:
            user_rows.append(_corr_row(f"user_vs_{kind}", flt, records, kind,
                                       kind in kinds_present, user_filter=flt))
    for kind in ("content", "topic"):
        ok = kind in kinds_present and "domain" in kinds_present
        for flt in DOMAIN_FILTERS:
            domain_rows.append(_corr_row(f"domain_vs_{kind}", flt, records, kind, ok,
                                         domain_filter=flt))
    return user_rows, domain_rows


def _corr_row(test_id, flt, records, kind, available, **filters) -> list:
    if not available:
        return [test_id, flt, 0, "", "", "", ""]
    try:
        res = engagement_correlation(records, kind, **filters)
    except ValueError as exc:
        logger.info("%s/%s: %s", test_id, flt, exc)
        n = 0 if "no records" in str(exc) else ""
        return [test_id, flt, n, "", "", "", ""]
    return [test_id, flt, res.n, repr(res.pearson_r), repr(res.pearson_p),
            repr(res.spearman_rho), repr(res.spearman_p)]


NULL_HEADER = ["test_id", "filter", "model", "replicates", "n", "pearson_mean",
               "pearson_maxdev", "spearman_mean", "spearman_maxdev"]


def null_model_rows(records: Sequence[EngagementRecord], replicates: int, seed: int) -> list[list]:
    rows = []
    test = 0
    for kind in KINDS:
        for flt in USER_FILTERS:
            subset = [r for r in records if r.kind == kind and
                      (flt == "all" or
                       (classify_user(r.p_h) is Orientation.N) == (flt == "neutral"))]
            for mode in ("A", "B"):
                row = [f"user_vs_{kind}", flt, mode, replicates, len(subset)]
                try:
                    res = null_model(subset, mode, replicates, seed + test)
                    row += [repr(res.pearson_mean), repr(res.pearson_maxdev),
                            repr(res.spearman_mean), repr(res.spearman_maxdev)]
                except ValueError as exc:
                    logger.info("null model %s/%s/%s: %s", kind, flt, mode, exc)
                    row += ["", "", "", ""]
                rows.append(row)
            test += 1
    return rows


def write_table(path: Path, header: Sequence[str], rows: Iterable[Sequence], fmt: str) -> Path:
    """Write ``rows`` as CSV or as a JSON list of objects; returns the path used."""
    path = path.with_suffix("." + fmt)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    else:
        objs = [dict(zip(header, row)) for row in rows]
        path.write_text(json.dumps(objs, indent=1) + "\n", encoding="utf-8")
    return path


USER_HEADER = ["user_id", "week", "p_h", "orientation", "h_l", "h_n", "h_r"]


def write_users(path: Path, polarities: dict[int, dict[str, UserPolarity]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(USER_HEADER)
        for week in sorted(polarities):
            for u in polarities[week].values():
                writer.writerow([u.user, u.week, repr(u.p_h), u.orientation.value,
                                 u.h_l, u.h_n, u.h_r])


def read_users(path: str | Path) -> dict[int, dict[str, UserPolarity]]:
    out: dict[int, dict[str, UserPolarity]] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            week = int(row["week"])
            out.setdefault(week, {})[row["user_id"]] = UserPolarity(
                row["user_id"], week, float(row["p_h"]), Orientation.parse(row["orientation"]),
                int(row["h_l"]), int(row["h_n"]), int(row["h_r"]))
    return out


def read_exclusions(path: Path | None) -> set[str]:
    if path is None:
        return set()
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return {ln.strip().lower() for ln in lines if ln.strip() and not ln.startswith("#")}


def _fmt(x: float | None) -> str:
    return "" if x is None else repr(float(x))


class _Run:
    def __init__(self, config: PipelineConfig):
        self.config = config
        self.out = config.output
        self.files: list[Path] = []
        self.stages: list[str] = []

    def table(self, name: str, header, rows) -> None:
        self.files.append(write_table(self.out / name, header, rows, self.config.fmt))

    def manifest(self, complete: bool, error: PipelineError | None = None) -> None:
        files = {}
        for p in sorted(set(self.files)):
            if p.exists():
                files[p.relative_to(self.out).as_posix()] = \
                    hashlib.sha256(p.read_bytes()).hexdigest()
        doc = {"complete": complete, "stages": self.stages, "files": files}
        if error is not None:
            doc["failed_stage"] = error.stage
            doc["error"] = error.cause
        (self.out / "MANIFEST.json").write_text(
            json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def run_pipeline(config: PipelineConfig) -> dict:
    """Run every stage and write the report bundle to ``config.output``.

    Returns the manifest document. On a stage failure the partial outputs and
    a manifest marked incomplete are written before the error is re-raised.
    """
    config.output.mkdir(parents=True, exist_ok=True)
    run = _Run(config)
    try:
        _execute(run)
    except PipelineError as exc:
        run.manifest(False, exc)
        raise
    run.manifest(True)
    return json.loads((config.output / "MANIFEST.json").read_text(encoding="utf-8"))


def _stage(run: _Run, name: str):
    run.stages.append(name)
    logger.info("stage %s", name)
    return name


def _execute(run: _Run) -> None:
    cfg = run.config
    out = run.out

    stage = _stage(run, "ingest")
    tweets: list[Tweet] = []
    summaries = {}
    for path in cfg.tweets:
        res = ingest(path)
        tweets.extend(res.tweets)
        summaries[path.name] = res.summary()
    if not tweets:
        raise PipelineError(stage, "no tweets in the input")
    tweets.sort(key=lambda t: (t.timestamp, t.tweet_id))
    ingest_path = out / "ingest.json"
    ingest_path.write_text(json.dumps(summaries, indent=1, sort_keys=True) + "\n",
                           encoding="utf-8")
    run.files.append(ingest_path)

    stage = _stage(run, "classify")
    try:
        seeds = read_seed_file(cfg.seeds)
        missing = {Orientation.L, Orientation.N, Orientation.R} - set(seeds.values())
        if missing:
            raise ValueError("seed labels lack class(es) "
                             + ", ".join(sorted(o.value for o in missing)))
        classification = classify_hashtags(tweets, seeds, cfg.tol, cfg.max_iter)
    except (OSError, ValueError) as exc:
        raise PipelineError(stage, str(exc)) from exc
    hashtags_path = out / "hashtags.csv"
    write_classification(hashtags_path, classification)
    run.files.append(hashtags_path)
    classes = classification.classified()

    stage = _stage(run, "polarity")
    weeks = assign_weeks(tweets, cfg.timezone)
    polarities = weekly_polarities(tweets, weeks, classes, cfg.min_tweets)
    if not polarities:
        raise PipelineError(
            stage, f"no user has {cfg.min_tweets} or more tweets with a classified hashtag "
            "in any week")
    users_path = out / "users.csv"
    write_users(users_path, polarities)
    run.files.append(users_path)

    stage = _stage(run, "network")
    try:
        graphs, dropped = weekly_networks(tweets, weeks, classes, polarities)
    except ValueError as exc:
        raise PipelineError(stage, str(exc)) from exc
    for week, graph in graphs.items():
        path = out / f"week_{week:02d}" / "network.tsv"
        path.parent.mkdir(parents=True, exist_ok=True)
        write_edgelist(graph, path)
        run.files.append(path)

    stage = _stage(run, "centrality")
    reachers: dict[int, set[str]] = {}
    for week, graph in graphs.items():
        if graph.n_nodes == 0:
            reachers[week] = set()
            continue
        try:
            scores = cent.all_centralities(graph, cfg.workers)
        except ValueError as exc:
            raise PipelineError(stage, f"week {week}: {exc}") from exc
        wdir = out / f"week_{week:02d}"
        cent.write_scores_csv(wdir / "centrality.csv", list(scores.values()))
        cent.write_scores_csv(wdir / "centrality_minmax.csv",
                              [cent.normalize_minmax(s) for s in scores.values()])
        run.files += [wdir / "centrality.csv", wdir / "centrality_minmax.csv"]
        ranking = cent.top_k(scores["intergroup"], cfg.top_k)
        reachers[week] = {node for node, _ in ranking}
        run.table(f"week_{week:02d}/top_k", ["rank", "node_id", "orientation", "intergroup"],
                  [[i + 1, node, graph.orientation_of(node).value, repr(x)]
                   for i, (node, x) in enumerate(ranking)])

    stage = _stage(run, "stats")
    pol_rows, assort_rows = [], []
    for week in sorted(polarities):
        values = [u.p_h for u in polarities[week].values()]
        try:
            summary = polarization_summary(values)
            pol_rows.append([week, summary.n, repr(summary.variance), repr(summary.kurtosis),
                             repr(summary.degree)])
        except (UndefinedStatistic, ValueError) as exc:
            logger.info("week %d polarization: %s", week, exc)
            pol_rows.append([week, len(values), "", "", ""])
        graph = graphs[week]
        cells = []
        for classes_filter in (None, (Orientation.L, Orientation.R)):
            try:
                cells.append(_fmt(assortativity(graph, classes_filter)))
            except ValueError as exc:
                logger.info("week %d assortativity: %s", week, exc)
                cells.append("")
        assort_rows.append([week, graph.n_nodes, graph.n_edges] + cells)
    run.table("polarization", ["week", "n", "variance", "kurtosis", "degree"], pol_rows)
    run.table("assortativity", ["week", "nodes", "edges", "all_nodes", "l_and_r_nodes"],
              assort_rows)

    stage = _stage(run, "rp")
    try:
        excluded = read_exclusions(cfg.exclude_domains)
    except OSError as exc:
        raise PipelineError(stage, str(exc)) from exc
    records = engagement_records(tweets, weeks, polarities, reachers, excluded)
    eng_path = out / "engagement.csv"
    write_engagement(eng_path, records)
    run.files.append(eng_path)
    for kind in KINDS:
        subset = [r for r in records if r.kind == kind]
        polarities_k = entity_rp(subset) if subset else []
        header, rows = entity_table_rows(polarities_k)
        run.table(f"entities_{kind}", header, rows)
        header, rows = entity_table_rows(polarities_k, use_counts=True)
        run.table(f"entity_counts_{kind}", header, rows)

    stage = _stage(run, "correlate")
    user_rows, domain_rows = correlation_rows(records)
    run.table("correlations_user", CORRELATION_HEADER, user_rows)
    run.table("correlations_domain", CORRELATION_HEADER, domain_rows)

    stage = _stage(run, "nullmodel")
    run.table("nullmodels", NULL_HEADER, null_model_rows(records, cfg.null_replicates, cfg.seed))

    summary_path = out / "summary.json"
    summary_path.write_text(json.dumps({
        "tweets": len(tweets),
        "weeks": sorted(polarities),
        "users_per_week": {str(w): len(p) for w, p in sorted(polarities.items())},
        "retweets_dropped_without_polarity": dropped,
        "classified_hashtags": len(classes),
        "engagement_records": len(records),
    }, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    run.files.append(summary_path)
