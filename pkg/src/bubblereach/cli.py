"""Command-line interface: one subcommand per pipeline stage plus ``run`` and ``synth``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import centrality as cent
from .graph import Orientation, build_cooccurrence_network, read_edgelist, write_edgelist
from .labeling import read_classification, read_seed_file, stability_eval, \
    write_classification
from .pipeline import CORRELATION_HEADER, NULL_HEADER, PipelineConfig, PipelineError, \
    Tweet, assign_weeks, classify_hashtags, correlation_rows, engagement_records, ingest, \
    null_model_rows, read_exclusions, read_users, run_pipeline, weekly_networks, weekly_polarities, \
    write_table, write_users
from .polarity import KINDS, entity_rp, entity_table_rows, read_engagement, \
    write_engagement
from .stats import UndefinedStatistic, assortativity, polarization_summary
from .synthetic import PlantedBridgeSpec, TweetDatasetSpec, generate_engagement, \
    generate_planted_bridge, generate_tweet_dataset, write_tweet_dataset

def _load_tweets(paths: Sequence[Path]) -> list[Tweet]:
    tweets = []
    for p in paths:
        tweets.extend(ingest(p).tweets)
    tweets.sort(key=lambda t: (t.timestamp, t.tweet_id))
    return tweets


def _week_path(spec: str) -> tuple[int, Path]:
    week, sep, path = spec.partition("=")
    if not sep:
        return 1, Path(spec)
    return int(week), Path(path)


# stage commands


def cmd_classify(args) -> None:
    tweets = _load_tweets(args.tweets)
    seeds = read_seed_file(args.seeds)
    result = classify_hashtags(tweets, seeds, args.tol, args.max_iter)
    write_classification(args.out, result)
    if args.stability_trials:
        graph = build_cooccurrence_network(t.hashtags for t in tweets)
        stab = stability_eval(graph, seeds, args.hide_fraction, args.stability_trials,
                              args.seed, args.tol, args.max_iter)
        print(f"fleiss_kappa={stab.kappa!r} items={len(stab.items)} "
              f"trials={args.stability_trials}")


def cmd_polarity(args) -> None:
    tweets = _load_tweets(args.tweets)
    classes = read_classification(args.hashtags).classified()
    weeks = assign_weeks(tweets, args.timezone)
    polarities = weekly_polarities(tweets, weeks, classes, args.min_tweets)
    if not polarities:
        raise PipelineError("polarity", f"no user has {args.min_tweets} or more tweets with "
                            "a classified hashtag in any week")
    write_users(args.out, polarities)


def cmd_network(args) -> None:
    tweets = _load_tweets(args.tweets)
    classes = read_classification(args.hashtags).classified()
    polarities = read_users(args.users)
    graphs, _ = weekly_networks(tweets, assign_weeks(tweets, args.timezone), classes,
                                polarities)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    for week, graph in graphs.items():
        write_edgelist(graph, args.out_dir / f"week_{week:02d}.tsv")


def cmd_centrality(args) -> None:
    graph = read_edgelist(args.graph)
    if args.metric == "all":
        scores = list(cent.all_centralities(graph, args.workers).values())
    else:
        fn = {"betweenness": cent.betweenness, "bridgeness": cent.bridgeness,
              "intergroup": cent.intergroup_bridging}[args.metric]
        scores = [fn(graph, args.workers)]
    if args.normalize:
        scores = [cent.normalize_minmax(s) for s in scores]
    cent.write_scores_csv(args.out, scores)


def cmd_rank(args) -> None:
    matches = [s for s in cent.read_scores_csv(args.scores) if s.metric == args.metric]
    if not matches:
        raise ValueError(f"no {args.metric!r} scores in {args.scores}")
    ranking = cent.top_k(matches[0], args.k)
    rows = [[args.week, i + 1, node, repr(x)] for i, (node, x) in enumerate(ranking)]
    header = ["week", "rank", "node_id", args.metric]
    if args.out is None:
        csv.writer(sys.stdout, lineterminator="\n").writerows([header] + rows)
    else:
        write_table(args.out, header, rows, args.format)


def _read_reachers(paths: Sequence[Path]) -> dict[int, set[str]]:
    reachers: dict[int, set[str]] = {}
    for path in paths:
        with open(path, encoding="utf-8", newline="") as fh:
            for row in csv.DictReader(fh):
                reachers.setdefault(int(row.get("week") or 1), set()).add(row["node_id"])
    return reachers


def cmd_rp(args) -> None:
    if args.engagement is not None:
        records = read_engagement(args.engagement)
    else:
        if not (args.tweets and args.users and args.reachers):
            raise ValueError("give --engagement, or --tweets with --users and --reachers")
        tweets = _load_tweets(args.tweets)
        records = engagement_records(tweets, assign_weeks(tweets, args.timezone),
                                     read_users(args.users), _read_reachers(args.reachers),
                                     read_exclusions(args.exclude_domains))
    args.out_dir.mkdir(parents=True, exist_ok=True)
    if args.engagement is None:
        write_engagement(args.out_dir / "engagement.csv", records)
    for kind in KINDS:
        subset = [r for r in records if r.kind == kind]
        pols = entity_rp(subset) if subset else []
        header, rows = entity_table_rows(pols)
        write_table(args.out_dir / f"entities_{kind}", header, rows, args.format)
        header, rows = entity_table_rows(pols, use_counts=True)
        write_table(args.out_dir / f"entity_counts_{kind}", header, rows, args.format)


def _cell(fn):
    try:
        return repr(fn())
    except ValueError:
        return ""


def cmd_stats(args) -> None:
    polarities = read_users(args.users)
    graphs = dict(_week_path(g) for g in args.graph)
    pol_rows, assort_rows = [], []
    for week in sorted(polarities):
        values = [u.p_h for u in polarities[week].values()]
        try:
            s = polarization_summary(values)
            pol_rows.append([week, s.n, repr(s.variance), repr(s.kurtosis), repr(s.degree)])
        except (UndefinedStatistic, ValueError):
            pol_rows.append([week, len(values), "", "", ""])
        if week in graphs:
            g = read_edgelist(graphs[week])
            assort_rows.append([week, g.n_nodes, g.n_edges, _cell(lambda: assortativity(g)),
                                _cell(lambda: assortativity(g, (Orientation.L, Orientation.R)))])
    args.out_dir.mkdir(parents=True, exist_ok=True)
    write_table(args.out_dir / "polarization", ["week", "n", "variance", "kurtosis", "degree"],
                pol_rows, args.format)
    if assort_rows:
        write_table(args.out_dir / "assortativity",
                    ["week", "nodes", "edges", "all_nodes", "l_and_r_nodes"], assort_rows,
                    args.format)


def cmd_correlate(args) -> None:
    user_rows, domain_rows = correlation_rows(read_engagement(args.engagement))
    args.out_dir.mkdir(parents=True, exist_ok=True)
    write_table(args.out_dir / "correlations_user", CORRELATION_HEADER, user_rows, args.format)
    write_table(args.out_dir / "correlations_domain", CORRELATION_HEADER, domain_rows,
                args.format)


def cmd_nullmodel(args) -> None:
    rows = null_model_rows(read_engagement(args.engagement), args.replicates, args.seed)
    write_table(args.out, NULL_HEADER, rows, args.format)


def cmd_run(args) -> None:
    config = PipelineConfig(
        tweets=args.tweets, seeds=args.seeds, output=args.out_dir,
        min_tweets=args.min_tweets, top_k=args.top_k, tol=args.tol, max_iter=args.max_iter,
        seed=args.seed, timezone=args.timezone, exclude_domains=args.exclude_domains,
        null_replicates=args.replicates, workers=args.workers, fmt=args.format,
    )
    manifest = run_pipeline(config)
    print(f"wrote {len(manifest['files'])} files to {args.out_dir}")


def cmd_synth_bridge(args) -> None:
    spec = PlantedBridgeSpec(n_left=args.n_left, n_right=args.n_right, p_intra=args.p_intra,
                             n_bridges=args.bridges, attach=args.attach, seed=args.seed)
    write_edgelist(generate_planted_bridge(spec), args.out)


def cmd_synth_engagement(args) -> None:
    records = generate_engagement(args.users, args.entities, args.alignment, args.seed,
                                  n_records=args.records, tau=args.tau, kind=args.kind)
    write_engagement(args.out, records)


def cmd_synth_dataset(args) -> None:
    spec = TweetDatasetSpec(users=args.users, weeks=args.weeks,
                            alignment_strength=args.alignment, seed=args.seed)
    tweets, seeds = generate_tweet_dataset(spec)
    tweets_path, seeds_path = write_tweet_dataset(args.out_dir, tweets, seeds)
    print(f"wrote {tweets_path} ({len(tweets)} tweets) and {seeds_path}")


# parser


def _common(p: argparse.ArgumentParser, *names: str) -> None:
    if "tweets" in names:
        p.add_argument("--tweets", type=Path, nargs="+", required=True,
                       help="JSON-lines tweet file(s)")
    if "timezone" in names:
        p.add_argument("--timezone", default="UTC", help="week boundaries (Monday 00:00)")
    if "propagation" in names:
        p.add_argument("--tol", type=float, default=1e-6)
        p.add_argument("--max-iter", type=int, default=1000)
    if "seed" in names:
        p.add_argument("--seed", type=int, default=0)
    if "format" in names:
        p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bubblereach", description="Polarization and bubble-reacher analysis of tweets.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify-hashtags", help="label hashtags from seed labels")
    _common(p, "tweets", "propagation", "seed")
    p.add_argument("--seeds", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--stability-trials", type=int, default=0)
    p.add_argument("--hide-fraction", type=float, default=0.1)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("polarity", help="weekly user polarity P(H)")
    _common(p, "tweets", "timezone")
    p.add_argument("--hashtags", type=Path, required=True)
    p.add_argument("--min-tweets", type=int, default=5)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_polarity)

    p = sub.add_parser("network", help="weekly retweet networks")
    _common(p, "tweets", "timezone")
    p.add_argument("--hashtags", type=Path, required=True)
    p.add_argument("--users", type=Path, required=True)
    p.add_argument("--out-dir", type=Path, required=True)
    p.set_defaults(func=cmd_network)

    p = sub.add_parser("centrality", help="betweenness, bridgeness, intergroup bridging")
    p.add_argument("--graph", type=Path, required=True)
    p.add_argument("--metric", choices=("all",) + cent.METRICS, default="all")
    p.add_argument("--normalize", action="store_true", help="min-max scale to [0, 1]")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_centrality)

    p = sub.add_parser("rank", help="top-k nodes by a centrality")
    _common(p, "format")
    p.add_argument("--scores", type=Path, required=True)
    p.add_argument("--metric", choices=cent.METRICS, default="intergroup")
    p.add_argument("--k", type=int, default=100)
    p.add_argument("--week", type=int, default=1)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("rp", help="entity relative polarity tables")
    _common(p, "timezone", "format")
    p.add_argument("--engagement", type=Path)
    p.add_argument("--tweets", type=Path, nargs="+")
    p.add_argument("--users", type=Path)
    p.add_argument("--reachers", type=Path, nargs="+", help="rank output(s) with a week column")
    p.add_argument("--exclude-domains", type=Path)
    p.add_argument("--out-dir", type=Path, required=True)
    p.set_defaults(func=cmd_rp)

    p = sub.add_parser("stats", help="polarization summary and assortativity")
    _common(p, "format")
    p.add_argument("--users", type=Path, required=True)
    p.add_argument("--graph", nargs="*", default=[], metavar="[WEEK=]PATH")
    p.add_argument("--out-dir", type=Path, required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("correlate", help="user and domain vs entity correlation tables")
    _common(p, "format")
    p.add_argument("--engagement", type=Path, required=True)
    p.add_argument("--out-dir", type=Path, required=True)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("nullmodel", help="circularity null models A and B")
    _common(p, "seed", "format")
    p.add_argument("--engagement", type=Path, required=True)
    p.add_argument("--replicates", type=int, default=100)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_nullmodel)

    p = sub.add_parser("run", help="full pipeline")
    _common(p, "tweets", "timezone", "propagation", "seed", "format")
    p.add_argument("--seeds", type=Path, required=True)
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--min-tweets", type=int, default=5)
    p.add_argument("--top-k", type=int, default=100)
    p.add_argument("--exclude-domains", type=Path)
    p.add_argument("--replicates", type=int, default=100)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_run)

    synth = sub.add_parser("synth", help="synthetic generators").add_subparsers(
        dest="generator", required=True)
    p = synth.add_parser("planted-bridge")
    _common(p, "seed")
    p.add_argument("--n-left", type=int, default=10)
    p.add_argument("--n-right", type=int, default=10)
    p.add_argument("--p-intra", type=float, default=0.6)
    p.add_argument("--bridges", type=int, default=1)
    p.add_argument("--attach", type=int, default=3)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_synth_bridge)
    p = synth.add_parser("engagement")
    _common(p, "seed")
    p.add_argument("--users", type=int, default=500)
    p.add_argument("--entities", type=int, default=50)
    p.add_argument("--alignment", type=float, default=1.0)
    p.add_argument("--records", type=int, default=5000)
    p.add_argument("--tau", type=float, default=0.2)
    p.add_argument("--kind", choices=KINDS, default="content")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_synth_engagement)
    p = synth.add_parser("dataset")
    _common(p, "seed")
    p.add_argument("--users", type=int, default=TweetDatasetSpec.users)
    p.add_argument("--weeks", type=int, default=TweetDatasetSpec.weeks)
    p.add_argument("--alignment", type=float, default=1.0)
    p.add_argument("--out-dir", type=Path, required=True)
    p.set_defaults(func=cmd_synth_dataset)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except PipelineError as exc:
        print(f"error [{exc.stage}]: {exc.cause}", file=sys.stderr)
        return 2
    except (ValueError, OSError, KeyError) as exc:
        print(f"error [{args.command}]: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
