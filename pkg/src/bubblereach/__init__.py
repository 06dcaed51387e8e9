"""Polarization analysis of retweet networks and bubble-reacher ranking."""

from .centrality import (
    CentralityScores,
    all_centralities,
    betweenness,
    bridgeness,
    intergroup_bridging,
    normalize_minmax,
    top_k,
)
from .graph import LabeledGraph, Orientation, RetweetEvent, build_cooccurrence_network, \
    build_retweet_network
from .labeling import fleiss_kappa, propagate_labels, stability_eval
from .polarity import EngagementRecord, classify_user, entity_rp, null_model, user_polarity
from .stats import assortativity, correlate, engagement_correlation, polarization_summary

__version__ = "0.1.0"

__all__ = [
    "CentralityScores", "EngagementRecord", "LabeledGraph", "Orientation", "RetweetEvent",
    "all_centralities", "assortativity", "betweenness", "bridgeness",
    "build_cooccurrence_network", "build_retweet_network", "classify_user", "correlate",
    "engagement_correlation", "entity_rp", "fleiss_kappa", "intergroup_bridging",
    "normalize_minmax", "null_model", "polarization_summary", "propagate_labels",
    "stability_eval", "top_k", "user_polarity",
]
