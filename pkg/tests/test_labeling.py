from __future__ import annotations

import logging

import numpy as np
import pytest
from statsmodels.stats import inter_rater

from bubblereach.graph import Orientation, build_cooccurrence_network
from bubblereach.labeling import (
    PROPAGATED,
    SEED,
    fleiss_kappa,
    normalize_hashtag,
    propagate_labels,
    read_classification,
    read_seed_file,
    stability_eval,
    write_classification,
)
from bubblereach.synthetic import two_cluster_cooccurrence

L, N, R, U = Orientation.L, Orientation.N, Orientation.R, Orientation.UNKNOWN

# 10 items rated by 14 raters into 5 categories; kappa = 4211/20059 in exact arithmetic
FLEISS_FIXTURE = [[0, 0, 0, 0, 14], [0, 2, 6, 4, 2], [0, 0, 3, 5, 6], [0, 3, 9, 2, 0],
                  [2, 2, 8, 1, 1], [7, 7, 0, 0, 0], [3, 2, 6, 3, 0], [2, 5, 3, 2, 2],
                  [6, 5, 2, 1, 0], [0, 2, 2, 3, 7]]


def test_fleiss_fixture():
    assert fleiss_kappa(FLEISS_FIXTURE) == pytest.approx(4211 / 20059, abs=1e-15)


# 7 items, 6 raters, 4 categories; kappa = 1417/3265 in exact arithmetic
SIX_RATERS = [[6, 0, 0, 0], [3, 3, 0, 0], [0, 4, 1, 1], [1, 1, 2, 2], [0, 0, 6, 0],
              [2, 0, 0, 4], [0, 5, 0, 1]]


def test_fleiss_six_rater_fixture():
    assert fleiss_kappa(SIX_RATERS) == pytest.approx(1417 / 3265, abs=1e-15)


def test_fleiss_unanimous_is_one():
    assert fleiss_kappa([[6, 0, 0, 0], [0, 6, 0, 0], [0, 0, 0, 6]]) == 1.0
    assert fleiss_kappa([[5, 0], [5, 0]]) == 1.0


@pytest.mark.parametrize("seed", range(10))
def test_fleiss_matches_statsmodels(seed):
    rng = np.random.default_rng(seed)
    raters = int(rng.integers(2, 12))
    counts = np.array([rng.multinomial(raters, rng.dirichlet(np.ones(4)))
                       for _ in range(int(rng.integers(3, 30)))])
    assert fleiss_kappa(counts) == pytest.approx(inter_rater.fleiss_kappa(counts), abs=1e-12)


def test_fleiss_rejects_bad_input():
    with pytest.raises(ValueError):
        fleiss_kappa([[2, 1], [1, 1]])
    with pytest.raises(ValueError):
        fleiss_kappa([[3, 0]])
    with pytest.raises(ValueError):
        fleiss_kappa([[-1, 3], [1, 1]])


def test_two_disconnected_cliques():
    tags_l = [f"l{k}" for k in range(5)]
    tags_r = [f"r{k}" for k in range(5)]
    g = build_cooccurrence_network([tags_l, tags_r])
    res = propagate_labels(g, {"l0": L, "r0": R})
    assert all(res.orientation(t) is L for t in tags_l)
    assert all(res.orientation(t) is R for t in tags_r)
    assert res["l0"].provenance == SEED and res["l1"].provenance == PROPAGATED
    assert res["l3"].confidence == pytest.approx(1.0, abs=1e-4)
    assert res.converged


def test_harmonic_values_on_a_chain():
    g = build_cooccurrence_network([["a", "x"], ["x", "y"], ["y", "b"]])
    res = propagate_labels(g, {"a": L, "b": R}, tol=1e-12, max_iter=10_000)
    x = res.distributions[g.index_of("x")]
    y = res.distributions[g.index_of("y")]
    np.testing.assert_allclose(x, [2 / 3, 0, 1 / 3, 0], atol=1e-9)
    np.testing.assert_allclose(y, [1 / 3, 0, 2 / 3, 0], atol=1e-9)
    assert res.orientation("x") is L and res.orientation("y") is R


def test_weights_pull_towards_heavier_neighbour():
    g = build_cooccurrence_network([["a", "x"]] * 3 + [["x", "b"]])
    res = propagate_labels(g, {"a": R, "b": L}, tol=1e-12)
    assert res.orientation("x") is R
    assert res["x"].confidence == pytest.approx(0.75)


def test_star_with_neutral_center():
    g = build_cooccurrence_network([["c", f"leaf{k}"] for k in range(5)])
    res = propagate_labels(g, {"c": N})
    for k in range(5):
        assert res.orientation(f"leaf{k}") is N
        assert res[f"leaf{k}"].confidence == 1.0


def test_ties_follow_class_order():
    g = build_cooccurrence_network([["a", "x"], ["x", "b"]])
    res = propagate_labels(g, {"a": R, "b": L})
    assert res.orientation("x") is L
    assert res["x"].confidence == pytest.approx(0.5)


def test_unseeded_component_is_unknown():
    g = build_cooccurrence_network([["a", "b"], ["c", "d"]])
    res = propagate_labels(g, {"a": N})
    assert res.orientation("b") is N
    assert res["c"].orientation is U and res["c"].confidence == 0.0
    assert "c" not in res.classified()


def test_unknown_seed_is_propagated_but_not_classified():
    g = build_cooccurrence_network([["a", "q"], ["q", "b"], ["b", "c"]])
    res = propagate_labels(g, {"a": L, "q": U, "c": R})
    assert res.orientation("q") is U
    assert set(res.classified()) == {"a", "b", "c"}


def test_missing_seeds_warn_and_are_dropped(caplog):
    g = build_cooccurrence_network([["a", "b"]])
    with caplog.at_level(logging.WARNING):
        res = propagate_labels(g, {"a": L, "zzz": R})
    assert "zzz" in caplog.text
    assert res.orientation("b") is L
    with pytest.raises(ValueError):
        propagate_labels(g, {"zzz": R})
    with pytest.raises(ValueError):
        propagate_labels(g, {})


def test_non_convergence_is_reported(caplog):
    g = build_cooccurrence_network([["a", "x"], ["x", "y"], ["y", "z"], ["z", "b"]])
    with caplog.at_level(logging.WARNING):
        res = propagate_labels(g, {"a": L, "b": R}, tol=1e-15, max_iter=2)
    assert not res.converged and res.iterations == 2
    assert "max_iter" in caplog.text


def test_stability_on_two_clusters():
    g, seeds = two_cluster_cooccurrence(seed=1)
    res = stability_eval(g, seeds, 0.1, 30, rng_seed=3)
    assert res.kappa > 0.8
    assert len(res.trials) == 30
    assert all(len(h) == 2 for h in res.hidden)


def test_stability_is_deterministic_and_worker_invariant():
    g, seeds = two_cluster_cooccurrence(seed=2)
    a = stability_eval(g, seeds, 0.2, 8, rng_seed=11)
    b = stability_eval(g, seeds, 0.2, 8, rng_seed=11, workers=4)
    assert a.kappa == b.kappa and a.hidden == b.hidden


def test_stability_preconditions():
    g, seeds = two_cluster_cooccurrence(seed=0)
    with pytest.raises(ValueError):
        stability_eval(g, seeds, 0.1, 1, rng_seed=0)
    with pytest.raises(ValueError):
        stability_eval(g, seeds, 0.0, 5, rng_seed=0)
    with pytest.raises(ValueError):
        stability_eval(g, seeds, 1.0, 5, rng_seed=0)


def test_seed_file_parsing(tmp_path):
    path = tmp_path / "seeds.csv"
    path.write_text("hashtag,orientation\n#TagOne,L\n tag_two , r\n\ntag_three,N\nq,?\n")
    assert read_seed_file(path) == {"tagone": L, "tag_two": R, "tag_three": N, "q": U}
    path.write_text("a,L,extra\n")
    with pytest.raises(ValueError):
        read_seed_file(path)


def test_normalize_hashtag():
    assert normalize_hashtag("  #SomeTag ") == "sometag"


def test_classification_roundtrip(tmp_path):
    g = build_cooccurrence_network([["a", "b"], ["b", "c"]])
    res = propagate_labels(g, {"a": L, "c": R})
    path = tmp_path / "h.csv"
    write_classification(path, res)
    back = read_classification(path)
    assert back.labels == res.labels
