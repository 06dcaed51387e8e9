from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bubblereach.graph import Orientation
from bubblereach.polarity import (
    BIN_LABELS,
    EngagementRecord,
    classify_user,
    entity_rp,
    entity_table_rows,
    hashtag_counts,
    null_model,
    polarity_bin,
    read_engagement,
    rp_from_bins,
    user_polarity,
    write_engagement,
)
from bubblereach.synthetic import generate_engagement

from _oracles import polarity_oracle, records_from_counts, rp_oracle


counts = st.integers(0, 500)


@given(counts, counts, counts)
def test_user_polarity_antisymmetric_and_bounded(l, n, r):
    if l + n + r == 0:
        return
    p = user_polarity(l, n, r)
    assert -1.0 <= p <= 1.0
    assert user_polarity(r, n, l) == pytest.approx(-p, abs=1e-15)


@given(counts, counts)
def test_user_polarity_symmetric_input_is_zero(lr, n):
    if 2 * lr + n == 0:
        return
    assert user_polarity(lr, n, lr) == 0.0


def test_user_polarity_single_class_fallbacks():
    assert user_polarity(4, 0, 0) == -1.0
    assert user_polarity(0, 7, 0) == 0.0
    assert user_polarity(0, 0, 1) == 1.0


def test_user_polarity_frozen_values():
    assert user_polarity(2, 9, 1) == -9 / 58
    assert user_polarity(3, 1, 0) == -0.5
    assert user_polarity(5, 0, 2) == 0.0


def test_user_polarity_random_multisets_match_oracle():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        l, n, r = (int(x) for x in rng.integers(0, 60, 3))
        if l + n + r == 0:
            continue
        assert user_polarity(l, n, r) == pytest.approx(polarity_oracle(l, n, r), abs=1e-12)


def test_user_polarity_rejects_bad_counts():
    with pytest.raises(ValueError):
        user_polarity(0, 0, 0)
    with pytest.raises(ValueError):
        user_polarity(-1, 2, 0)


def test_hashtag_counts_ignores_unclassified():
    classes = {"a": Orientation.L, "b": Orientation.N, "c": Orientation.R}
    assert hashtag_counts(["a", "a", "c", "zz", "b"], classes) == (2, 1, 1)


@pytest.mark.parametrize("p, cls", [(-1 / 3, "N"), (1 / 3, "N"), (-0.34, "L"), (0.34, "R"),
                                    (0.0, "N"), (-1.0, "L"), (1.0, "R")])
def test_classify_user_thirds(p, cls):
    assert classify_user(p) is Orientation(cls)


def test_classify_user_open_outer_boundary():
    assert classify_user(float(np.nextafter(1 / 3, 1))) is Orientation.R
    assert classify_user(float(np.nextafter(-1 / 3, -1))) is Orientation.L


@pytest.mark.parametrize("p, label", [(0.35, "+0.4"), (-0.35, "-0.4"), (0.05, "+0.1"),
                                      (0.04, "+0.0"), (-1.0, "-1.0"), (0.94, "+0.9"),
                                      (0.95, "+1.0")])
def test_polarity_bin(p, label):
    assert BIN_LABELS[polarity_bin(p)] == label


def test_polarity_range_checked():
    with pytest.raises(ValueError):
        polarity_bin(1.01)
    with pytest.raises(ValueError):
        EngagementRecord("u", 1.5, "e", "content")
    with pytest.raises(ValueError):
        EngagementRecord("u", 0.5, "e", "hashtag")


def test_rp_frozen_two_entity_fixture():
    recs = ([EngagementRecord(f"a{k}", -1.0, "e1", "domain") for k in range(10)]
            + [EngagementRecord(f"b{k}", 0.5, "e1", "domain") for k in range(5)]
            + [EngagementRecord(f"c{k}", -1.0, "e2", "domain") for k in range(2)]
            + [EngagementRecord(f"d{k}", 0.5, "e2", "domain") for k in range(8)])
    rp = {e.entity: e.rp_h for e in entity_rp(recs)}
    assert rp == {"e1": -11 / 32, "e2": 3 / 20}


def test_rp_single_bin_poles():
    m = np.zeros((2, 21))
    m[0, 0] = 7
    m[1, 20] = 3
    rp = [e.rp_h for e in entity_rp(records_from_counts(m))]
    assert rp == [-1.0, 1.0]


def test_rp_symmetric_two_bin_is_zero():
    m = np.zeros((1, 21))
    m[0, 5] = m[0, 15] = 4
    assert entity_rp(records_from_counts(m))[0].rp_h == 0.0


def test_rp_only_neutral_bin_is_zero():
    m = np.zeros((1, 21))
    m[0, 10] = 9
    assert entity_rp(records_from_counts(m))[0].rp_h == 0.0


def test_rp_duplication_invariance():
    rng = np.random.default_rng(7)
    m = rng.integers(0, 5, (4, 21))
    base = [e.rp_h for e in entity_rp(records_from_counts(m))]
    doubled = [e.rp_h for e in entity_rp(records_from_counts(2 * m))]
    assert doubled == pytest.approx(base, abs=1e-12)


def test_rp_random_matrices_match_oracle():
    rng = np.random.default_rng(99)
    for _ in range(50):
        n_ent = int(rng.integers(1, 8))
        m = rng.integers(0, 6, (n_ent, 21)) * (rng.random((n_ent, 21)) < 0.4)
        m[:, rng.integers(21)] += 1
        got = [e.rp_h for e in entity_rp(records_from_counts(m))]
        assert got == pytest.approx(rp_oracle(m), abs=1e-12)


def test_rp_from_bins_matches_definition():
    row = np.zeros(21)
    row[0], row[12], row[10] = 0.5, 1.0, 1.0
    assert rp_from_bins(row) == pytest.approx((-0.5 + 0.2) / 2)


def test_entity_rp_rejects_mixed_or_empty():
    with pytest.raises(ValueError):
        entity_rp([])
    with pytest.raises(ValueError):
        entity_rp([EngagementRecord("u", 0, "e", "content"),
                   EngagementRecord("u", 0, "d", "domain")])


def test_entity_table_rows_shape():
    header, rows = entity_table_rows(entity_rp(records_from_counts(np.eye(2, 21))))
    assert header[:3] == ["entity_id", "kind", "rp_h"] and len(header) == 24
    assert len(rows) == 2 and all(len(r) == 24 for r in rows)


def test_engagement_csv_roundtrip(tmp_path):
    recs = generate_engagement(10, 3, 0.5, seed=1, n_records=40)
    path = tmp_path / "e.csv"
    write_engagement(path, recs)
    assert read_engagement(path) == recs


def test_null_models_on_engagement_fixture():
    recs = generate_engagement(500, 50, 1.0, seed=0)
    a = null_model(recs, "A", 30, rng_seed=1)
    b = null_model(recs, "B", 30, rng_seed=1)
    assert abs(b.pearson_mean) < 0.05
    assert b.pearson_mean < a.pearson_mean < 0.25
    assert a.pearson_maxdev >= 0 and len(a.pearson) == 30


def test_null_model_is_deterministic():
    recs = generate_engagement(50, 5, 1.0, seed=3, n_records=300)
    one = null_model(recs, "A", 5, rng_seed=9)
    two = null_model(recs, "A", 5, rng_seed=9)
    assert np.array_equal(one.pearson, two.pearson)
    assert np.array_equal(one.spearman, two.spearman)


def test_null_model_preconditions():
    recs = generate_engagement(20, 4, 1.0, seed=0, n_records=100)
    with pytest.raises(ValueError):
        null_model(recs, "A", 1, rng_seed=0)
    with pytest.raises(ValueError):
        null_model(recs, "C", 5, rng_seed=0)
    with pytest.raises(ValueError):
        null_model([], "B", 5, rng_seed=0)
