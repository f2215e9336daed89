import hashlib

import numpy as np
import pytest

from driftstream.core import ConfigError, DataError
from driftstream.streams import (ConceptSwitchConfig, LinearConcept, generate_bernoulli_stream,
                                 generate_concept_switch, open_csv_stream, write_csv)


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_csv_first_seen_label_map(tmp_path):
    p = _write(tmp_path / "d.csv", "f1,f2,label\n1,2,normal\n3,4,abnormal\n5,6,normal\n")
    s = open_csv_stream(p, "label")
    rows = s.to_list()
    assert len(rows) == 3
    assert s.label_map == {"normal": 0, "abnormal": 1}
    assert rows[1].features == (3.0, 4.0) and rows[1].label == 1


def test_csv_limit(tmp_path):
    body = "".join(f"{i},{i % 2}\n" for i in range(10))
    p = _write(tmp_path / "d.csv", "f1,label\n" + body)
    assert len(open_csv_stream(p, "label", limit=2).to_list()) == 2


def test_csv_non_numeric_names_row(tmp_path):
    p = _write(tmp_path / "d.csv", "f1,f2,label\n1,2,a\nabc,4,b\n5,6,a\n")
    with pytest.raises(DataError, match="row 2"):
        open_csv_stream(p, "label").to_list()


@pytest.mark.parametrize("text, match", [
    ("", "empty"),
    ("f1,label\n", "no data"),
    ("f1,other\n1,2\n", "label column"),
])
def test_csv_structural_errors(tmp_path, text, match):
    p = _write(tmp_path / "d.csv", text)
    with pytest.raises(DataError, match=match):
        open_csv_stream(p, "label")


def test_csv_missing_file(tmp_path):
    with pytest.raises(DataError, match="no such file"):
        open_csv_stream(tmp_path / "nope.csv", "label")


def test_csv_empty_cell_rejected(tmp_path):
    p = _write(tmp_path / "d.csv", "f1,f2,label\n1,,a\n")
    with pytest.raises(DataError, match="row 1: empty cell"):
        open_csv_stream(p, "label").to_list()


def test_csv_declared_class_order(tmp_path):
    p = _write(tmp_path / "d.csv", "f1,label\n1,attack\n2,benign\n")
    s = open_csv_stream(p, "label", classes=["benign", "attack"])
    assert [r.label for r in s] == [1, 0]


def test_bernoulli_degenerate_segments():
    assert generate_bernoulli_stream([(0.0, 100)], seed=1) == [0] * 100
    assert generate_bernoulli_stream([(1.0, 50)], seed=1) == [1] * 50


def test_bernoulli_mean():
    xs = generate_bernoulli_stream([(0.2, 10_000)], seed=11)
    assert 0.19 <= np.mean(xs) <= 0.21


def test_bernoulli_rejects_empty():
    with pytest.raises(ConfigError):
        generate_bernoulli_stream([])


def test_abrupt_switch_boundary():
    a = LinearConcept.axis(2, 0)
    b = LinearConcept(( -1.0, 0.0), -0.5)  # the complement of a
    s = generate_concept_switch(ConceptSwitchConfig(length=200, n_features=2, drift_position=100,
                                                    concept_a=a, concept_b=b, seed=3))
    X, y = s.to_arrays()
    assert y[99] == a.label(X[99:100])[0]
    assert y[100] == b.label(X[100:101])[0]
    assert (s.concept_ids[:100] == 0).all() and (s.concept_ids[100:] == 1).all()


def test_gradual_mixing_rises():
    first, second = [], []
    for seed in range(50):
        s = generate_concept_switch(ConceptSwitchConfig(length=400, n_features=3, drift_kind="gradual",
                                                        drift_position=100, drift_width=100, seed=seed))
        ids = s.concept_ids
        first.append(ids[100:150].mean())
        second.append(ids[150:200].mean())
        assert ids[:100].sum() == 0 and ids[200:].all()
    # linear ramp: expected 0.25 and 0.75
    assert np.mean(first) < np.mean(second)
    assert abs(np.mean(first) - 0.25) < 0.05 and abs(np.mean(second) - 0.75) < 0.05


def test_label_noise_rate():
    s = generate_concept_switch(ConceptSwitchConfig(length=10_000, n_features=4, noise=0.1, seed=5))
    assert 0.09 <= s.flipped.mean() <= 0.11
    X, y = s.to_arrays()
    clean = np.where(s.concept_ids == 1, s.concept_b.label(X), s.concept_a.label(X))
    assert ((clean != y) == s.flipped).all()


@pytest.mark.parametrize("kw", [
    dict(drift_kind="abrupt", drift_width=5),
    dict(drift_kind="gradual", drift_width=0),
    dict(drift_kind="gradual", drift_position=9_500, drift_width=1_000),
    dict(noise=0.5),
    dict(drift_kind="sideways"),
])
def test_concept_config_validation(kw):
    with pytest.raises(ConfigError):
        ConceptSwitchConfig(**kw).validate()


def _digest(stream):
    h = hashlib.sha256()
    for x, y in stream:
        h.update(repr((x, y)).encode())
    return h.hexdigest()


def test_replay_is_identical():
    cfg = ConceptSwitchConfig(length=2_000, drift_kind="gradual", drift_position=500, drift_width=500,
                              noise=0.05, seed=42)
    assert _digest(generate_concept_switch(cfg)) == _digest(generate_concept_switch(cfg))
    assert _digest(generate_concept_switch(cfg)) != _digest(generate_concept_switch(
        ConceptSwitchConfig(**{**cfg.__dict__, "seed": 43})))


def test_csv_round_trip(tmp_path):
    s = generate_concept_switch(ConceptSwitchConfig(length=300, n_features=5, drift_position=150, noise=0.1, seed=8))
    path = tmp_path / "s.csv"
    write_csv(path, s, s.schema)
    back = open_csv_stream(path, "label", classes=["0", "1"]).to_list()
    assert back == s.to_list()
