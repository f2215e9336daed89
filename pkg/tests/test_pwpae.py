import csv

import numpy as np
import pytest
from hypothesis import given, strategies as st

from driftstream.core import ConfigError, InvariantError, derive_seed
from driftstream.ensembles import ARFClassifier
from driftstream.pwpae import (BASE_LEARNERS, FusionCounter, PWPAEClassifier, WeightTraceWriter, error_rate,
                               fuse, performance_weight)
from driftstream.streams import ConceptSwitchConfig, generate_concept_switch


@pytest.mark.parametrize("processed, wrong, expected", [(100, 25, 0.25), (0, 0, 0.0), (3, 3, 1.0)])
def test_error_rate(processed, wrong, expected):
    assert error_rate(processed, wrong) == expected


def test_error_rate_inconsistent_counters():
    with pytest.raises(InvariantError):
        error_rate(3, 4)


def test_weight_values():
    assert performance_weight(0.0) == 1000.0
    # values pinned from the closed form 1 / (e + 0.001)
    assert performance_weight(0.25) == 3.9840637450199203
    assert performance_weight(1.0) == 0.9990009990009991
    assert performance_weight(0.0) / performance_weight(1.0) == pytest.approx(1001.0)


@given(st.integers(1, 10**6), st.data())
def test_weight_monotone(n, data):
    # error rates are count ratios, so they differ by at least 1/n^2
    a = data.draw(st.integers(0, n))
    b = data.draw(st.integers(0, n))
    if a < b:
        assert performance_weight(a / n) > performance_weight(b / n)


def test_weight_rejects_bad_inputs():
    with pytest.raises(ConfigError):
        performance_weight(0.1, epsilon=0)
    with pytest.raises(ConfigError):
        performance_weight(1.5)


def test_fuse_hand_examples():
    scores = fuse([[0.2, 0.8], [0.6, 0.4]], [1.0, 1.0])
    assert scores == pytest.approx([0.4, 0.6])
    probas = [[0.1, 0.9]] + [[0.9, 0.1]] * 3
    scores = fuse(probas, [1000, 1, 1, 1])
    assert scores[1] > scores[0]


def test_fuse_cost_counter():
    counter = FusionCounter()
    fuse([[0.5, 0.5]] * 4, [1.0] * 4, counter)
    fuse([[0.2, 0.3, 0.5]] * 4, [1.0] * 4, counter)
    assert counter.ops == 4 * 2 + 4 * 3


def test_untrained_fusion_is_uniform_class_zero():
    m = PWPAEClassifier(random_state=0)
    cls, dist = m.predict_fused([0.1, 0.2])
    assert cls == 0 and dist == [0.5, 0.5]


def _stream(n=1000, seed=3):
    return generate_concept_switch(ConceptSwitchConfig(length=n, n_features=4, drift_position=n // 2,
                                                       noise=0.05, seed=seed)).to_list()


def test_first_instance_uses_plain_average():
    m = PWPAEClassifier(random_state=1)
    rec = m.process_one([0.3, 0.6, 0.1, 0.9], 1)
    assert rec.snapshot.weights == (1000.0,) * 4
    assert rec.distribution == [0.5, 0.5]


def test_counters_and_weights_use_prior_instances_only():
    m = PWPAEClassifier(random_state=2, n_members=3)
    data = _stream(600)
    for t, (x, y) in enumerate(data):
        before = list(m.misclassified_) if t else [0] * 4
        rec = m.process_one(x, y)
        assert rec.snapshot.index == t
        assert rec.snapshot.error_rates == tuple(
            (b / t if t else 0.0) for b in before)
        assert m.processed_ == [t + 1] * 4
        wrong = [int(p != y) for p in rec.learner_predictions]
        assert m.misclassified_ == [b + w for b, w in zip(before, wrong)]


def test_predict_then_learn_equals_process_one():
    data = _stream(500)
    a = PWPAEClassifier(random_state=5, n_members=3)
    b = PWPAEClassifier(random_state=5, n_members=3)
    for x, y in data:
        pa = a.process_one(x, y)
        dist = b.predict_proba_one(x)
        b.learn_one(x, y)
        assert pa.distribution == dist
    assert a.misclassified_ == b.misclassified_


def test_replay_is_identical():
    data = _stream(1000)

    def run():
        m = PWPAEClassifier(random_state=9, n_members=4)
        return [m.process_one(x, y) for x, y in data]

    assert run() == run()


def test_base_learner_matches_standalone():
    data = _stream(800)
    m = PWPAEClassifier(random_state=7, n_members=4)
    solo = ARFClassifier(n_members=4, detector="adwin", random_state=derive_seed(7, "arf-adwin"))
    for x, y in data:
        m.process_one(x, y)
        solo.learn_one(x, y)
    probe = _stream(50, seed=11)
    assert [m.learners_[0].predict_proba_one(x) for x, _ in probe] == [solo.predict_proba_one(x) for x, _ in probe]


def test_weight_trace_writer(tmp_path):
    m = PWPAEClassifier(random_state=1, n_members=2)
    path = tmp_path / "w.csv"
    with WeightTraceWriter(path) as w:
        for x, y in _stream(20):
            w.write(m.process_one(x, y).snapshot)
    rows = list(csv.reader(open(path)))
    assert rows[0][0] == "instance_index" and len(rows[0]) == 1 + 2 * len(BASE_LEARNERS)
    assert len(rows) == 21 and rows[1][2] == "1000.0"


def test_sklearn_fit_predict():
    data = _stream(600)
    X = np.array([x for x, _ in data])
    y = np.array([t for _, t in data])
    m = PWPAEClassifier(random_state=0, n_members=3).fit(X, y)
    assert m.predict(X[:10]).shape == (10,)
    assert m.get_params()["epsilon"] == 0.001
    with pytest.raises(ConfigError):
        PWPAEClassifier(epsilon=0).fit(X, y)
