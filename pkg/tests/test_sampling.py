import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from driftstream.core import ConfigError, LabeledInstance, make_rng
from driftstream.sampling import (KMeansClusterSampler, KMeansConfig, cluster_sample, cluster_sample_indices,
                                  kmeans_fit, proportional_allocation, round_half_up)


def blobs(n_each=100, seed=0, radius=0.5):
    rng = make_rng(seed)
    out = []
    for cx, cy in ((0.0, 0.0), (10.0, 10.0)):
        ang = rng.random(n_each) * 2 * np.pi
        r = radius * np.sqrt(rng.random(n_each))
        out.append(np.column_stack([cx + r * np.cos(ang), cy + r * np.sin(ang)]))
    return np.vstack(out)


def test_two_blobs_recovered():
    X = blobs()
    model = kmeans_fit(X, KMeansConfig(k=2, seed=1))
    # brute-force nearest-centre check
    d = ((X[:, None, :] - model.centroids[None]) ** 2).sum(axis=2)
    assert (model.assignments == d.argmin(axis=1)).all()
    assert len(set(model.assignments[:100])) == 1 and len(set(model.assignments[100:])) == 1
    centers = sorted(model.centroids.tolist())
    assert np.allclose(centers, [[0, 0], [10, 10]], atol=0.2)


def test_identical_points_single_cluster():
    X = np.tile([[3.0, -1.0]], (20, 1))
    model = kmeans_fit(X, KMeansConfig(k=1))
    assert model.centroids.tolist() == [[3.0, -1.0]] and model.inertia == 0.0


def test_identical_points_collapse_k():
    X = np.tile([[1.0, 1.0]], (10, 1))
    with pytest.warns(RuntimeWarning, match="collapses"):
        model = kmeans_fit(X, KMeansConfig(k=3))
    assert model.k == 1 and model.collapsed_from == 3


def test_unit_square_exact_fit():
    X = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
    model = kmeans_fit(X, KMeansConfig(k=4, seed=2))
    assert model.inertia == 0.0 and sorted(model.cluster_sizes()) == [1, 1, 1, 1]


def test_k_exceeds_points():
    with pytest.raises(ConfigError):
        kmeans_fit(np.zeros((3, 2)), KMeansConfig(k=4))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 6), st.sampled_from(["kmeanspp", "random"]))
def test_inertia_never_increases(seed, k, init):
    X = make_rng(seed).normal(size=(150, 3))
    model = kmeans_fit(X, KMeansConfig(k=k, seed=seed, init=init))
    hist = model.inertia_history
    assert all(b <= a * (1 + 1e-12) + 1e-12 for a, b in zip(hist, hist[1:]))


@pytest.mark.parametrize("v, expected", [(0.5, 1), (1.5, 2), (2.5, 3), (2.4999, 2), (0.0, 0)])
def test_round_half_up(v, expected):
    assert round_half_up(v) == expected


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(1, 500), min_size=1, max_size=12), st.floats(0.001, 1.0))
def test_allocation_total_and_deviation(sizes, fraction):
    counts = proportional_allocation(sizes, fraction)
    assert sum(counts) == round_half_up(fraction * sum(sizes))
    for s, c in zip(sizes, counts):
        assert abs(c - fraction * s) <= 1 and 0 <= c <= s


def test_allocation_tie_goes_to_lower_index():
    assert proportional_allocation([5, 5], 0.1) == [1, 0]


def test_equal_blobs_give_equal_share():
    X = blobs()
    res = cluster_sample_indices(X, 0.1, KMeansConfig(k=2, seed=0))
    assert (res.indices < 100).sum() == 10 and (res.indices >= 100).sum() == 10


def test_fraction_one_is_identity():
    data = [LabeledInstance((float(i), float(i % 7)), i % 2) for i in range(50)]
    assert cluster_sample(data, 1.0, KMeansConfig(k=3)) == data


def test_output_keeps_record_order_and_seed():
    X = make_rng(1).random((300, 3))
    data = [LabeledInstance(tuple(x), 0) for x in X.tolist()]
    a = cluster_sample(data, 0.2, KMeansConfig(seed=4))
    b = cluster_sample(data, 0.2, KMeansConfig(seed=4))
    assert a == b
    pos = [data.index(r) for r in a]
    assert pos == sorted(pos)


def test_class_ratio_preserved():
    diffs = []
    for seed in range(50):
        rng = make_rng(seed)
        X = blobs(seed=seed)
        y = np.concatenate([(rng.random(100) < 0.1), (rng.random(100) < 0.9)]).astype(int)
        res = cluster_sample_indices(X, 0.1, KMeansConfig(k=2, seed=seed))
        diffs.append(y[res.indices].mean() - y.mean())
    assert abs(np.mean(diffs)) <= 0.05


@pytest.mark.parametrize("fraction", [0.0, -0.1, 1.5])
def test_invalid_fraction(fraction):
    with pytest.raises(ConfigError):
        cluster_sample_indices(np.zeros((10, 2)), fraction)


def test_fraction_too_small_to_select():
    with pytest.raises(ConfigError):
        cluster_sample_indices(make_rng(0).random((10, 2)), 0.05)


def test_sampler_estimator():
    X = blobs()
    y = np.r_[np.zeros(100), np.ones(100)]
    Xs, ys = KMeansClusterSampler(fraction=0.1, n_clusters=2).fit_resample(X, y)
    assert Xs.shape == (20, 2) and ys.sum() == 10


def test_scaling_only_inside_sampling():
    X = np.column_stack([make_rng(0).random(100) * 1000, make_rng(1).random(100)])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        res = cluster_sample_indices(X, 0.1, KMeansConfig(k=3))
    assert len(res.indices) == 10 and X[:, 0].max() > 1
