"""Prototype construction and semantic measures.

Statistics are checked against plain Python loops, never against numpy
reductions shared with the implementation.
"""

import math

import numpy as np
import pytest

from gsdp.interchange import FeatureSet, HeadParams
from gsdp.prototype import (
    NoTypicalMembersError,
    PrototypeStore,
    SemanticPrototype,
    build_prototype,
    build_store,
    classify,
    object_distance,
    predict_categories,
    prototypical_distance,
    select_typical,
    semantic_value,
    typicality_score,
)


def oracle_mean_std(rows):
    """Per-column mean and population standard deviation, scalar loops."""
    n = len(rows)
    m = len(rows[0])
    means, stds = [], []
    for j in range(m):
        column = [rows[i][j] for i in range(n)]
        mu = sum(column) / n
        var = sum((x - mu) ** 2 for x in column) / n
        means.append(mu)
        stds.append(math.sqrt(var))
    return means, stds


def small_head():
    # Category 0 fires on the first feature, category 1 on the second.
    return HeadParams(weights=np.array([[2.0, 0.0], [0.0, 2.0]]),
                      biases=np.array([0.0, 0.0]))


def small_set():
    features = np.array([
        [3.0, 0.0],   # clearly category 0
        [2.0, 1.0],   # category 0
        [0.0, 3.0],   # clearly category 1
        [4.0, 0.0],   # labelled 1 but classified 0: atypical
    ])
    return FeatureSet(ids=["a", "b", "c", "d"],
                      labels=np.array([0, 0, 1, 1]),
                      features=features)


def test_classify_argmax_and_tie_break():
    head = small_head()
    assert classify(np.array([3.0, 1.0]), head) == 0
    assert classify(np.array([1.0, 3.0]), head) == 1
    # exact tie goes to the smallest category index
    assert classify(np.array([2.0, 2.0]), head) == 0
    tied = HeadParams(weights=np.zeros((3, 2)), biases=np.zeros(3))
    assert classify(np.array([5.0, -1.0]), tied) == 0


def test_predict_categories_matches_scalar_classify():
    rng = np.random.default_rng(0)
    head = HeadParams(weights=rng.normal(size=(5, 8)),
                      biases=rng.normal(size=5))
    X = rng.normal(size=(40, 8))
    batch = predict_categories(X, head)
    for i in range(40):
        assert batch[i] == classify(X[i], head)


def test_select_typical_applies_top1_filter():
    typical0 = select_typical(small_set(), small_head(), 0)
    assert typical0.shape == (2, 2)
    assert np.array_equal(typical0, [[3.0, 0.0], [2.0, 1.0]])
    typical1 = select_typical(small_set(), small_head(), 1)
    # the mislabelled row d is excluded
    assert np.array_equal(typical1, [[0.0, 3.0]])


def test_build_prototype_statistics():
    proto = build_prototype(small_set(), small_head(), 0)
    means, stds = oracle_mean_std([[3.0, 0.0], [2.0, 1.0]])
    assert np.allclose(proto.mean, means)
    assert np.allclose(proto.std, stds)
    assert proto.n_typical == 2
    assert np.array_equal(proto.weights, [2.0, 0.0])
    assert proto.bias == 0.0


def test_build_prototype_population_std_not_sample():
    fset = FeatureSet(ids=["a", "b"], labels=np.array([0, 0]),
                      features=np.array([[0.0], [2.0]]))
    head = HeadParams(weights=np.array([[1.0]]), biases=np.array([0.0]))
    proto = build_prototype(fset, head, 0)
    # population: sqrt(((0-1)^2 + (2-1)^2) / 2) = 1, sample would give sqrt(2)
    assert proto.std[0] == 1.0


def test_singleton_member_gives_zero_std():
    fset = FeatureSet(ids=["a"], labels=np.array([0]),
                      features=np.array([[5.0, -3.0]]))
    head = HeadParams(weights=np.array([[1.0, 0.0]]), biases=np.array([0.0]))
    proto = build_prototype(fset, head, 0)
    assert np.array_equal(proto.std, [0.0, 0.0])
    assert np.array_equal(proto.mean, [5.0, -3.0])


def test_no_typical_members_raises():
    features = np.array([[0.0, 3.0]])
    fset = FeatureSet(ids=["a"], labels=np.array([0]), features=features)
    with pytest.raises(NoTypicalMembersError):
        build_prototype(fset, small_head(), 0)


def test_build_store_skips_untypical_categories():
    # row b is labelled 1 but the head scores it (0.6, 0.2): category 0
    features = np.array([[3.0, 0.0], [0.3, 0.1]])
    fset = FeatureSet(ids=["a", "b"], labels=np.array([0, 1]),
                      features=features)
    store, skipped = build_store(fset, small_head())
    assert store.categories() == [0]
    assert skipped == [1]


def test_store_rejects_mismatch_and_duplicates():
    store = PrototypeStore(m=2)
    proto = build_prototype(small_set(), small_head(), 0)
    store.add(proto)
    with pytest.raises(ValueError):
        store.add(proto)
    other = PrototypeStore(m=3)
    with pytest.raises(ValueError):
        other.add(proto)
    with pytest.raises(KeyError):
        store.get(9)
    assert 0 in store and 9 not in store


def test_semantic_value_matches_loop():
    rng = np.random.default_rng(1)
    weights = rng.normal(size=6)
    mean = rng.normal(size=6)
    proto = SemanticPrototype(category=0, mean=mean, std=np.zeros(6),
                              weights=weights, bias=0.7, n_typical=1)
    f = rng.normal(size=6)
    want = sum(weights[j] * f[j] for j in range(6)) + 0.7
    assert semantic_value(f, proto) == pytest.approx(want, rel=1e-12)


def test_distances_match_loops():
    rng = np.random.default_rng(2)
    weights = rng.normal(size=6)
    mean = rng.normal(size=6)
    proto = SemanticPrototype(category=0, mean=mean, std=np.zeros(6),
                              weights=weights, bias=0.0, n_typical=1)
    f1, f2 = rng.normal(size=6), rng.normal(size=6)
    want_proto = sum(abs(weights[j]) * abs(f1[j] - mean[j]) for j in range(6))
    want_pair = sum(abs(weights[j]) * abs(f1[j] - f2[j]) for j in range(6))
    assert prototypical_distance(f1, proto) == pytest.approx(want_proto, rel=1e-12)
    assert object_distance(f1, f2, proto) == pytest.approx(want_pair, rel=1e-12)
    assert object_distance(f1, f2, proto) == object_distance(f2, f1, proto)
    assert object_distance(f1, f1, proto) == 0.0


def test_zero_weights_make_distance_a_pseudometric():
    proto = SemanticPrototype(category=0, mean=np.zeros(2), std=np.zeros(2),
                              weights=np.array([0.0, 1.0]), bias=0.0,
                              n_typical=1)
    f1 = np.array([0.0, 0.0])
    f2 = np.array([5.0, 0.0])
    assert not np.array_equal(f1, f2)
    assert object_distance(f1, f2, proto) == 0.0


def test_typicality_score():
    proto = SemanticPrototype(category=0, mean=np.array([1.0, 2.0]),
                              std=np.zeros(2), weights=np.ones(2), bias=0.0,
                              n_typical=1)
    assert typicality_score(np.array([1.0, 2.0]), proto) == math.inf
    assert typicality_score(np.array([1.0, 4.0]), proto) == 0.5


def test_prototype_validation():
    with pytest.raises(ValueError):
        SemanticPrototype(category=0, mean=np.zeros(2), std=-np.ones(2),
                          weights=np.ones(2), bias=0.0, n_typical=1)
    with pytest.raises(ValueError):
        SemanticPrototype(category=0, mean=np.zeros(3), std=np.zeros(2),
                          weights=np.ones(2), bias=0.0, n_typical=1)
    with pytest.raises(ValueError):
        SemanticPrototype(category=0, mean=np.zeros(2), std=np.zeros(2),
                          weights=np.ones(2), bias=math.nan, n_typical=1)
    with pytest.raises(ValueError):
        SemanticPrototype(category=0, mean=np.zeros(2), std=np.zeros(2),
                          weights=np.ones(2), bias=0.0, n_typical=0)


def test_store_iterates_in_category_order():
    fset = FeatureSet(
        ids=["a", "b"], labels=np.array([0, 1]),
        features=np.array([[3.0, 0.0], [0.0, 3.0]]),
    )
    store, skipped = build_store(fset, small_head(), categories=[1, 0])
    assert skipped == []
    assert [p.category for p in store] == [0, 1]
    assert len(store) == 2
