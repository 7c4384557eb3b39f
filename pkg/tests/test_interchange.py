"""File format round trips and failure reporting."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gsdp.descriptor import Signature, Taxonomy, plan_grid
from gsdp.interchange import (
    BINARY_FORMAT,
    CSV_FORMAT,
    FeatureSet,
    FormatError,
    HeadParams,
    read_feature_set,
    read_head,
    read_prototypes,
    read_signatures,
    write_feature_set,
    write_head,
    write_prototypes,
    write_signatures,
)
from gsdp.prototype import PrototypeStore, SemanticPrototype


def f32(values):
    return np.asarray(values, dtype=np.float32).astype(np.float64)


def sample_set(n=6, m=5, seed=0, names=True):
    rng = np.random.default_rng(seed)
    return FeatureSet(
        ids=[f"obj-{i}" for i in range(n)],
        labels=rng.integers(0, 3, size=n),
        features=f32(rng.normal(size=(n, m))),
        category_names=["zero", "one", "two"] if names else None,
    )


def sample_store(m=5, seed=1):
    rng = np.random.default_rng(seed)
    store = PrototypeStore(m=m)
    for category in range(3):
        store.add(SemanticPrototype(
            category=category,
            mean=f32(rng.normal(size=m)),
            std=f32(np.abs(rng.normal(size=m))),
            weights=f32(rng.normal(size=m)),
            bias=float(np.float32(rng.normal())),
            n_typical=category + 1,
        ))
    return store


def sample_signatures(seed=2):
    rng = np.random.default_rng(seed)
    config = plan_grid(5, 2)
    return [
        Signature(values=f32(rng.normal(size=config.signature_length)),
                  taxonomy=Taxonomy.OBJECT, category=i % 3, config=config,
                  object_id=f"obj-{i}")
        for i in range(4)
    ] + [
        Signature(values=f32(rng.normal(size=config.signature_length)),
                  taxonomy=Taxonomy.ABSTRACT_PROTOTYPE, category=0,
                  config=config)
    ]


# ---------------------------------------------------------------------------
# feature sets


@pytest.mark.parametrize("format", [BINARY_FORMAT, CSV_FORMAT])
def test_feature_set_round_trip_is_exact(tmp_path, format):
    fset = sample_set()
    path = tmp_path / "features.dat"
    write_feature_set(fset, path, format=format)
    back = read_feature_set(path, format=format)
    assert back.ids == fset.ids
    assert np.array_equal(back.labels, fset.labels)
    assert np.array_equal(back.features, fset.features)
    assert back.category_names == fset.category_names


def test_feature_set_binary_writes_are_byte_identical(tmp_path):
    fset = sample_set()
    a, b = tmp_path / "a.bin", tmp_path / "b.bin"
    write_feature_set(fset, a)
    write_feature_set(fset, b)
    assert a.read_bytes() == b.read_bytes()


def test_sidecar_carries_names_and_provenance(tmp_path):
    fset = sample_set()
    path = tmp_path / "features.bin"
    write_feature_set(fset, path, provenance="unit test")
    meta = json.loads((tmp_path / "features.meta.json").read_text())
    assert meta["category_names"] == ["zero", "one", "two"]
    assert meta["provenance"] == "unit test"
    no_names = sample_set(names=False)
    bare = tmp_path / "bare.bin"
    write_feature_set(no_names, bare)
    assert not (tmp_path / "bare.meta.json").exists()
    assert read_feature_set(bare).category_names is None


def test_feature_set_rejects_duplicate_ids():
    with pytest.raises(ValueError, match="duplicate id"):
        FeatureSet(ids=["a", "a"], labels=np.array([0, 0]),
                   features=np.zeros((2, 2)))


def test_feature_set_rejects_label_outside_names():
    with pytest.raises(ValueError, match="named categories"):
        FeatureSet(ids=["a"], labels=np.array([3]),
                   features=np.zeros((1, 2)), category_names=["only"])


def test_feature_set_rejects_count_mismatch():
    with pytest.raises(ValueError, match="inconsistent"):
        FeatureSet(ids=["a"], labels=np.array([0, 1]),
                   features=np.zeros((2, 2)))


def test_binary_read_reports_bad_magic(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"NOPE" + b"\x00" * 16)
    with pytest.raises(FormatError, match="bad magic"):
        read_feature_set(path)


def test_binary_read_reports_truncation(tmp_path):
    fset = sample_set()
    path = tmp_path / "features.bin"
    write_feature_set(fset, path)
    data = path.read_bytes()
    path.write_bytes(data[:-3])
    with pytest.raises(FormatError, match="truncated"):
        read_feature_set(path)


def test_binary_read_reports_trailing_bytes(tmp_path):
    fset = sample_set()
    path = tmp_path / "features.bin"
    write_feature_set(fset, path)
    path.write_bytes(path.read_bytes() + b"x")
    with pytest.raises(FormatError, match="trailing"):
        read_feature_set(path)


def test_write_rejects_non_finite(tmp_path):
    fset = sample_set()
    fset.features[0, 0] = np.inf
    with pytest.raises(ValueError, match="finite"):
        write_feature_set(fset, tmp_path / "x.bin")


def test_write_rejects_float32_overflow(tmp_path):
    fset = sample_set()
    fset.features[0, 0] = 1e39
    with pytest.raises(ValueError, match="32-bit"):
        write_feature_set(fset, tmp_path / "x.bin")


def test_csv_read_reports_row_and_problem(tmp_path):
    path = tmp_path / "features.csv"
    path.write_text("id,label,f0,f1\nA,0,1.5,2.5\nB,zero,1,2\n")
    with pytest.raises(FormatError, match="row 2.*non-integer label"):
        read_feature_set(path, format=CSV_FORMAT)
    path.write_text("id,label,f0,f1\nA,0,1.5\n")
    with pytest.raises(FormatError, match="row 1 has 1 feature"):
        read_feature_set(path, format=CSV_FORMAT)
    path.write_text("noid,label,f0\n")
    with pytest.raises(FormatError, match="malformed header"):
        read_feature_set(path, format=CSV_FORMAT)
    path.write_text("")
    with pytest.raises(FormatError, match="empty"):
        read_feature_set(path, format=CSV_FORMAT)


def test_unknown_format_rejected(tmp_path):
    with pytest.raises(ValueError, match="unknown format"):
        write_feature_set(sample_set(), tmp_path / "x", format="xml")
    with pytest.raises(ValueError, match="unknown format"):
        read_feature_set(tmp_path / "x", format="xml")


# ---------------------------------------------------------------------------
# heads


@pytest.mark.parametrize("format", [BINARY_FORMAT, CSV_FORMAT])
def test_head_round_trip_is_exact(tmp_path, format):
    rng = np.random.default_rng(3)
    head = HeadParams(weights=f32(rng.normal(size=(4, 7))),
                      biases=f32(rng.normal(size=4)))
    path = tmp_path / "head.dat"
    write_head(head, path, format=format)
    back = read_head(path, format=format)
    assert np.array_equal(back.weights, head.weights)
    assert np.array_equal(back.biases, head.biases)


def test_head_validates_row_counts():
    with pytest.raises(ValueError, match="weight rows"):
        HeadParams(weights=np.zeros((3, 4)), biases=np.zeros(2))


def test_head_binary_trailing_bytes(tmp_path):
    head = HeadParams(weights=np.ones((2, 2)), biases=np.zeros(2))
    path = tmp_path / "head.bin"
    write_head(head, path)
    path.write_bytes(path.read_bytes() + b"\x00")
    with pytest.raises(FormatError, match="trailing"):
        read_head(path)


def test_head_csv_category_order_enforced(tmp_path):
    path = tmp_path / "head.csv"
    path.write_text("category,bias,w0\n1,0.,1.\n")
    with pytest.raises(FormatError, match="declares category 1"):
        read_head(path, format=CSV_FORMAT)


# ---------------------------------------------------------------------------
# prototypes


def test_prototype_store_round_trip(tmp_path):
    store = sample_store()
    path = tmp_path / "protos.bin"
    write_prototypes(store, path)
    back = read_prototypes(path)
    assert back.m == store.m
    assert back.categories() == store.categories()
    for category in store.categories():
        a, b = store.get(category), back.get(category)
        assert np.array_equal(a.mean, b.mean)
        assert np.array_equal(a.std, b.std)
        assert np.array_equal(a.weights, b.weights)
        assert a.bias == b.bias
        assert a.n_typical == b.n_typical


def test_prototype_store_write_is_deterministic(tmp_path):
    store = sample_store()
    a, b = tmp_path / "a.bin", tmp_path / "b.bin"
    write_prototypes(store, a)
    write_prototypes(store, b)
    assert a.read_bytes() == b.read_bytes()


def test_prototype_read_reports_record(tmp_path):
    store = sample_store()
    path = tmp_path / "protos.bin"
    write_prototypes(store, path)
    path.write_bytes(path.read_bytes()[:-1])
    with pytest.raises(FormatError, match="truncated"):
        read_prototypes(path)


# ---------------------------------------------------------------------------
# signatures


@pytest.mark.parametrize("format", [BINARY_FORMAT, CSV_FORMAT])
def test_signature_round_trip(tmp_path, format):
    signatures = sample_signatures()
    path = tmp_path / "sigs.dat"
    write_signatures(signatures, path, format=format)
    back = read_signatures(path, format=format)
    assert len(back) == len(signatures)
    for a, b in zip(signatures, back):
        assert np.array_equal(a.values, b.values)
        assert a.taxonomy is b.taxonomy
        assert a.category == b.category
        assert a.config == b.config
        assert a.object_id == b.object_id


@pytest.mark.parametrize("format", [BINARY_FORMAT, CSV_FORMAT])
def test_empty_signature_file_round_trips(tmp_path, format):
    path = tmp_path / "empty.dat"
    write_signatures([], path, format=format)
    assert read_signatures(path, format=format) == []


def test_signature_binary_bad_magic_mid_stream(tmp_path):
    signatures = sample_signatures()
    path = tmp_path / "sigs.bin"
    write_signatures(signatures, path)
    data = path.read_bytes()
    path.write_bytes(data + b"JUNKJUNK" * 10)
    with pytest.raises(FormatError, match="bad magic.*signature 5"):
        read_signatures(path)


def test_signature_csv_requires_uniform_config(tmp_path):
    config_a = plan_grid(5, 2)
    config_b = plan_grid(64, 4)
    mixed = [
        Signature(values=np.zeros(config_a.signature_length),
                  taxonomy=Taxonomy.OBJECT, category=0, config=config_a),
        Signature(values=np.zeros(config_b.signature_length),
                  taxonomy=Taxonomy.OBJECT, category=0, config=config_b),
    ]
    with pytest.raises(ValueError, match="single shared config"):
        write_signatures(mixed, tmp_path / "mixed.csv", format=CSV_FORMAT)


@settings(max_examples=40, deadline=None)
@given(
    n=st.integers(0, 8),
    m=st.integers(1, 24),
    seed=st.integers(0, 2**31 - 1),
    format=st.sampled_from([BINARY_FORMAT, CSV_FORMAT]),
)
def test_feature_round_trip_property(tmp_path_factory, n, m, seed, format):
    rng = np.random.default_rng(seed)
    fset = FeatureSet(
        ids=[f"r{i}" for i in range(n)],
        labels=rng.integers(0, 5, size=n),
        features=f32(rng.normal(scale=100.0, size=(n, m))),
    )
    path = tmp_path_factory.mktemp("rt") / "f.dat"
    write_feature_set(fset, path, format=format)
    back = read_feature_set(path, format=format)
    assert np.array_equal(back.features, fset.features)
    assert np.array_equal(back.labels, fset.labels)
    assert back.ids == fset.ids
