"""Semantic prototypes and the scalar semantics built on them.

A category's prototype couples the per-feature mean and standard deviation of
its typical members with the linear-head row (weights + bias) that scores the
category. Typicality is Top-1 agreement: an object counts as typical when its
dataset label matches the head's argmax prediction.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .validation import as_float_matrix, as_float_vector, as_label_vector


class NoTypicalMembersError(ValueError):
    """No member of the category passes the Top-1 typicality filter."""


@dataclass(frozen=True)
class SemanticPrototype:
    """Per-category tuple (mean, std, weights, bias) plus bookkeeping.

    mean/std are statistics over the typical members only; weights and bias
    are copied from the classifier head's row for the category.
    """

    category: int
    mean: np.ndarray
    std: np.ndarray
    weights: np.ndarray
    bias: float
    n_typical: int

    def __post_init__(self):
        object.__setattr__(self, "mean", as_float_vector(self.mean, name="mean"))
        object.__setattr__(
            self, "std", as_float_vector(self.std, self.m, name="std")
        )
        object.__setattr__(
            self, "weights", as_float_vector(self.weights, self.m, name="weights")
        )
        if not math.isfinite(self.bias):
            raise ValueError("bias must be finite")
        if self.std.size and self.std.min() < 0:
            raise ValueError("std entries must be non-negative")
        if self.n_typical < 1:
            raise ValueError("n_typical must be >= 1")

    @property
    def m(self) -> int:
        return self.mean.shape[0]


@dataclass
class PrototypeStore:
    """At most one prototype per category, all sharing one dimensionality."""

    m: int
    _prototypes: dict[int, SemanticPrototype] = field(default_factory=dict)

    def add(self, proto: SemanticPrototype) -> None:
        if proto.m != self.m:
            raise ValueError(
                f"prototype for category {proto.category} has m={proto.m}, "
                f"store has m={self.m}"
            )
        if proto.category in self._prototypes:
            raise ValueError(f"duplicate prototype for category {proto.category}")
        self._prototypes[proto.category] = proto

    def get(self, category: int) -> SemanticPrototype:
        try:
            return self._prototypes[category]
        except KeyError:
            raise KeyError(f"no prototype for category {category}") from None

    def categories(self) -> list[int]:
        return sorted(self._prototypes)

    def __contains__(self, category: int) -> bool:
        return category in self._prototypes

    def __iter__(self):
        return iter(self._prototypes[c] for c in self.categories())

    def __len__(self) -> int:
        return len(self._prototypes)


def classify(features, head) -> int:
    """Top-1 category of a feature vector under the linear head.

    Ties break toward the smallest category index.
    """
    f = as_float_vector(features, head.m, name="features")
    scores = head.weights @ f + head.biases
    return int(np.argmax(scores))


def predict_categories(X, head) -> np.ndarray:
    """Vectorized Top-1 predictions for a feature matrix."""
    X = as_float_matrix(X, name="X")
    if X.shape[1] != head.m:
        raise ValueError(f"X has {X.shape[1]} features, head expects {head.m}")
    return np.argmax(X @ head.weights.T + head.biases, axis=1)


def select_typical(fset, head, category: int) -> np.ndarray:
    """Rows of the category whose label survives the Top-1 filter.

    Returns the (k, m) feature block of typical members, in dataset order.
    Empty output is legal; build_prototype is where emptiness is an error.
    """
    if fset.m != head.m:
        raise ValueError(f"feature set has m={fset.m}, head has m={head.m}")
    predicted = predict_categories(fset.features, head)
    mask = (fset.labels == category) & (predicted == category)
    return fset.features[mask]


def build_prototype(fset, head, category: int) -> SemanticPrototype:
    """Construct the category's prototype from its typical members.

    mean is the per-dimension average and std the population standard
    deviation (divide by the member count, so a singleton gives std 0).
    """
    typical = select_typical(fset, head, category)
    if typical.shape[0] == 0:
        raise NoTypicalMembersError(
            f"category {category} has no members passing the Top-1 filter"
        )
    return SemanticPrototype(
        category=int(category),
        mean=typical.mean(axis=0),
        std=typical.std(axis=0),
        weights=head.weights[category].copy(),
        bias=float(head.biases[category]),
        n_typical=int(typical.shape[0]),
    )


def build_store(fset, head, categories=None) -> tuple[PrototypeStore, list[int]]:
    """Build prototypes for the requested categories (default: all labels
    present in the set). Returns (store, categories skipped for lack of
    typical members)."""
    if categories is None:
        categories = np.unique(as_label_vector(fset.labels)).tolist()
    store = PrototypeStore(m=fset.m)
    skipped = []
    for category in categories:
        try:
            store.add(build_prototype(fset, head, int(category)))
        except NoTypicalMembersError:
            skipped.append(int(category))
    return store, skipped


def semantic_value(a, proto: SemanticPrototype) -> float:
    """Weighted feature sum plus bias, accumulated in float64."""
    a = as_float_vector(a, proto.m, name="a")
    return float(proto.weights @ a + proto.bias)


def prototypical_distance(F, proto: SemanticPrototype) -> float:
    """Weight-modulated L1 distance between a feature vector and the mean."""
    F = as_float_vector(F, proto.m, name="F")
    return float(np.abs(proto.weights) @ np.abs(F - proto.mean))


def object_distance(F1, F2, proto: SemanticPrototype) -> float:
    """Weight-modulated L1 distance between two feature vectors.

    Symmetric and non-negative; zero weights make it a pseudometric (distinct
    vectors may sit at distance zero on zero-weight dimensions).
    """
    F1 = as_float_vector(F1, proto.m, name="F1")
    F2 = as_float_vector(F2, proto.m, name="F2")
    return float(np.abs(proto.weights) @ np.abs(F1 - F2))


def typicality_score(F, proto: SemanticPrototype) -> float:
    """Reciprocal of the prototypical distance; inf at distance zero."""
    d = prototypical_distance(F, proto)
    return math.inf if d == 0.0 else 1.0 / d
