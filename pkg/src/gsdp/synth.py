"""Synthetic feature sets with a fitted linear head.

Stand-in for a real backbone at desk scale: isotropic Gaussian blobs whose
means are spaced so that the expected distance between two category means
equals `separation`, plus a multinomial logistic-regression head trained by
full-batch gradient descent. With a comfortable separation the head is
near-perfect, so Top-1 typicality filtering keeps most members.

Generated values are rounded through 32-bit reals so a set is identical to
its interchange file image and repeated runs are byte-deterministic.
"""

import numpy as np

from .interchange import FeatureSet, HeadParams
from .validation import as_float_matrix, as_label_vector, check_count


def make_gaussian_features(n_categories: int, per_category: int, m: int,
                           separation: float = 10.0, seed: int = 0) -> FeatureSet:
    """Draw `per_category` unit-variance samples around each category mean."""
    check_count(n_categories, 1, "n_categories")
    check_count(per_category, 1, "per_category")
    check_count(m, 1, "m")
    if not separation >= 0:
        raise ValueError(f"separation must be non-negative, got {separation}")
    rng = np.random.default_rng(seed)
    # Mean coordinates at scale separation/sqrt(2m) put the expected
    # squared distance between two means at separation**2.
    means = rng.normal(0.0, separation / np.sqrt(2.0 * m), size=(n_categories, m))
    labels = np.repeat(np.arange(n_categories, dtype=np.int64), per_category)
    noise = rng.standard_normal((labels.size, m))
    features = (means[labels] + noise).astype(np.float32).astype(np.float64)
    ids = [f"obj-{i:05d}" for i in range(labels.size)]
    names = [f"category-{c}" for c in range(n_categories)]
    return FeatureSet(ids=ids, labels=labels, features=features,
                      category_names=names)


def fit_linear_head(features, labels, n_categories: int | None = None,
                    iterations: int = 300, learning_rate: float = 0.1) -> HeadParams:
    """Multinomial logistic regression by full-batch gradient descent.

    Zero initialization and a fixed iteration budget keep the fit free of
    randomness. Parameters are rounded through 32-bit reals to match their
    interchange image.
    """
    X = as_float_matrix(features, name="features")
    y = as_label_vector(labels, name="labels")
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"{X.shape[0]} rows vs {y.shape[0]} labels")
    if X.shape[0] == 0:
        raise ValueError("need at least one sample")
    check_count(iterations, 1, "iterations")
    if n_categories is None:
        n_categories = int(y.max()) + 1
    check_count(n_categories, 1, "n_categories")
    if int(y.max()) >= n_categories:
        raise ValueError(f"label {int(y.max())} outside {n_categories} categories")

    n = X.shape[0]
    onehot = np.zeros((n, n_categories))
    onehot[np.arange(n), y] = 1.0
    weights = np.zeros((n_categories, X.shape[1]))
    biases = np.zeros(n_categories)
    for _ in range(iterations):
        logits = X @ weights.T + biases
        logits -= logits.max(axis=1, keepdims=True)
        probs = np.exp(logits)
        probs /= probs.sum(axis=1, keepdims=True)
        residual = probs - onehot
        weights -= learning_rate * (residual.T @ X) / n
        biases -= learning_rate * residual.mean(axis=0)
    return HeadParams(
        weights=weights.astype(np.float32).astype(np.float64),
        biases=biases.astype(np.float32).astype(np.float64),
    )
