"""Estimator-style facade over prototype construction and description.

`GlobalSemanticDescriptor.fit` builds one semantic prototype per category
from the training set, `predict` applies the linear head, and `transform`
turns feature vectors into fixed-length semantic signatures (classify, then
describe against the winning category's prototype). A pre-trained head can
be supplied; otherwise a logistic-regression head is fitted on the data.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .descriptor import describe_object, plan_grid
from .interchange import FeatureSet, HeadParams
from .prototype import build_store, predict_categories
from .synth import fit_linear_head
from .validation import as_float_matrix, as_label_vector


class GlobalSemanticDescriptor(BaseEstimator, TransformerMixin):
    """Transform feature vectors into prototype-based semantic signatures.

    Parameters
    ----------
    r : int, default=16
        Side of the square blocks used by the signature reduction.
    head : HeadParams or None, default=None
        Pre-trained linear head. When None, fit trains a multinomial
        logistic-regression head on (X, y).
    iterations : int, default=300
        Gradient-descent budget for the internally fitted head.
    learning_rate : float, default=0.1
        Step size for the internally fitted head.
    """

    def __init__(self, r: int = 16, head: HeadParams | None = None,
                 iterations: int = 300, learning_rate: float = 0.1):
        self.r = r
        self.head = head
        self.iterations = iterations
        self.learning_rate = learning_rate

    def fit(self, X, y):
        X = as_float_matrix(X, name="X")
        y = as_label_vector(y, name="y")
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"{X.shape[0]} rows vs {y.shape[0]} labels")
        if self.head is not None:
            if self.head.m != X.shape[1]:
                raise ValueError(
                    f"head expects {self.head.m} features, X has {X.shape[1]}"
                )
            self.head_ = self.head
        else:
            self.head_ = fit_linear_head(
                X, y, iterations=self.iterations,
                learning_rate=self.learning_rate,
            )
        fset = FeatureSet(ids=[str(i) for i in range(X.shape[0])],
                          labels=y, features=X)
        self.store_, self.skipped_categories_ = build_store(fset, self.head_)
        self.config_ = plan_grid(X.shape[1], self.r)
        self.classes_ = np.array(self.store_.categories(), dtype=np.int64)
        self.n_features_in_ = X.shape[1]
        return self

    def _check_fitted(self):
        if not hasattr(self, "store_"):
            raise ValueError("estimator is not fitted yet, call fit first")

    def predict(self, X):
        """Category of the linear head's strongest response per row."""
        self._check_fitted()
        X = as_float_matrix(X, name="X")
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, fit saw {self.n_features_in_}"
            )
        return predict_categories(X, self.head_)

    def transform(self, X):
        """Signature matrix, one row per object, width 2 * blocks * 8."""
        self._check_fitted()
        X = as_float_matrix(X, name="X")
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, fit saw {self.n_features_in_}"
            )
        predicted = predict_categories(X, self.head_)
        out = np.empty((X.shape[0], self.config_.signature_length))
        for index in range(X.shape[0]):
            category = int(predicted[index])
            if category not in self.store_:
                raise ValueError(
                    f"row {index} classified as category {category}, which "
                    f"kept no typical members during fit"
                )
            sig = describe_object(X[index], self.store_.get(category),
                                  self.config_)
            out[index] = sig.values
        return out
