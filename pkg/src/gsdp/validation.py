"""Shared input-validation helpers.

All public entry points funnel array-likes through these so that error
messages are uniform and every downstream computation sees finite float64
data of the expected shape.
"""

import numpy as np


def as_float_matrix(X, name: str = "X") -> np.ndarray:
    """Coerce to a 2-D float64 array and reject non-finite entries."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {X.shape}")
    if X.size and not np.isfinite(X).all():
        bad = int(np.flatnonzero(~np.isfinite(X).all(axis=1))[0])
        raise ValueError(f"{name} contains a non-finite value (row {bad})")
    return X


def as_float_vector(x, m: int | None = None, name: str = "x") -> np.ndarray:
    """Coerce to a 1-D float64 array, optionally enforcing its length."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got shape {x.shape}")
    if m is not None and x.shape[0] != m:
        raise ValueError(f"{name} has length {x.shape[0]}, expected {m}")
    if x.size and not np.isfinite(x).all():
        bad = int(np.flatnonzero(~np.isfinite(x))[0])
        raise ValueError(f"{name} contains a non-finite value (index {bad})")
    return x


def as_label_vector(y, name: str = "y") -> np.ndarray:
    """Coerce to a 1-D int64 array of non-negative category indices."""
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got shape {y.shape}")
    if y.size and not np.issubdtype(y.dtype, np.integer):
        cast = y.astype(np.int64)
        if not np.array_equal(cast, y):
            raise ValueError(f"{name} must hold integer category indices")
        y = cast
    y = y.astype(np.int64)
    if y.size and y.min() < 0:
        bad = int(np.flatnonzero(y < 0)[0])
        raise ValueError(f"{name} has a negative label (index {bad})")
    return y


def check_count(value: int, minimum: int, name: str) -> int:
    value = int(value)
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value
