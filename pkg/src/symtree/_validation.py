"""Input checks shared by the estimator API."""

from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array, column_or_1d


def check_binary_matrix(X, n_features=None):
    """2-D array of 0/1 values as ``int8``; optionally with a fixed width."""
    X = check_array(X, dtype=None, ensure_2d=True)
    if not np.isin(X, (0, 1)).all():
        raise ValueError("X must contain only 0/1 values")
    X = X.astype(np.int8)
    if n_features is not None and X.shape[1] != n_features:
        raise ValueError(f"X has {X.shape[1]} features, expected {n_features}")
    return X


def check_binary_labels(y, n_samples):
    y = column_or_1d(y)
    if y.shape[0] != n_samples:
        raise ValueError(f"y has {y.shape[0]} entries, X has {n_samples} rows")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("y must contain only 0/1 labels")
    return y.astype(np.int8)


def table_from_samples(X, y):
    """Truth table from samples that cover every input exactly once in effect.

    Repeated rows must agree; every one of the ``2**n`` inputs must appear.
    """
    n = X.shape[1]
    weights = 1 << np.arange(n - 1, -1, -1)
    idx = X.astype(np.int64) @ weights
    table = np.full(1 << n, -1, dtype=np.int8)
    for i, label in zip(idx, y):
        if table[i] not in (-1, label):
            raise ValueError("X contains a repeated input with conflicting labels")
        table[i] = label
    missing = int((table < 0).sum())
    if missing:
        raise ValueError(f"X must cover all {1 << n} inputs; {missing} are missing")
    return tuple(int(b) for b in table)
