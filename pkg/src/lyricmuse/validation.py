"""Light input-validation helpers shared by the estimators."""

from __future__ import annotations

import numpy as np


def check_array(X, ndim: int, name: str = "X", dtype=np.float32) -> np.ndarray:
    """Coerce to an ndarray of the given rank and check finiteness."""
    arr = np.asarray(X, dtype=dtype)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_unit_range(X: np.ndarray, name: str = "X") -> np.ndarray:
    if X.size and (X.min() < 0.0 or X.max() > 1.0):
        raise ValueError(f"{name} must be normalized to [0, 1], got [{X.min()}, {X.max()}]")
    return X


def check_fitted(estimator, attribute: str) -> None:
    if not hasattr(estimator, attribute):
        raise RuntimeError(f"{type(estimator).__name__} is not fitted; call fit() first")
