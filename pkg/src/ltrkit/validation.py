"""Input validation helpers shared by the estimator API and the batch math."""
from __future__ import annotations

import numpy as np


def as_float_matrix(x, name: str = "X") -> np.ndarray:
    """Coerce to a 2-d float64 array; reject anything else."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got ndim={arr.ndim}")
    return arr


def as_float_vector(x, name: str = "x") -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got ndim={arr.ndim}")
    return arr


def check_feature_dim(n_features: int, expected: int, context: str = "") -> None:
    if n_features != expected:
        where = f" ({context})" if context else ""
        raise ValueError(f"feature dimension mismatch{where}: got {n_features}, expected {expected}")


def check_same_shape(**named_arrays: np.ndarray) -> tuple[int, ...]:
    """Require all named arrays to share one shape; return it."""
    items = list(named_arrays.items())
    shape = items[0][1].shape
    for name, arr in items[1:]:
        if arr.shape != shape:
            raise ValueError(
                f"shape mismatch: {items[0][0]}{shape} vs {name}{arr.shape}"
            )
    return shape


def check_positive_int(value, name: str) -> int:
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)
