"""Input checks shared by the estimator wrappers."""

from __future__ import annotations

import numpy as np
from sklearn.utils import check_array

from .cantor import CantorConfig


def check_config(config) -> CantorConfig:
    """Accept a ``CantorConfig`` or a ``(d, L, digit_sets)`` tuple."""
    if isinstance(config, CantorConfig):
        return config
    if config is None:
        return CantorConfig.corner(2)
    d, L, sets = config
    return CantorConfig(int(d), int(L), tuple(tuple(A) for A in sets))


def check_levels(X) -> np.ndarray:
    """Levels ``N`` as a 1-d integer array (column vectors are flattened)."""
    arr = check_array(X, ensure_2d=False, dtype=None)
    arr = np.asarray(arr).reshape(-1) if arr.ndim == 2 and arr.shape[1] == 1 else arr
    if arr.ndim != 1:
        raise ValueError("levels must be a 1-d array or a single column")
    if not np.all(np.equal(np.mod(arr, 1), 0)) or np.any(arr < 0):
        raise ValueError("levels must be nonnegative integers")
    return arr.astype(int)


def check_positive_pairs(X, y) -> tuple:
    x = check_levels(X) if np.ndim(X) <= 2 else None
    y = check_array(y, ensure_2d=False)
    x = np.asarray(x, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"X has {x.shape[0]} rows but y has {y.shape[0]}")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("power laws need positive inputs and targets")
    return x, y


def check_directions(X, d: int) -> np.ndarray:
    """Rows are unit directions in ``R^d``; rows are normalised, zero rows rejected."""
    arr = check_array(X, dtype=float)
    if arr.shape[1] != d:
        raise ValueError(f"directions must have {d} columns, got {arr.shape[1]}")
    norms = np.linalg.norm(arr, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise ValueError("zero direction")
    return arr / norms


def check_digit_sets(X) -> list:
    out = []
    for A in X:
        A = [int(a) for a in A]
        if len(A) < 2 or len(set(A)) != len(A) or min(A) < 0:
            raise ValueError(f"invalid digit set {A}")
        out.append(tuple(sorted(A)))
    return out
