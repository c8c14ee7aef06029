"""Input validation helpers shared by the estimators and numeric routines."""

from __future__ import annotations

import numpy as np

from .errors import DataError


def as_sample_array(xs) -> np.ndarray:
    """Coerce log2-gap samples to a finite 1-D float64 array.

    Accepts sequences, 1-D arrays, or (n, 1) column matrices so the mixture
    estimator composes with sklearn pipelines.
    """
    arr = np.asarray(xs, dtype=np.float64)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise DataError(f"expected 1-D samples, got shape {arr.shape}")
    if arr.size and not np.isfinite(arr).all():
        raise DataError("samples contain NaN or infinite values")
    return arr


def require_min_samples(xs: np.ndarray, k: int) -> None:
    """Enforce the minimum sample count for a k-component fit."""
    if xs.size < 10 * k:
        raise DataError(f"too few samples: {xs.size} < {10 * k} required for k={k}")
