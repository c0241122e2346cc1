"""Small input-validation helpers used across the package."""

from __future__ import annotations

import numpy as np

# Probabilities are clamped to this band before any log or power.
PROB_EPS = 1e-12


def as_float_array(values, name: str, *, ndim: int | None = None) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_unit_interval(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError(f"{name} must lie in [0, 1]")
    return arr


def check_nonnegative(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if np.any(arr < 0.0):
        raise ValueError(f"{name} must be nonnegative")
    return arr


def clamp_probability(p) -> np.ndarray:
    """Restrict probabilities to [PROB_EPS, 1 - PROB_EPS]."""
    return np.clip(p, PROB_EPS, 1.0 - PROB_EPS)


def scalar_like(result: np.ndarray, reference) -> float | np.ndarray:
    """Return a python float when the original input was scalar."""
    if np.isscalar(reference) or np.ndim(reference) == 0:
        return float(result)
    return result
