"""Input validation helpers shared across the package."""

from __future__ import annotations

import numpy as np

from .errors import LengthMismatch, NonFiniteValue, ShapeMismatch

N_RANKS = 4


def check_features(x, name: str = "features") -> np.ndarray:
    """Validate and promote a frame-feature matrix to float64."""
    x = np.asarray(x)
    if x.ndim != 2:
        raise ShapeMismatch(f"{name} must be 2D (frames x dims), got shape {x.shape}")
    x = np.ascontiguousarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise NonFiniteValue(f"{name} contains non-finite entries")
    return x


def check_vector(x, n: int | None = None, name: str = "vector") -> np.ndarray:
    x = np.asarray(x, dtype=np.float64).ravel()
    if n is not None and x.shape[0] != n:
        raise LengthMismatch(f"{name} has length {x.shape[0]}, expected {n}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteValue(f"{name} contains non-finite entries")
    return x


def check_mask(mask, n: int | None = None, name: str = "mask") -> np.ndarray:
    mask = np.asarray(mask)
    if mask.ndim != 1:
        raise ShapeMismatch(f"{name} must be 1D, got shape {mask.shape}")
    if mask.dtype != bool:
        if not np.all(np.isin(mask, (0, 1))):
            raise ShapeMismatch(f"{name} must be boolean or 0/1 valued")
        mask = mask.astype(bool)
    if n is not None and mask.shape[0] != n:
        raise LengthMismatch(f"{name} has length {mask.shape[0]}, expected {n}")
    return mask


def check_ranks(ranks, n: int | None = None, name: str = "ranks") -> np.ndarray:
    ranks = np.asarray(ranks)
    if ranks.ndim != 1:
        raise ShapeMismatch(f"{name} must be 1D, got shape {ranks.shape}")
    ranks = ranks.astype(np.int64)
    if ranks.size and (ranks.min() < 0 or ranks.max() >= N_RANKS):
        raise ShapeMismatch(f"{name} values must lie in 0..{N_RANKS - 1}")
    if n is not None and ranks.shape[0] != n:
        raise LengthMismatch(f"{name} has length {ranks.shape[0]}, expected {n}")
    return ranks


def check_prob_rows(p, name: str = "p", tol: float = 1e-9) -> np.ndarray:
    """Validate an (n, 4) matrix of per-frame class probabilities."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 2 or p.shape[1] != N_RANKS:
        raise ShapeMismatch(f"{name} must have shape (n, {N_RANKS}), got {p.shape}")
    if not np.all(np.isfinite(p)):
        raise NonFiniteValue(f"{name} contains non-finite entries")
    if p.size and (p.min() < -tol or np.abs(p.sum(axis=1) - 1.0).max() > tol):
        raise ShapeMismatch(f"rows of {name} must be probability distributions")
    return p


def one_hot_ranks(ranks: np.ndarray) -> np.ndarray:
    """Per-frame rank indices to an (n, 4) one-hot matrix."""
    ranks = check_ranks(ranks)
    out = np.zeros((ranks.shape[0], N_RANKS), dtype=np.float64)
    out[np.arange(ranks.shape[0]), ranks] = 1.0
    return out
