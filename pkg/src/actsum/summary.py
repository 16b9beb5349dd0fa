"""Inference: frame scores to a budgeted keyshot summary.

Frame scores are the model's per-frame quality outputs; shot scores are
their within-shot means; shots enter the summary through an exact 0/1
knapsack under a duration budget (fraction of the video's frames). The
summary is always a union of whole shots.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch
from .model import ModelParameters, forward_all
from .segmentation import SegmentList
from .validation import check_features, check_vector

__all__ = [
    "SummaryMask",
    "frame_scores",
    "shot_scores",
    "knapsack_select",
    "generate_summary",
    "random_summary",
]

VALUE_TIE_TOL = 1e-12


@dataclass(frozen=True)
class SummaryMask:
    """A per-frame selection composed of whole shots under a frame budget."""

    selected: np.ndarray  # bool per frame
    shots: SegmentList
    budget_frames: int

    @property
    def selected_shots(self) -> list[int]:
        return [
            i
            for i, (s, e) in enumerate(self.shots)
            if bool(self.selected[s:e].all())
        ]

    def selected_intervals(self) -> list[tuple[int, int]]:
        return [self.shots.pairs()[i] for i in self.selected_shots]


def frame_scores(params: ModelParameters, features: np.ndarray) -> np.ndarray:
    """Per-frame importance scores: the quality head's outputs, in (0, 1)."""
    return forward_all(params, check_features(features)).q


def shot_scores(scores: np.ndarray, shots: SegmentList) -> np.ndarray:
    """Arithmetic mean of the frame scores inside each shot."""
    scores = check_vector(scores, n=shots.n_frames, name="scores")
    return np.array([scores[s:e].mean() for s, e in shots])


def knapsack_select(values, lengths, budget_frames: int) -> list[int]:
    """Exact 0/1 knapsack: maximize total value subject to total length.

    Ties within 1e-12 of the optimal value prefer the smaller total
    length, then the lexicographically smallest index set. Solved by
    dynamic programming over the remaining-capacity axis; selections are
    reconstructed front to back so earlier indices win remaining ties.
    """
    values = np.asarray(values, dtype=np.float64).ravel()
    lengths = np.asarray(lengths, dtype=np.int64).ravel()
    if values.shape != lengths.shape:
        raise ShapeMismatch("values and lengths differ in size")
    if np.any(lengths < 1):
        raise ValueError("every shot length must be at least 1")
    budget = int(budget_frames)
    if budget < 0:
        raise ValueError("budget_frames must be nonnegative")
    k = values.size

    # best[i][w]: (value, used length) achievable with items i.. and capacity w
    best_val = np.zeros((k + 1, budget + 1))
    best_len = np.zeros((k + 1, budget + 1), dtype=np.int64)
    take = np.zeros((k + 1, budget + 1), dtype=bool)
    for i in range(k - 1, -1, -1):
        v, l = values[i], int(lengths[i])
        best_val[i] = best_val[i + 1]
        best_len[i] = best_len[i + 1]
        if l <= budget:
            inc_val = v + best_val[i + 1, : budget - l + 1]
            inc_len = l + best_len[i + 1, : budget - l + 1]
            exc_val = best_val[i + 1, l:]
            exc_len = best_len[i + 1, l:]
            diff = inc_val - exc_val
            prefer = (diff > VALUE_TIE_TOL) | (
                (np.abs(diff) <= VALUE_TIE_TOL) & (inc_len <= exc_len)
            )
            best_val[i, l:] = np.where(prefer, inc_val, exc_val)
            best_len[i, l:] = np.where(prefer, inc_len, exc_len)
            take[i, l:] = prefer

    chosen = []
    w = budget
    for i in range(k):
        if take[i, w]:
            chosen.append(i)
            w -= int(lengths[i])
    return chosen


def generate_summary(
    params: ModelParameters,
    features: np.ndarray,
    shots: SegmentList,
    budget: float = 0.15,
) -> SummaryMask:
    """Score frames, average per shot, and select shots under the budget."""
    features = check_features(features)
    n = features.shape[0]
    if shots.n_frames != n:
        raise ShapeMismatch("shot list does not cover the feature matrix")
    if not 0.0 <= budget <= 1.0:
        raise ValueError("budget must lie in [0, 1]")
    scores = frame_scores(params, features)
    per_shot = shot_scores(scores, shots)
    budget_frames = int(budget * n)
    chosen = knapsack_select(per_shot, shots.lengths, budget_frames)
    selected = np.zeros(n, dtype=bool)
    for i in chosen:
        s, e = shots.bounds[i]
        selected[s:e] = True
    return SummaryMask(selected=selected, shots=shots, budget_frames=budget_frames)


def random_summary(
    shots: SegmentList, budget_frames: int, rng: np.random.Generator
) -> np.ndarray:
    """Baseline: shots in random order, kept while they fit the budget."""
    n = shots.n_frames
    selected = np.zeros(n, dtype=bool)
    remaining = int(budget_frames)
    for i in rng.permutation(len(shots)):
        s, e = shots.bounds[i]
        if e - s <= remaining:
            selected[s:e] = True
            remaining -= e - s
    return selected
