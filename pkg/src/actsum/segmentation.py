"""Kernel-based temporal segmentation into variable-size shots.

Frames are compared through a linear Gram kernel of their unit-normalized
feature vectors. A partition's cost is the total within-segment scatter,
and an exact dynamic program finds, for each candidate segment count m,
the minimum-cost partition; the returned m additionally minimizes

    total_scatter(m) + penalty * m * (ln(n / m) + 1)

so that a positive penalty discourages oversegmentation. Ties prefer
fewer segments, then lexicographically earliest boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, IndexOutOfRange, ShapeMismatch
from .validation import check_features

__all__ = [
    "SegmentList",
    "segment_cost",
    "partition_cost",
    "frame_kernel",
    "kts_segment",
]


@dataclass(frozen=True)
class SegmentList:
    """A contiguous, ordered partition of [0, n_frames) into half-open shots."""

    bounds: np.ndarray  # (m, 2) int64 rows of [start, end)

    @classmethod
    def from_pairs(cls, pairs, n_frames: int | None = None) -> "SegmentList":
        bounds = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        if bounds.shape[0] == 0:
            raise EmptyInput("a segment list must contain at least one segment")
        if bounds[0, 0] != 0:
            raise ShapeMismatch("first segment must start at frame 0")
        if np.any(bounds[:, 0] >= bounds[:, 1]):
            raise ShapeMismatch("every segment must satisfy start < end")
        if np.any(bounds[1:, 0] != bounds[:-1, 1]):
            raise ShapeMismatch("segments must be contiguous and non-overlapping")
        if n_frames is not None and bounds[-1, 1] != n_frames:
            raise ShapeMismatch(
                f"last segment ends at {bounds[-1, 1]}, expected {n_frames}"
            )
        return cls(bounds=bounds)

    @classmethod
    def from_boundaries(cls, n_frames: int, boundaries) -> "SegmentList":
        """Build from interior change points (sorted frame indices)."""
        cuts = [0, *map(int, boundaries), n_frames]
        return cls.from_pairs(list(zip(cuts[:-1], cuts[1:])), n_frames)

    @property
    def n_frames(self) -> int:
        return int(self.bounds[-1, 1])

    @property
    def lengths(self) -> np.ndarray:
        return self.bounds[:, 1] - self.bounds[:, 0]

    @property
    def boundaries(self) -> np.ndarray:
        """Interior change points (excludes 0 and n_frames)."""
        return self.bounds[1:, 0].copy()

    def __len__(self) -> int:
        return self.bounds.shape[0]

    def __iter__(self):
        for s, e in self.bounds:
            yield int(s), int(e)

    def pairs(self) -> list[tuple[int, int]]:
        return [(int(s), int(e)) for s, e in self.bounds]

    def frame_segment_ids(self) -> np.ndarray:
        """Per-frame index of the containing segment."""
        ids = np.empty(self.n_frames, dtype=np.int64)
        for i, (s, e) in enumerate(self):
            ids[s:e] = i
        return ids

    def expand(self, per_segment: np.ndarray) -> np.ndarray:
        """Broadcast one value per segment to one value per frame."""
        per_segment = np.asarray(per_segment)
        if per_segment.shape[0] != len(self):
            raise ShapeMismatch("per-segment values do not match segment count")
        return np.repeat(per_segment, self.lengths)


def frame_kernel(features: np.ndarray) -> np.ndarray:
    """Linear Gram kernel of unit-normalized frame features."""
    x = check_features(features)
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    x = x / norms
    return x @ x.T


def segment_cost(kernel: np.ndarray, start: int, end: int) -> float:
    """Within-segment scatter of frames [start, end) under a Gram kernel.

    sum_i K_ii - (1 / len) * sum_ij K_ij over the segment; zero for a
    single frame, and nonnegative (up to roundoff) for PSD kernels.
    """
    kernel = np.asarray(kernel, dtype=np.float64)
    n = kernel.shape[0]
    if kernel.ndim != 2 or kernel.shape[1] != n:
        raise ShapeMismatch(f"kernel must be square, got {kernel.shape}")
    if not 0 <= start < end <= n:
        raise IndexOutOfRange(f"segment [{start}, {end}) not within [0, {n})")
    block = kernel[start:end, start:end]
    return float(np.trace(block) - block.sum() / (end - start))


def partition_cost(kernel: np.ndarray, segments: SegmentList) -> float:
    """Total within-segment scatter of a partition.

    Accumulated back to front, matching the dynamic program's order.
    """
    total = 0.0
    for s, e in reversed(segments.pairs()):
        total = segment_cost(kernel, s, e) + total
    return total


def _scatter_table(kernel: np.ndarray) -> np.ndarray:
    """cost[s, e] = within-segment scatter of [s, e), via cumulative sums."""
    n = kernel.shape[0]
    diag_cum = np.concatenate(([0.0], np.cumsum(np.diagonal(kernel))))
    block = np.zeros((n + 1, n + 1))
    block[1:, 1:] = np.cumsum(np.cumsum(kernel, axis=0), axis=1)

    s = np.arange(n + 1).reshape(-1, 1)
    e = np.arange(n + 1).reshape(1, -1)
    lengths = np.maximum(e - s, 1)
    sums = block[e, e] - block[s, e] - block[e, s] + block[s, s]
    cost = diag_cum[e] - diag_cum[s] - sums / lengths
    cost[e <= s] = 0.0
    # scatter is nonnegative for PSD kernels; clamping removes cumsum
    # roundoff so exact cost ties break toward fewer segments
    np.maximum(cost, 0.0, out=cost)
    return cost


def kts_segment(
    features: np.ndarray,
    max_segments: int | None = None,
    penalty: float = 1.0,
) -> SegmentList:
    """Segment a video into at most max_segments shots.

    max_segments defaults to ceil(n / 10). The dynamic program is exact:
    for every m it finds the minimum-scatter partition into m segments,
    then picks the m minimizing scatter plus the penalized segment-count
    term. Tie-breaks: fewer segments first, then earliest boundaries.
    """
    x = check_features(features)
    n = x.shape[0]
    if n == 0:
        raise EmptyInput("cannot segment a video with zero frames")
    if max_segments is None:
        max_segments = math.ceil(n / 10)
    if max_segments < 1:
        raise ValueError("max_segments must be at least 1")
    if penalty < 0:
        raise ValueError("penalty must be nonnegative")
    m_max = min(int(max_segments), n)

    kernel = frame_kernel(x)
    cost = _scatter_table(kernel)

    # suffix[k, t] = min scatter splitting [t, n) into exactly k segments
    big = np.inf
    suffix = np.full((m_max + 1, n + 1), big)
    choice = np.zeros((m_max + 1, n + 1), dtype=np.int64)
    suffix[1, :n] = cost[np.arange(n), n]
    suffix[1, n] = big
    for k in range(2, m_max + 1):
        # k segments need at least k frames
        for t in range(n - k + 1):
            # first segment [t, u); u leaves k-1 frames for the rest
            lo, hi = t + 1, n - k + 2
            cand = cost[t, lo:hi] + suffix[k - 1, lo:hi]
            best = int(np.argmin(cand))  # first minimum: earliest boundary
            suffix[k, t] = cand[best]
            choice[k, t] = lo + best

    best_m = 1
    best_obj = suffix[1, 0] + penalty * 1.0 * (math.log(n / 1.0) + 1.0)
    for m in range(2, m_max + 1):
        obj = suffix[m, 0] + penalty * m * (math.log(n / m) + 1.0)
        if obj < best_obj:  # strict: ties keep the smaller m
            best_obj = obj
            best_m = m

    boundaries = []
    t = 0
    for k in range(best_m, 1, -1):
        t = int(choice[k, t])
        boundaries.append(t)
    return SegmentList.from_boundaries(n, boundaries)
