"""Training targets built from multi-annotator data.

A video arrives with several user annotations (per-frame summary masks
plus one actionness rank per shot). This module condenses them into a
single oracle label set: a greedy consensus summary mask, per-segment
median ranks, a Gaussian-relaxed importance curve over the key segments,
and, per training pass, a diversity-target frame subset with exactly one
frame per key segment.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateWeights, EmptyAnnotations, LengthMismatch
from .evaluation import binary_prf
from .segmentation import SegmentList
from .validation import check_mask, check_ranks

__all__ = [
    "UserAnnotation",
    "OracleLabels",
    "oracle_summary",
    "oracle_actionness",
    "gaussian_smooth",
    "sample_training_subset",
    "build_oracle_labels",
]


@dataclass(frozen=True)
class UserAnnotation:
    """One annotator's output: a frame summary mask and per-segment ranks."""

    summary: np.ndarray  # bool, one entry per frame
    segment_ranks: np.ndarray  # int in 0..3, one entry per segment


@dataclass(frozen=True)
class OracleLabels:
    """Consensus targets: summary mask, relaxed importances, frame ranks."""

    summary_mask: np.ndarray  # bool per frame
    smoothed: np.ndarray  # float in [0, 1] per frame, 0 outside key segments
    frame_ranks: np.ndarray  # int in 0..3 per frame, constant within segments


def _check_annotations(annotations, segments: SegmentList):
    if not annotations:
        raise EmptyAnnotations("no user annotations supplied")
    n = segments.n_frames
    m = len(segments)
    for i, ann in enumerate(annotations):
        check_mask(ann.summary, n=n, name=f"user {i} summary")
        check_ranks(ann.segment_ranks, n=m, name=f"user {i} segment_ranks")


def oracle_summary(
    annotations: list[UserAnnotation],
    segments: SegmentList,
    return_trace: bool = False,
):
    """Greedy consensus summary over whole segments.

    Starting from the empty mask, repeatedly add the segment whose
    inclusion maximizes the mean f1 against the users' summaries; stop as
    soon as no segment gives a strictly positive gain. Ties go to the
    earliest segment. With return_trace the mean-f1 after every greedy
    step comes back too (first entry: the empty mask's score).
    """
    _check_annotations(annotations, segments)
    n = segments.n_frames
    refs = [np.asarray(a.summary, dtype=bool) for a in annotations]

    def mean_f1(mask):
        return float(np.mean([binary_prf(mask, r)[2] for r in refs]))

    current = np.zeros(n, dtype=bool)
    remaining = list(range(len(segments)))
    score = mean_f1(current)
    trace = [score]
    while remaining:
        best_gain = 0.0
        best_idx = None
        best_score = score
        for idx in remaining:
            s, e = segments.bounds[idx]
            cand = current.copy()
            cand[s:e] = True
            cand_score = mean_f1(cand)
            if cand_score - score > best_gain:
                best_gain = cand_score - score
                best_idx = idx
                best_score = cand_score
        if best_idx is None:
            break
        s, e = segments.bounds[best_idx]
        current[s:e] = True
        remaining.remove(best_idx)
        score = best_score
        trace.append(score)
    if return_trace:
        return current, trace
    return current


def oracle_actionness(annotations: list[UserAnnotation]) -> np.ndarray:
    """Per-segment median of user ranks, half-values rounded down."""
    if not annotations:
        raise EmptyAnnotations("no user annotations supplied")
    ranks = np.stack([check_ranks(a.segment_ranks) for a in annotations])
    if ranks.ndim != 2:
        raise LengthMismatch("annotators disagree on segment count")
    return np.floor(np.median(ranks, axis=0)).astype(np.int64)


def gaussian_smooth(
    mask: np.ndarray,
    segments: SegmentList,
    sigma_divisor: float = 6.0,
) -> np.ndarray:
    """Relax a binary summary mask into [0, 1] importances.

    Each selected frame contributes an unnormalized Gaussian bump, peak 1,
    restricted to its own segment, with sigma = segment_length /
    sigma_divisor. Frames covered by several bumps take the maximum.
    Frames in segments with no selection stay exactly 0.
    """
    mask = check_mask(mask, n=segments.n_frames)
    if sigma_divisor <= 0:
        raise ValueError("sigma_divisor must be positive")
    out = np.zeros(mask.shape[0], dtype=np.float64)
    for s, e in segments:
        selected = np.flatnonzero(mask[s:e]) + s
        if selected.size == 0:
            continue
        sigma = (e - s) / sigma_divisor
        idx = np.arange(s, e)
        for f in selected:
            bump = np.exp(-((idx - f) ** 2) / (2.0 * sigma * sigma))
            np.maximum(out[s:e], bump, out=out[s:e])
    return out


def sample_training_subset(
    labels: OracleLabels,
    segments: SegmentList,
    rng: np.random.Generator | None = None,
    deterministic: bool = False,
) -> np.ndarray:
    """One target frame per key segment, as a sorted index array.

    A key segment is one intersecting the oracle summary mask. In
    stochastic mode the frame is drawn with probability proportional to
    its smoothed weight inside the segment; deterministic mode returns the
    first peak-weight frame instead.
    """
    mask = check_mask(labels.summary_mask, n=segments.n_frames)
    weights = np.asarray(labels.smoothed, dtype=np.float64)
    if weights.shape != mask.shape:
        raise LengthMismatch("smoothed weights do not match mask length")
    if not deterministic and rng is None:
        raise ValueError("stochastic sampling requires an rng")

    picks = []
    for i, (s, e) in enumerate(segments):
        if not mask[s:e].any():
            continue
        w = weights[s:e]
        total = w.sum()
        if total <= 0.0:
            raise DegenerateWeights(f"key segment {i} has zero total weight")
        if deterministic:
            picks.append(s + int(np.argmax(w)))
        else:
            picks.append(s + int(rng.choice(e - s, p=w / total)))
    return np.asarray(sorted(picks), dtype=np.int64)


def build_oracle_labels(
    annotations: list[UserAnnotation],
    segments: SegmentList,
    sigma_divisor: float = 6.0,
) -> OracleLabels:
    """Assemble the full oracle label set for one video."""
    mask = oracle_summary(annotations, segments)
    smoothed = gaussian_smooth(mask, segments, sigma_divisor=sigma_divisor)
    frame_ranks = segments.expand(oracle_actionness(annotations))
    return OracleLabels(summary_mask=mask, smoothed=smoothed, frame_ranks=frame_ranks)
