"""Summary and annotation metrics.

Covers keyshot f1 against one or more reference summaries, pairwise
annotator consensus per actionness scale, per-user rank-frequency
histograms, actionness-scale distributions over frame selections, and
frame-level rank accuracy against a majority-class chance baseline.

Degenerate f1 convention: two empty masks agree perfectly (f1 = 1);
exactly one empty mask scores 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable

import numpy as np

from .errors import EmptyAnnotations, EmptySelection, LengthMismatch, TooFewUsers
from .validation import N_RANKS, check_mask, check_ranks

if TYPE_CHECKING:  # pragma: no cover
    from .labels import UserAnnotation
    from .segmentation import SegmentList
    from .summary import SummaryMask

__all__ = [
    "EvalReport",
    "binary_prf",
    "keyshot_f1",
    "pairwise_consensus_f1",
    "rank_frequency",
    "actionness_distribution",
    "actionness_accuracy",
]


@dataclass(frozen=True)
class EvalReport:
    """Precision/recall/f1 of a predicted summary against references."""

    f1: float
    precision: float
    recall: float
    per_user_f1: tuple[float, ...]
    mode: str


def binary_prf(pred: np.ndarray, ref: np.ndarray) -> tuple[float, float, float]:
    """(precision, recall, f1) of two boolean masks of equal length."""
    pred = check_mask(pred, name="pred")
    ref = check_mask(ref, n=pred.shape[0], name="ref")
    np_, ng = int(pred.sum()), int(ref.sum())
    if np_ == 0 and ng == 0:
        return 1.0, 1.0, 1.0
    if np_ == 0 or ng == 0:
        return 0.0, 0.0, 0.0
    overlap = int(np.logical_and(pred, ref).sum())
    p = overlap / np_
    r = overlap / ng
    f1 = 0.0 if p + r == 0 else 2.0 * p * r / (p + r)
    return p, r, f1


def keyshot_f1(pred, gts: Iterable[np.ndarray], mode: str = "average") -> EvalReport:
    """Score a predicted summary mask against per-user reference masks.

    pred may be a boolean mask or a SummaryMask. mode "average" takes the
    mean over users; "max" reports the best-matching user.
    """
    selected = getattr(pred, "selected", pred)
    selected = check_mask(selected, name="pred")
    gts = [check_mask(g, n=selected.shape[0], name="gt") for g in gts]
    if not gts:
        raise EmptyAnnotations("at least one reference mask is required")
    if mode not in ("average", "max"):
        raise ValueError(f"mode must be 'average' or 'max', got {mode!r}")

    triples = [binary_prf(selected, g) for g in gts]
    f1s = tuple(t[2] for t in triples)
    if mode == "average":
        p = float(np.mean([t[0] for t in triples]))
        r = float(np.mean([t[1] for t in triples]))
        f1 = float(np.mean(f1s))
    else:
        best = int(np.argmax(f1s))
        p, r, f1 = triples[best]
    return EvalReport(f1=f1, precision=p, recall=r, per_user_f1=f1s, mode=mode)


def pairwise_consensus_f1(annotations: list["UserAnnotation"]):
    """Average pairwise f1 of segment ranks, binarized at each scale.

    For every scale s, each user's segment ranks become the mask
    (rank == s); a user pair where both masks are empty is skipped for
    that scale. Returns (per_scale, overall): per-scale means over counted
    pairs (nan when no pair counted) and the mean over counted scales.
    """
    if len(annotations) < 2:
        raise TooFewUsers("consensus needs at least two annotators")
    ranks = [check_ranks(a.segment_ranks, name="segment_ranks") for a in annotations]
    m = ranks[0].shape[0]
    if any(r.shape[0] != m for r in ranks):
        raise LengthMismatch("annotators disagree on segment count")

    per_scale = np.full(N_RANKS, np.nan)
    for scale in range(N_RANKS):
        masks = [r == scale for r in ranks]
        vals = []
        for i in range(len(masks)):
            for j in range(i + 1, len(masks)):
                if not masks[i].any() and not masks[j].any():
                    continue
                vals.append(binary_prf(masks[i], masks[j])[2])
        if vals:
            per_scale[scale] = float(np.mean(vals))
    counted = per_scale[~np.isnan(per_scale)]
    overall = float(counted.mean()) if counted.size else float("nan")
    return per_scale, overall


def rank_frequency(
    annotations: list["UserAnnotation"],
    segments: "SegmentList",
    weighted: bool = True,
) -> np.ndarray:
    """Per-user histograms over the four scales, as an (n_users, 4) matrix.

    Weighted mode counts frames (segment lengths); unweighted counts
    segments. Every row sums to 1.
    """
    if not annotations:
        raise TooFewUsers("at least one annotator is required")
    lengths = segments.lengths.astype(np.float64)
    out = np.zeros((len(annotations), N_RANKS))
    for u, ann in enumerate(annotations):
        r = check_ranks(ann.segment_ranks, n=len(segments), name="segment_ranks")
        w = lengths if weighted else np.ones_like(lengths)
        for scale in range(N_RANKS):
            out[u, scale] = w[r == scale].sum()
        out[u] /= out[u].sum()
    return out


def actionness_distribution(frame_ranks, mask=None) -> np.ndarray:
    """Fraction of selected frames at each scale; mask None means all frames."""
    frame_ranks = check_ranks(frame_ranks, name="frame_ranks")
    if mask is None:
        picked = frame_ranks
    else:
        mask = check_mask(mask, n=frame_ranks.shape[0])
        picked = frame_ranks[mask]
    if picked.size == 0:
        raise EmptySelection("cannot compute a distribution over zero frames")
    return np.bincount(picked, minlength=N_RANKS) / picked.size


def actionness_accuracy(pred_ranks, oracle_ranks) -> tuple[float, float]:
    """(accuracy, chance): exact-match rate and majority-class frequency."""
    pred = check_ranks(pred_ranks, name="pred_ranks")
    oracle = check_ranks(oracle_ranks, n=pred.shape[0], name="oracle_ranks")
    if pred.size == 0:
        raise EmptySelection("cannot score zero frames")
    accuracy = float((pred == oracle).mean())
    chance = float(np.bincount(oracle, minlength=N_RANKS).max() / oracle.size)
    return accuracy, chance
