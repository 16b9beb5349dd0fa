"""Synthetic corpus generator for end-to-end runs without real videos.

Each video is a piecewise-constant sequence of segment centroids plus
Gaussian noise. Four global anchor directions, one per actionness scale,
are mixed into every segment's centroid, so the mapping from features to
ranks is learnable across videos. Scale-3 segments are the planted key
segments; simulated users select mostly those (plus light noise), so
summaries are dominated by scale-3 frames while full videos are
dominated by scale 0. Byte-identical output for a fixed seed.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidSpec
from .io import AnnotationSet, save_annotations, save_features, write_json
from .labels import UserAnnotation
from .segmentation import SegmentList

__all__ = ["SyntheticSpec", "gen_synthetic"]

# frame-weighted share of each actionness scale in a full video
SCALE_SHARES = (0.55, 0.20, 0.15, 0.10)
KEY_INCLUDE_P = 0.92  # chance a user keeps a key segment in their summary
FILLER_INCLUDE_P = 0.04  # chance a user adds a non-key segment
RANK_FLIP_P = 0.12  # chance a user misjudges a segment's rank by one


@dataclass(frozen=True)
class SyntheticSpec:
    n_videos: int = 20
    frames_range: tuple[int, int] = (60, 120)
    dim: int = 16
    n_key_segments: int = 3
    noise_level: float = 0.08
    n_users: int = 3

    def validate(self) -> "SyntheticSpec":
        lo, hi = self.frames_range
        if self.dim < 2:
            raise InvalidSpec("dim must be at least 2")
        if not (40 <= lo <= hi <= 2000):
            raise InvalidSpec("frames_range must lie within [40, 2000]")
        if self.n_videos < 1 or self.n_key_segments < 1 or self.n_users < 1:
            raise InvalidSpec("counts must be positive")
        if self.noise_level < 0:
            raise InvalidSpec("noise_level must be nonnegative")
        if 3 * self.n_key_segments + 3 > lo:
            raise InvalidSpec("too many key segments for the shortest video")
        return self


def _plant_segments(n: int, spec: SyntheticSpec, rng: np.random.Generator):
    """Segment lengths and ranks; scale-3 frames sit near their global share."""
    key_total = max(3 * spec.n_key_segments, round(SCALE_SHARES[3] * n))
    base = key_total // spec.n_key_segments
    key_lengths = [base] * spec.n_key_segments
    for i in range(key_total - base * spec.n_key_segments):
        key_lengths[i] += 1

    filler_total = n - key_total
    n_fillers = max(3, round(filler_total / 10))
    cuts = np.sort(
        rng.choice(filler_total - 1, size=n_fillers - 1, replace=False)
    ) + 1
    filler_lengths = np.diff(np.concatenate(([0], cuts, [filler_total]))).tolist()

    # interleave: scatter the key segments among the fillers
    lengths = list(filler_lengths)
    ranks = [-1] * len(lengths)
    positions = sorted(
        rng.choice(len(lengths) + spec.n_key_segments,
                   size=spec.n_key_segments, replace=False).tolist()
    )
    for offset, pos in enumerate(positions):
        lengths.insert(pos, key_lengths[offset])
        ranks.insert(pos, 3)

    # allocate 0/1/2 over fillers, always feeding the largest frame deficit
    deficits = {r: SCALE_SHARES[r] * n for r in (0, 1, 2)}
    fillers = [i for i, r in enumerate(ranks) if r < 0]
    for i in rng.permutation(fillers):
        rank = max(deficits, key=deficits.get)
        ranks[int(i)] = rank
        deficits[rank] -= lengths[int(i)]

    bounds = np.cumsum([0] + lengths)
    segments = SegmentList.from_pairs(list(zip(bounds[:-1], bounds[1:])), n_frames=n)
    return segments, np.asarray(ranks, dtype=np.int64)


def _simulate_user(segments, ranks, rng) -> UserAnnotation:
    seen = ranks.copy()
    flips = rng.random(len(segments)) < RANK_FLIP_P
    seen[flips] += rng.choice((-1, 1), size=int(flips.sum()))
    seen = np.clip(seen, 0, 3)

    keys = ranks == 3
    keep = np.zeros(len(segments), dtype=bool)
    keep[keys] = rng.random(int(keys.sum())) < KEY_INCLUDE_P
    keep[~keys] = rng.random(int((~keys).sum())) < FILLER_INCLUDE_P
    if not keep[keys].any():  # a user never returns an empty summary
        keep[int(np.argmax(keys))] = True

    mask = np.zeros(segments.n_frames, dtype=bool)
    for i in np.flatnonzero(keep):
        s, e = segments.bounds[i]
        mask[s:e] = True
    return UserAnnotation(summary=mask, segment_ranks=seen)


def _make_video(n: int, anchors: np.ndarray, spec: SyntheticSpec, rng):
    segments, ranks = _plant_segments(n, spec, rng)
    features = np.empty((n, spec.dim))
    for (s, e), rank in zip(segments, ranks):
        local = rng.normal(size=spec.dim)
        local /= np.linalg.norm(local)
        centroid = anchors[rank] + 0.6 * local
        centroid /= np.linalg.norm(centroid)
        features[s:e] = centroid + spec.noise_level * rng.normal(size=(e - s, spec.dim))
    users = [_simulate_user(segments, ranks, rng) for _ in range(spec.n_users)]
    return features, segments, ranks, users


def gen_synthetic(spec: SyntheticSpec, seed: int, out_dir) -> list[str]:
    """Write a corpus of feature and annotation files; returns video ids.

    Also writes planted ground-truth ranks into the manifest so tests and
    analyses can compare against the generator's intent.
    """
    spec = spec.validate()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(np.random.SeedSequence(seed))

    # orthonormal anchor directions, one per scale
    anchors = np.linalg.qr(rng.normal(size=(spec.dim, spec.dim)))[0][:4]

    ids = []
    planted = {}
    lo, hi = spec.frames_range
    for v in range(spec.n_videos):
        video_id = f"vid{v:03d}"
        n = int(rng.integers(lo, hi + 1))
        features, segments, ranks, users = _make_video(n, anchors, spec, rng)
        save_features(out_dir / f"{video_id}.feat", features)
        save_annotations(
            out_dir / f"{video_id}.json",
            AnnotationSet(video_id=video_id, fps=1, segments=segments, users=users),
        )
        planted[video_id] = ranks.tolist()
        ids.append(video_id)

    write_json(
        out_dir / "manifest.json",
        {"spec": asdict(spec), "seed": seed, "videos": ids, "planted_ranks": planted},
    )
    return ids
