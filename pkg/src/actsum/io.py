"""File formats: binary features, JSON annotations, checkpoints, reports.

Features are bulky and live in a small binary container (magic ``AVSF``,
little-endian, float32 payload promoted to float64 on load). Annotations
are human-auditable JSON. Checkpoints store every parameter tensor with
shape metadata, the training configuration, and the run seed behind a
SHA-256 integrity checksum; loading reproduces the parameters bit for
bit. All readers reject malformed input outright, naming the offending
field or byte offset.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .errors import (
    BadMagic,
    ChecksumMismatch,
    MalformedFile,
    NonFiniteEntry,
    TruncatedFile,
    VersionUnsupported,
)
from .labels import UserAnnotation
from .model import ModelConfig, ModelParameters
from .segmentation import SegmentList
from .summary import SummaryMask
from .training import TrainConfig, TrainHistory, VideoRecord

__all__ = [
    "FEATURE_MAGIC",
    "CHECKPOINT_MAGIC",
    "FORMAT_VERSION",
    "AnnotationSet",
    "save_features",
    "load_features",
    "save_annotations",
    "load_annotations",
    "save_checkpoint",
    "load_checkpoint",
    "save_history",
    "save_summary",
    "load_summary",
    "write_json",
    "load_dataset",
]

FEATURE_MAGIC = b"AVSF"
CHECKPOINT_MAGIC = b"AVSC"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIII")  # magic, version, n_frames, dim


@dataclasses.dataclass(frozen=True)
class AnnotationSet:
    """Parsed annotation file: shot partition plus per-user labels."""

    video_id: str
    fps: int
    segments: SegmentList
    users: list[UserAnnotation]

    @property
    def n_frames(self) -> int:
        return self.segments.n_frames


# features ------------------------------------------------------------------


def save_features(path, features: np.ndarray) -> None:
    features = np.asarray(features)
    if features.ndim != 2:
        raise MalformedFile(f"features must be 2D, got shape {features.shape}")
    payload = np.ascontiguousarray(features, dtype="<f4")
    if not np.all(np.isfinite(payload)):
        raise NonFiniteEntry("refusing to write non-finite feature values")
    n, d = payload.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(FEATURE_MAGIC, FORMAT_VERSION, n, d))
        fh.write(payload.tobytes())


def load_features(path) -> np.ndarray:
    """Read a feature file; values are promoted to float64."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise TruncatedFile(f"{path}: shorter than the {_HEADER.size}-byte header")
    magic, version, n, d = _HEADER.unpack_from(raw)
    if magic != FEATURE_MAGIC:
        raise BadMagic(f"{path}: magic {magic!r}, expected {FEATURE_MAGIC!r}")
    if version > FORMAT_VERSION:
        raise VersionUnsupported(f"{path}: feature format version {version}")
    expected = _HEADER.size + 4 * n * d
    if len(raw) != expected:
        raise TruncatedFile(f"{path}: {len(raw)} bytes, header declares {expected}")
    values = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size).reshape(n, d)
    bad = np.flatnonzero(~np.isfinite(values.ravel()))
    if bad.size:
        offset = _HEADER.size + 4 * int(bad[0])
        raise NonFiniteEntry(f"{path}: non-finite value at byte offset {offset}")
    return values.astype(np.float64)


# annotations ----------------------------------------------------------------


def save_annotations(path, annotations: AnnotationSet) -> None:
    doc = {
        "video_id": annotations.video_id,
        "fps": annotations.fps,
        "n_frames": annotations.n_frames,
        "segments": annotations.segments.pairs(),
        "users": [
            {
                "summary_frames": np.flatnonzero(u.summary).tolist(),
                "segment_ranks": np.asarray(u.segment_ranks).tolist(),
            }
            for u in annotations.users
        ],
    }
    write_json(path, doc)


def _field(doc: dict, key: str, path) -> object:
    if key not in doc:
        raise MalformedFile(f"{path}: missing field {key!r}")
    return doc[key]


def load_annotations(path) -> AnnotationSet:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise MalformedFile(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise MalformedFile(f"{path}: top level must be an object")

    video_id = str(_field(doc, "video_id", path))
    fps = _field(doc, "fps", path)
    if fps != 1:
        raise MalformedFile(f"{path}: field 'fps' must be 1, got {fps!r}")
    n_frames = _field(doc, "n_frames", path)
    if not isinstance(n_frames, int) or n_frames < 1:
        raise MalformedFile(f"{path}: field 'n_frames' must be a positive integer")
    try:
        segments = SegmentList.from_pairs(_field(doc, "segments", path), n_frames)
    except Exception as exc:
        raise MalformedFile(f"{path}: field 'segments' invalid ({exc})") from exc

    users = []
    raw_users = _field(doc, "users", path)
    if not isinstance(raw_users, list) or not raw_users:
        raise MalformedFile(f"{path}: field 'users' must be a nonempty list")
    for i, u in enumerate(raw_users):
        frames = u.get("summary_frames")
        ranks = u.get("segment_ranks")
        if frames is None or ranks is None:
            raise MalformedFile(
                f"{path}: user {i} needs 'summary_frames' and 'segment_ranks'"
            )
        idx = np.asarray(frames, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= n_frames):
            raise MalformedFile(f"{path}: user {i} 'summary_frames' out of range")
        mask = np.zeros(n_frames, dtype=bool)
        mask[idx] = True
        ranks = np.asarray(ranks, dtype=np.int64)
        if ranks.shape[0] != len(segments):
            raise MalformedFile(
                f"{path}: user {i} 'segment_ranks' has {ranks.shape[0]} entries, "
                f"expected {len(segments)}"
            )
        if ranks.size and (ranks.min() < 0 or ranks.max() > 3):
            raise MalformedFile(f"{path}: user {i} 'segment_ranks' outside 0..3")
        users.append(UserAnnotation(summary=mask, segment_ranks=ranks))
    return AnnotationSet(video_id=video_id, fps=1, segments=segments, users=users)


# checkpoints ----------------------------------------------------------------


def save_checkpoint(params: ModelParameters, config: TrainConfig, path) -> None:
    leaves = params.leaves()
    header = {
        "format_version": FORMAT_VERSION,
        "model_config": dataclasses.asdict(params.config),
        "train_config": dataclasses.asdict(config),
        "seed": config.seed,
        "tensors": [
            {"name": name, "shape": list(arr.shape)} for name, arr in leaves
        ],
    }
    header_bytes = json.dumps(header, sort_keys=True).encode()
    body = b"".join(
        np.ascontiguousarray(arr, dtype="<f8").tobytes() for _, arr in leaves
    )
    blob = (
        CHECKPOINT_MAGIC
        + struct.pack("<II", FORMAT_VERSION, len(header_bytes))
        + header_bytes
        + body
    )
    with open(path, "wb") as fh:
        fh.write(blob)
        fh.write(hashlib.sha256(blob).digest())


def load_checkpoint(path) -> tuple[ModelParameters, TrainConfig]:
    raw = Path(path).read_bytes()
    if len(raw) < 12 + 32:
        raise TruncatedFile(f"{path}: too short to be a checkpoint")
    if raw[:4] != CHECKPOINT_MAGIC:
        raise BadMagic(f"{path}: magic {raw[:4]!r}, expected {CHECKPOINT_MAGIC!r}")
    blob, digest = raw[:-32], raw[-32:]
    if hashlib.sha256(blob).digest() != digest:
        raise ChecksumMismatch(f"{path}: integrity checksum does not match")
    version, header_len = struct.unpack_from("<II", blob, 4)
    if version > FORMAT_VERSION:
        raise VersionUnsupported(f"{path}: checkpoint format version {version}")
    header_end = 12 + header_len
    if len(blob) < header_end:
        raise TruncatedFile(f"{path}: header truncated")
    try:
        header = json.loads(blob[12:header_end].decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedFile(f"{path}: unreadable checkpoint header ({exc})") from exc

    model_config = ModelConfig(**header["model_config"])
    train_config = TrainConfig(**header["train_config"])
    offset = header_end
    chunks = []
    for spec in header["tensors"]:
        size = int(np.prod(spec["shape"])) if spec["shape"] else 1
        nbytes = 8 * size
        if offset + nbytes > len(blob):
            raise TruncatedFile(f"{path}: tensor {spec['name']!r} truncated")
        chunks.append(np.frombuffer(blob, dtype="<f8", count=size, offset=offset))
        offset += nbytes
    if offset != len(blob):
        raise MalformedFile(f"{path}: {len(blob) - offset} trailing payload bytes")
    params = ModelParameters.from_flat(model_config, np.concatenate(chunks))
    return params, train_config


# histories, summaries, reports ----------------------------------------------


def save_history(path, history: TrainHistory) -> None:
    doc = {
        "epochs": [dataclasses.asdict(r) for r in history.epochs],
        "stopped_epoch": history.stopped_epoch,
        "best_epoch": history.best_epoch,
        "best_val_f1": history.best_val_f1,
    }
    write_json(path, doc)


def save_summary(path, video_id: str, mask: SummaryMask, budget: float) -> None:
    doc = {
        "video_id": video_id,
        "n_frames": int(mask.selected.shape[0]),
        "budget": budget,
        "budget_frames": mask.budget_frames,
        "selected_shots": [list(p) for p in mask.selected_intervals()],
    }
    write_json(path, doc)


def load_summary(path) -> tuple[str, np.ndarray]:
    """Read a summary file back to (video_id, boolean frame mask)."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise MalformedFile(f"{path}: invalid JSON ({exc})") from exc
    n = _field(doc, "n_frames", path)
    if not isinstance(n, int) or n < 1:
        raise MalformedFile(f"{path}: field 'n_frames' must be a positive integer")
    mask = np.zeros(n, dtype=bool)
    for pair in _field(doc, "selected_shots", path):
        s, e = int(pair[0]), int(pair[1])
        if not 0 <= s < e <= n:
            raise MalformedFile(f"{path}: shot [{s}, {e}) outside [0, {n})")
        mask[s:e] = True
    return str(_field(doc, "video_id", path)), mask


def write_json(path, doc) -> None:
    """Deterministic JSON: sorted keys, fixed separators, trailing newline."""
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


# datasets -------------------------------------------------------------------


def load_dataset(directory) -> list[VideoRecord]:
    """Pair <id>.feat with <id>.json under a directory, sorted by video id."""
    directory = Path(directory)
    records = []
    for feat_path in sorted(directory.glob("*.feat")):
        ann_path = feat_path.with_suffix(".json")
        if not ann_path.exists():
            raise MalformedFile(f"{feat_path}: no matching annotation file {ann_path}")
        features = load_features(feat_path)
        ann = load_annotations(ann_path)
        if ann.n_frames != features.shape[0]:
            raise MalformedFile(
                f"{ann_path}: {ann.n_frames} frames, features have {features.shape[0]}"
            )
        records.append(
            VideoRecord(
                video_id=ann.video_id,
                features=features,
                segments=ann.segments,
                users=ann.users,
            )
        )
    if not records:
        raise MalformedFile(f"{directory}: no *.feat files found")
    return records
