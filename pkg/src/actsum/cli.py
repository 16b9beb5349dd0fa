"""Command-line pipeline: generate, segment, label, train, summarize, evaluate.

Every subcommand prints its resolved configuration (including the seed)
before doing any work, so runs are auditable and reproducible. Settings
resolve in order: built-in defaults, then a JSON config file given with
--config, then explicit flags. Exit status is 0 on success and 2 on any
diagnosed error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import io as aio
from .errors import ActsumError
from .evaluation import actionness_accuracy, keyshot_f1, pairwise_consensus_f1
from .labels import build_oracle_labels
from .model import ModelConfig, forward_all
from .segmentation import SegmentList, kts_segment
from .summary import generate_summary
from .synthetic import SyntheticSpec, gen_synthetic
from .training import TrainConfig, train
from .validation import N_RANKS

DEFAULTS = {
    "seed": 0,
    "budget": 0.15,
    "lam": 0.003,
    "mode": "average",
    "learning_rate": 0.001,
    "max_epochs": 100,
    "patience": 5,
    "val_ratio": 0.2,
    "subset_mode": "stochastic",
    "sigma_divisor": 6.0,
    "kts_penalty": 1.0,
    "clip_norm": 5.0,
    "hidden_units": 256,
    "phi_dim": 256,
    "head_hidden": 256,
    "max_segments": None,
    "n_videos": 20,
    "frames_min": 60,
    "frames_max": 120,
    "dim": 16,
    "key_segments": 3,
    "noise": 0.08,
    "users": 3,
}


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=None, help="run seed")
    p.add_argument("--config", type=Path, default=None, help="JSON config file")
    p.add_argument("--budget", type=float, default=None,
                   help="summary duration budget as a fraction of frames")
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="actionness regularization weight")
    p.add_argument("--mode", choices=("average", "max"), default=None,
                   help="how per-user f1 scores combine")
    return p


def _resolve(args: argparse.Namespace) -> dict:
    """defaults < config file < explicit flags; prints nothing."""
    resolved = dict(DEFAULTS)
    if args.config is not None:
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ActsumError(f"cannot read config file {args.config}: {exc}") from exc
        unknown = set(file_cfg) - set(resolved)
        if unknown:
            raise ActsumError(f"unknown config keys: {sorted(unknown)}")
        resolved.update(file_cfg)
    for key in resolved:
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value
    return resolved


def _announce(command: str, cfg: dict) -> None:
    printable = {k: v for k, v in sorted(cfg.items()) if v is not None}
    print(f"{command} config: {json.dumps(printable, sort_keys=True, default=str)}")


def _train_config(cfg: dict) -> TrainConfig:
    return TrainConfig(
        lam=cfg["lam"],
        learning_rate=cfg["learning_rate"],
        max_epochs=cfg["max_epochs"],
        patience=cfg["patience"],
        val_ratio=cfg["val_ratio"],
        budget=cfg["budget"],
        seed=cfg["seed"],
        subset_mode=cfg["subset_mode"],
        sigma_divisor=cfg["sigma_divisor"],
        kts_penalty=cfg["kts_penalty"],
        clip_norm=cfg["clip_norm"],
        f1_mode=cfg["mode"],
    ).validate()


# subcommands ----------------------------------------------------------------


def _cmd_gen_synthetic(args) -> int:
    cfg = _resolve(args)
    _announce("gen-synthetic", cfg)
    spec = SyntheticSpec(
        n_videos=cfg["n_videos"],
        frames_range=(cfg["frames_min"], cfg["frames_max"]),
        dim=cfg["dim"],
        n_key_segments=cfg["key_segments"],
        noise_level=cfg["noise"],
        n_users=cfg["users"],
    )
    ids = gen_synthetic(spec, cfg["seed"], args.out)
    print(f"wrote {len(ids)} videos to {args.out}")
    return 0


def _cmd_segment(args) -> int:
    cfg = _resolve(args)
    _announce("segment", cfg)
    features = aio.load_features(args.features)
    max_segments = cfg["max_segments"] or math.ceil(features.shape[0] / 10)
    segments = kts_segment(features, max_segments=max_segments,
                           penalty=cfg["kts_penalty"])
    doc = {"n_frames": segments.n_frames, "segments": segments.pairs()}
    aio.write_json(args.out, doc)
    print(f"{len(segments)} segments -> {args.out}")
    return 0


def _cmd_oracle(args) -> int:
    cfg = _resolve(args)
    _announce("oracle", cfg)
    ann = aio.load_annotations(args.annotations)
    labels = build_oracle_labels(ann.users, ann.segments,
                                 sigma_divisor=cfg["sigma_divisor"])
    doc = {
        "video_id": ann.video_id,
        "n_frames": ann.n_frames,
        "summary_mask": labels.summary_mask.astype(int).tolist(),
        "smoothed": labels.smoothed.tolist(),
        "frame_ranks": labels.frame_ranks.tolist(),
    }
    aio.write_json(args.out, doc)
    print(f"oracle labels -> {args.out}")
    return 0


def _cmd_train(args) -> int:
    cfg = _resolve(args)
    _announce("train", cfg)
    dataset = aio.load_dataset(args.data)
    train_config = _train_config(cfg)
    model_config = ModelConfig(
        input_dim=dataset[0].features.shape[1],
        hidden_units=cfg["hidden_units"],
        phi_dim=cfg["phi_dim"],
        head_hidden=cfg["head_hidden"],
    )
    params, history = train(dataset, train_config, model_config, log=print)
    aio.save_checkpoint(params, train_config, args.out)
    history_path = Path(args.out).with_suffix(".history.json")
    aio.save_history(history_path, history)
    print(f"checkpoint -> {args.out}")
    print(f"history -> {history_path}")
    return 0


def _segments_for(features, args, cfg) -> SegmentList:
    if getattr(args, "annotations", None) is not None:
        ann = aio.load_annotations(args.annotations)
        return ann.segments
    max_segments = cfg["max_segments"] or math.ceil(features.shape[0] / 10)
    return kts_segment(features, max_segments=max_segments, penalty=cfg["kts_penalty"])


def _cmd_summarize(args) -> int:
    cfg = _resolve(args)
    _announce("summarize", cfg)
    params, _ = aio.load_checkpoint(args.checkpoint)
    features = aio.load_features(args.features)
    segments = _segments_for(features, args, cfg)
    mask = generate_summary(params, features, segments, budget=cfg["budget"])
    video_id = Path(args.features).stem
    aio.save_summary(args.out, video_id, mask, cfg["budget"])
    print(
        f"summary: {int(mask.selected.sum())}/{features.shape[0]} frames "
        f"({len(mask.selected_shots)} shots) -> {args.out}"
    )
    return 0


def _cmd_evaluate(args) -> int:
    cfg = _resolve(args)
    _announce("evaluate", cfg)
    _, pred = aio.load_summary(args.summary)
    ann = aio.load_annotations(args.annotations)
    if ann.n_frames != pred.shape[0]:
        raise ActsumError(
            f"summary covers {pred.shape[0]} frames, annotations {ann.n_frames}"
        )
    report = keyshot_f1(pred, [u.summary for u in ann.users], mode=cfg["mode"])
    doc = {
        "video_id": ann.video_id,
        "mode": report.mode,
        "f1": report.f1,
        "precision": report.precision,
        "recall": report.recall,
        "per_user_f1": list(report.per_user_f1),
    }
    if args.out:
        aio.write_json(args.out, doc)
    print(json.dumps(doc, sort_keys=True))
    return 0


def _cmd_analyze(args) -> int:
    cfg = _resolve(args)
    _announce("analyze", cfg)
    dataset = aio.load_dataset(args.data)
    sigma = cfg["sigma_divisor"]

    n_users = min(len(v.users) for v in dataset)
    freq_counts = np.zeros((n_users, N_RANKS))
    video_counts = np.zeros(N_RANKS)
    oracle_summary_counts = np.zeros(N_RANKS)
    pred_summary_counts = np.zeros(N_RANKS)
    consensus = []
    pred_all = []
    oracle_all = []

    checkpoint = None
    if args.checkpoint is not None:
        checkpoint, _ = aio.load_checkpoint(args.checkpoint)

    for video in dataset:
        lengths = video.segments.lengths
        for u in range(n_users):
            ranks = video.users[u].segment_ranks
            for scale in range(N_RANKS):
                freq_counts[u, scale] += lengths[ranks == scale].sum()
        if len(video.users) >= 2:
            per_scale, _ = pairwise_consensus_f1(video.users)
            consensus.append(per_scale)

        labels = build_oracle_labels(video.users, video.segments, sigma_divisor=sigma)
        video_counts += np.bincount(labels.frame_ranks, minlength=N_RANKS)
        if labels.summary_mask.any():
            sel = labels.frame_ranks[labels.summary_mask]
            oracle_summary_counts += np.bincount(sel, minlength=N_RANKS)
        oracle_all.append(labels.frame_ranks)

        if checkpoint is not None:
            out = forward_all(checkpoint, video.features)
            pred_all.append(out.p.argmax(axis=1))
            pred_mask = generate_summary(
                checkpoint, video.features, video.segments, budget=cfg["budget"]
            ).selected
            if pred_mask.any():
                pred_summary_counts += np.bincount(
                    labels.frame_ranks[pred_mask], minlength=N_RANKS
                )

    doc = {
        "n_videos": len(dataset),
        "rank_frequency_per_user": (freq_counts / freq_counts.sum(axis=1, keepdims=True)).tolist(),
        "video_distribution": (video_counts / video_counts.sum()).tolist(),
        "oracle_summary_distribution": (
            oracle_summary_counts / max(oracle_summary_counts.sum(), 1.0)
        ).tolist(),
    }
    if consensus:
        stacked = np.vstack(consensus)
        per_scale = np.nanmean(stacked, axis=0)
        doc["consensus_f1_per_scale"] = [
            None if np.isnan(v) else float(v) for v in per_scale
        ]
        doc["consensus_f1_overall"] = float(np.nanmean(per_scale))
    if checkpoint is not None and pred_all:
        accuracy, chance = actionness_accuracy(
            np.concatenate(pred_all), np.concatenate(oracle_all)
        )
        doc["actionness_accuracy"] = accuracy
        doc["actionness_chance"] = chance
        doc["predicted_summary_distribution"] = (
            pred_summary_counts / max(pred_summary_counts.sum(), 1.0)
        ).tolist()

    if args.out:
        aio.write_json(args.out, doc)
    if args.tables:
        _write_tables(Path(args.tables), doc)
    print(json.dumps(doc, sort_keys=True))
    return 0


def _write_tables(directory: Path, doc: dict) -> None:
    """Plot-ready TSV tables: one row per user or per scale."""
    directory.mkdir(parents=True, exist_ok=True)
    scales = "\t".join(f"scale{j}" for j in range(N_RANKS))
    lines = [f"user\t{scales}"]
    for u, row in enumerate(doc["rank_frequency_per_user"]):
        lines.append(f"user{u}\t" + "\t".join(f"{v:.6f}" for v in row))
    (directory / "rank_frequency.tsv").write_text("\n".join(lines) + "\n")

    lines = [f"source\t{scales}"]
    for key in ("video_distribution", "oracle_summary_distribution",
                "predicted_summary_distribution"):
        if key in doc:
            lines.append(key + "\t" + "\t".join(f"{v:.6f}" for v in doc[key]))
    (directory / "distributions.tsv").write_text("\n".join(lines) + "\n")

    if "consensus_f1_per_scale" in doc:
        lines = ["scale\tf1"]
        for j, v in enumerate(doc["consensus_f1_per_scale"]):
            lines.append(f"{j}\t" + ("" if v is None else f"{v:.6f}"))
        (directory / "consensus.tsv").write_text("\n".join(lines) + "\n")


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="actsum",
        description="Actionness-regularized video summarization pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-synthetic", parents=[common],
                       help="write a synthetic corpus")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--n-videos", dest="n_videos", type=int, default=None)
    p.add_argument("--frames-min", dest="frames_min", type=int, default=None)
    p.add_argument("--frames-max", dest="frames_max", type=int, default=None)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--key-segments", dest="key_segments", type=int, default=None)
    p.add_argument("--noise", type=float, default=None)
    p.add_argument("--users", type=int, default=None)
    p.set_defaults(func=_cmd_gen_synthetic)

    p = sub.add_parser("segment", parents=[common],
                       help="kernel temporal segmentation of a feature file")
    p.add_argument("--features", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--max-segments", dest="max_segments", type=int, default=None)
    p.add_argument("--kts-penalty", dest="kts_penalty", type=float, default=None)
    p.set_defaults(func=_cmd_segment)

    p = sub.add_parser("oracle", parents=[common],
                       help="build oracle labels from an annotation file")
    p.add_argument("--annotations", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--sigma-divisor", dest="sigma_divisor", type=float, default=None)
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("train", parents=[common], help="train on a dataset directory")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--learning-rate", dest="learning_rate", type=float, default=None)
    p.add_argument("--max-epochs", dest="max_epochs", type=int, default=None)
    p.add_argument("--patience", type=int, default=None)
    p.add_argument("--val-ratio", dest="val_ratio", type=float, default=None)
    p.add_argument("--subset-mode", dest="subset_mode",
                   choices=("stochastic", "deterministic"), default=None)
    p.add_argument("--sigma-divisor", dest="sigma_divisor", type=float, default=None)
    p.add_argument("--kts-penalty", dest="kts_penalty", type=float, default=None)
    p.add_argument("--clip-norm", dest="clip_norm", type=float, default=None)
    p.add_argument("--hidden-units", dest="hidden_units", type=int, default=None)
    p.add_argument("--phi-dim", dest="phi_dim", type=int, default=None)
    p.add_argument("--head-hidden", dest="head_hidden", type=int, default=None)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("summarize", parents=[common],
                       help="summarize a feature file with a checkpoint")
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--features", type=Path, required=True)
    p.add_argument("--annotations", type=Path, default=None,
                   help="reuse this annotation file's segments instead of KTS")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--max-segments", dest="max_segments", type=int, default=None)
    p.add_argument("--kts-penalty", dest="kts_penalty", type=float, default=None)
    p.set_defaults(func=_cmd_summarize)

    p = sub.add_parser("evaluate", parents=[common],
                       help="keyshot f1 of a summary file against annotations")
    p.add_argument("--summary", type=Path, required=True)
    p.add_argument("--annotations", type=Path, required=True)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("analyze", parents=[common],
                       help="annotation and summary analysis tables")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--checkpoint", type=Path, default=None)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--tables", type=Path, default=None,
                   help="directory for TSV plot tables")
    p.add_argument("--sigma-divisor", dest="sigma_divisor", type=float, default=None)
    p.set_defaults(func=_cmd_analyze)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ActsumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
