"""Joint-loss optimization with Adam and validation-based early stopping.

One optimization step per video (videos vary in length); the diversity
target subset is redrawn every epoch in stochastic mode. After each epoch
the mean keyshot f1 on a held-out validation split decides early
stopping, and the parameters of the best validation epoch are returned.
Everything is driven by a single seed, so identical configurations
reproduce bit-identical parameters.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyDataset, NonFiniteValue, SingularSubset
from .labels import OracleLabels, UserAnnotation, build_oracle_labels, sample_training_subset
from .model import ModelConfig, ModelParameters, init_parameters, loss_and_grad
from .segmentation import SegmentList
from .summary import generate_summary
from .evaluation import keyshot_f1
from .validation import one_hot_ranks

__all__ = [
    "TrainConfig",
    "AdamState",
    "adam_step",
    "split_validation",
    "EarlyStopper",
    "EpochRecord",
    "TrainHistory",
    "VideoRecord",
    "train",
]


@dataclass(frozen=True)
class TrainConfig:
    """Optimization and labeling settings for one training run."""

    lam: float = 0.003
    learning_rate: float = 0.001
    max_epochs: int = 100
    patience: int = 5
    val_ratio: float = 0.2
    budget: float = 0.15
    seed: int = 0
    subset_mode: str = "stochastic"  # or "deterministic"
    sigma_divisor: float = 6.0
    kts_penalty: float = 1.0
    clip_norm: float | None = 5.0
    f1_mode: str = "average"

    def validate(self) -> "TrainConfig":
        if not 0.0 < self.val_ratio < 1.0:
            raise ValueError("val_ratio must lie strictly between 0 and 1")
        if not 0.0 < self.budget <= 1.0:
            raise ValueError("budget must lie in (0, 1]")
        if self.patience < 1:
            raise ValueError("patience must be at least 1")
        if self.subset_mode not in ("stochastic", "deterministic"):
            raise ValueError("subset_mode must be 'stochastic' or 'deterministic'")
        if self.lam < 0 or self.learning_rate <= 0 or self.max_epochs < 1:
            raise ValueError("invalid optimization settings")
        return self


@dataclass
class AdamState:
    """First/second moment accumulators for the Adam update."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def zeros(cls, dim: int, **kwargs) -> "AdamState":
        return cls(m=np.zeros(dim), v=np.zeros(dim), **kwargs)


def adam_step(
    theta: np.ndarray, grad: np.ndarray, state: AdamState, lr: float
) -> tuple[np.ndarray, AdamState]:
    """One bias-corrected Adam update; returns new parameters and state."""
    theta = np.asarray(theta, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    if theta.shape != grad.shape or theta.shape != state.m.shape:
        raise ValueError("theta, grad, and state must have matching lengths")
    if not np.all(np.isfinite(grad)):
        raise NonFiniteValue("gradient passed to adam_step is non-finite")
    if lr <= 0:
        raise ValueError("learning rate must be positive")
    t = state.t + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    m_hat = m / (1.0 - state.beta1**t)
    v_hat = v / (1.0 - state.beta2**t)
    new_theta = theta - lr * m_hat / (np.sqrt(v_hat) + state.epsilon)
    if not np.all(np.isfinite(new_theta)):
        raise NonFiniteValue("adam_step produced non-finite parameters")
    new_state = AdamState(
        m=m, v=v, t=t, beta1=state.beta1, beta2=state.beta2, epsilon=state.epsilon
    )
    return new_theta, new_state


def split_validation(dataset: list, ratio: float, seed: int):
    """Deterministic split: ceil(ratio * N) videos go to validation."""
    if not dataset:
        raise EmptyDataset("cannot split an empty dataset")
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must lie strictly between 0 and 1")
    order = np.random.default_rng(seed).permutation(len(dataset))
    n_val = int(np.ceil(ratio * len(dataset)))
    val_idx = set(order[:n_val].tolist())
    train = [v for i, v in enumerate(dataset) if i not in val_idx]
    val = [v for i, v in enumerate(dataset) if i in val_idx]
    return train, val


class EarlyStopper:
    """Stop when the validation score fails to improve `patience` times in a row."""

    def __init__(self, patience: int):
        if patience < 1:
            raise ValueError("patience must be at least 1")
        self.patience = patience
        self.best_score = -np.inf
        self.best_epoch = 0
        self.stale = 0

    def update(self, epoch: int, score: float) -> bool:
        """Record an epoch score; returns True when training should stop."""
        if score > self.best_score:
            self.best_score = score
            self.best_epoch = epoch
            self.stale = 0
        else:
            self.stale += 1
        return self.stale >= self.patience


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    loss_summarization: float
    loss_actionness: float
    loss_joint: float
    val_f1: float
    wall_time: float


@dataclass
class TrainHistory:
    epochs: list[EpochRecord] = field(default_factory=list)
    stopped_epoch: int = 0
    best_epoch: int = 0
    best_val_f1: float = float("-inf")

    def log_lines(self) -> list[str]:
        lines = []
        for r in self.epochs:
            lines.append(
                f"epoch {r.epoch:3d}  S {r.loss_summarization:10.4f}  "
                f"R {r.loss_actionness:10.4f}  joint {r.loss_joint:10.4f}  "
                f"val_f1 {r.val_f1:.4f}  {r.wall_time:.2f}s"
            )
        lines.append(
            f"stopped at epoch {self.stopped_epoch}, best epoch "
            f"{self.best_epoch} (val_f1 {self.best_val_f1:.4f})"
        )
        return lines


@dataclass(frozen=True)
class VideoRecord:
    """One video's inputs: features, shot partition, user annotations."""

    video_id: str
    features: np.ndarray
    segments: SegmentList
    users: list[UserAnnotation]


def _validation_f1(params, videos, budget, mode) -> float:
    scores = []
    for video in videos:
        pred = generate_summary(params, video.features, video.segments, budget=budget)
        refs = [u.summary for u in video.users]
        scores.append(keyshot_f1(pred, refs, mode=mode).f1)
    return float(np.mean(scores))


def train(
    dataset: list[VideoRecord],
    config: TrainConfig = TrainConfig(),
    model_config: ModelConfig | None = None,
    labels: dict[str, OracleLabels] | None = None,
    log=None,
) -> tuple[ModelParameters, TrainHistory]:
    """Optimize the joint loss on a dataset of annotated videos.

    Per epoch: shuffle the training videos, redraw each video's target
    subset (stochastic mode), take one Adam step per video, then score
    validation f1. Returns the parameters of the best validation epoch.
    `labels` overrides the oracle labels built from the annotations.
    """
    config = config.validate()
    if not dataset:
        raise EmptyDataset("training requires at least one video")
    if model_config is None:
        model_config = ModelConfig(input_dim=dataset[0].features.shape[1])

    oracle: dict[str, OracleLabels] = {}
    for video in dataset:
        if labels is not None and video.video_id in labels:
            oracle[video.video_id] = labels[video.video_id]
        else:
            oracle[video.video_id] = build_oracle_labels(
                video.users, video.segments, sigma_divisor=config.sigma_divisor
            )

    train_videos, val_videos = split_validation(dataset, config.val_ratio, config.seed)
    if not train_videos:
        raise EmptyDataset("validation split left no training videos")

    seq = np.random.SeedSequence(config.seed)
    init_seed, epoch_seed = seq.spawn(2)
    params = init_parameters(model_config, np.random.default_rng(init_seed))
    theta = params.flatten()
    state = AdamState.zeros(theta.size)
    epoch_rng = np.random.default_rng(epoch_seed)

    stopper = EarlyStopper(config.patience)
    history = TrainHistory()
    best_theta = theta.copy()

    for epoch in range(1, config.max_epochs + 1):
        started = time.perf_counter()
        order = epoch_rng.permutation(len(train_videos))
        sums = np.zeros(3)
        for idx in order:
            video = train_videos[idx]
            lab = oracle[video.video_id]
            try:
                subset = sample_training_subset(
                    lab,
                    video.segments,
                    rng=epoch_rng,
                    deterministic=config.subset_mode == "deterministic",
                )
                params = ModelParameters.from_flat(model_config, theta)
                parts, grad = loss_and_grad(
                    params,
                    video.features,
                    subset,
                    one_hot_ranks(lab.frame_ranks),
                    config.lam,
                )
            except SingularSubset as exc:
                raise SingularSubset(f"video {video.video_id!r}: {exc}") from exc
            except NonFiniteValue as exc:
                raise NonFiniteValue(
                    f"epoch {epoch}, video {video.video_id!r}: {exc}"
                ) from exc
            if config.clip_norm is not None:
                norm = float(np.linalg.norm(grad))
                if norm > config.clip_norm:
                    grad = grad * (config.clip_norm / norm)
            theta, state = adam_step(theta, grad, state, config.learning_rate)
            sums += (parts.summarization, parts.actionness, parts.joint)

        params = ModelParameters.from_flat(model_config, theta)
        val_f1 = _validation_f1(params, val_videos, config.budget, config.f1_mode)
        record = EpochRecord(
            epoch=epoch,
            loss_summarization=sums[0] / len(train_videos),
            loss_actionness=sums[1] / len(train_videos),
            loss_joint=sums[2] / len(train_videos),
            val_f1=val_f1,
            wall_time=time.perf_counter() - started,
        )
        history.epochs.append(record)
        if log is not None:
            log(history.log_lines()[len(history.epochs) - 1])
        stop = stopper.update(epoch, val_f1)
        if stopper.best_epoch == epoch:
            best_theta = theta.copy()
        history.stopped_epoch = epoch
        if stop:
            break

    history.best_epoch = stopper.best_epoch
    history.best_val_f1 = stopper.best_score
    return ModelParameters.from_flat(model_config, best_theta), history
