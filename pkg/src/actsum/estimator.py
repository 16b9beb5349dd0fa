"""Estimator-style wrapper so the summarizer composes with sklearn tooling.

``ActionnessSummarizer`` follows the fit/predict convention: ``fit`` takes
a list of annotated videos, ``predict`` scores a new feature matrix into
a budgeted keyshot summary, and hyperparameters round-trip through
``get_params``/``set_params`` (and therefore ``sklearn.base.clone``).
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .evaluation import keyshot_f1
from .model import ModelConfig
from .segmentation import SegmentList, kts_segment
from .summary import SummaryMask, generate_summary
from .training import TrainConfig, VideoRecord, train
from .validation import check_features

__all__ = ["ActionnessSummarizer"]


class ActionnessSummarizer(BaseEstimator):
    """Video summarizer trained jointly on diversity and actionness ranking.

    Parameters mirror the training configuration; architecture widths are
    exposed so small-scale runs stay cheap.

    Attributes set by fit: ``model_`` (trained parameters), ``history_``
    (per-epoch training record).
    """

    def __init__(
        self,
        lam=0.003,
        learning_rate=0.001,
        max_epochs=100,
        patience=5,
        val_ratio=0.2,
        budget=0.15,
        seed=0,
        subset_mode="stochastic",
        sigma_divisor=6.0,
        kts_penalty=1.0,
        clip_norm=5.0,
        f1_mode="average",
        hidden_units=256,
        phi_dim=256,
        head_hidden=256,
    ):
        self.lam = lam
        self.learning_rate = learning_rate
        self.max_epochs = max_epochs
        self.patience = patience
        self.val_ratio = val_ratio
        self.budget = budget
        self.seed = seed
        self.subset_mode = subset_mode
        self.sigma_divisor = sigma_divisor
        self.kts_penalty = kts_penalty
        self.clip_norm = clip_norm
        self.f1_mode = f1_mode
        self.hidden_units = hidden_units
        self.phi_dim = phi_dim
        self.head_hidden = head_hidden

    def _train_config(self) -> TrainConfig:
        return TrainConfig(
            lam=self.lam,
            learning_rate=self.learning_rate,
            max_epochs=self.max_epochs,
            patience=self.patience,
            val_ratio=self.val_ratio,
            budget=self.budget,
            seed=self.seed,
            subset_mode=self.subset_mode,
            sigma_divisor=self.sigma_divisor,
            kts_penalty=self.kts_penalty,
            clip_norm=self.clip_norm,
            f1_mode=self.f1_mode,
        ).validate()

    def fit(self, X: list[VideoRecord], y=None):
        """Train on a list of VideoRecord; y is ignored (kept for API parity)."""
        if not X:
            raise ValueError("fit requires at least one video")
        model_config = ModelConfig(
            input_dim=X[0].features.shape[1],
            hidden_units=self.hidden_units,
            phi_dim=self.phi_dim,
            head_hidden=self.head_hidden,
        )
        self.model_, self.history_ = train(X, self._train_config(), model_config)
        return self

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise NotFittedError("this ActionnessSummarizer instance is not fitted yet")

    def predict(self, features, segments: SegmentList | None = None) -> SummaryMask:
        """Summarize one video; segments are derived by KTS when omitted."""
        self._check_fitted()
        features = check_features(features)
        if segments is None:
            segments = kts_segment(
                features,
                max_segments=math.ceil(features.shape[0] / 10),
                penalty=self.kts_penalty,
            )
        return generate_summary(self.model_, features, segments, budget=self.budget)

    def score(self, X: list[VideoRecord], y=None) -> float:
        """Mean keyshot f1 of predicted summaries against user summaries."""
        self._check_fitted()
        scores = []
        for video in X:
            pred = self.predict(video.features, video.segments)
            refs = [u.summary for u in video.users]
            scores.append(keyshot_f1(pred, refs, mode=self.f1_mode).f1)
        return float(np.mean(scores))
