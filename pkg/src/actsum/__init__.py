"""Actionness-regularized video summarization.

Feature matrices go in; budgeted keyshot summaries come out. The pieces:
kernel temporal segmentation, oracle-label construction from multiple
annotators, a bi-directional gated encoder with diversity/quality/
actionness heads trained on a joint loss, knapsack keyshot selection,
and an evaluation suite (keyshot f1, consensus, rank distributions).
"""

from .errors import ActsumError
from .estimator import ActionnessSummarizer
from .evaluation import (
    EvalReport,
    actionness_accuracy,
    actionness_distribution,
    keyshot_f1,
    pairwise_consensus_f1,
    rank_frequency,
)
from .labels import (
    OracleLabels,
    UserAnnotation,
    build_oracle_labels,
    gaussian_smooth,
    oracle_actionness,
    oracle_summary,
    sample_training_subset,
)
from .linalg import GradCheckReport, grad_check, logdet
from .losses import (
    actionness_ce_loss,
    build_dpp_kernel,
    dpp_mle_grad,
    dpp_mle_loss,
    joint_loss,
)
from .model import (
    ModelConfig,
    ModelParameters,
    bigru_forward,
    forward_all,
    gru_cell_forward,
    heads_forward,
    init_parameters,
    model_backward,
)
from .segmentation import SegmentList, frame_kernel, kts_segment, segment_cost
from .summary import SummaryMask, generate_summary, knapsack_select, shot_scores
from .synthetic import SyntheticSpec, gen_synthetic
from .training import AdamState, TrainConfig, VideoRecord, adam_step, split_validation, train

__version__ = "0.1.0"

__all__ = [
    "ActsumError",
    "ActionnessSummarizer",
    "EvalReport",
    "GradCheckReport",
    "ModelConfig",
    "ModelParameters",
    "OracleLabels",
    "SegmentList",
    "SummaryMask",
    "SyntheticSpec",
    "TrainConfig",
    "AdamState",
    "UserAnnotation",
    "VideoRecord",
    "actionness_accuracy",
    "actionness_ce_loss",
    "actionness_distribution",
    "adam_step",
    "bigru_forward",
    "build_dpp_kernel",
    "build_oracle_labels",
    "dpp_mle_grad",
    "dpp_mle_loss",
    "forward_all",
    "frame_kernel",
    "gaussian_smooth",
    "gen_synthetic",
    "generate_summary",
    "grad_check",
    "gru_cell_forward",
    "heads_forward",
    "init_parameters",
    "joint_loss",
    "keyshot_f1",
    "knapsack_select",
    "kts_segment",
    "logdet",
    "model_backward",
    "oracle_actionness",
    "oracle_summary",
    "pairwise_consensus_f1",
    "rank_frequency",
    "sample_training_subset",
    "segment_cost",
    "shot_scores",
    "split_validation",
    "train",
]
