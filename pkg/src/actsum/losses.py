"""The three training losses and the kernel they share.

The diversity term scores a target frame subset y under a determinantal
model whose kernel is the Gram matrix of quality-scaled frame features,

    L_ij = q_i * (phi_i . phi_j) * q_j,

with negative log-likelihood logdet(L + I) - logdet(L_y). The
regularization term is a categorical cross entropy over the four
actionness ranks, summed over frames. The joint objective is their
lambda-weighted sum.
"""

from __future__ import annotations

import numpy as np

from .errors import NotPositiveDefinite, ShapeMismatch, SingularSubset
from .linalg import logdet
from .validation import check_prob_rows, check_vector

__all__ = [
    "build_dpp_kernel",
    "dpp_mle_loss",
    "dpp_mle_grad",
    "actionness_ce_loss",
    "joint_loss",
    "LOG_CLAMP",
]

LOG_CLAMP = 1e-12


def build_dpp_kernel(phi: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Gram kernel of quality-scaled feature rows; symmetric PSD by construction."""
    phi = np.asarray(phi, dtype=np.float64)
    if phi.ndim != 2:
        raise ShapeMismatch(f"phi must be 2D, got shape {phi.shape}")
    q = check_vector(q, n=phi.shape[0], name="q")
    scaled = phi * q[:, None]
    kernel = scaled @ scaled.T
    return 0.5 * (kernel + kernel.T)


def _check_subset(y, n: int) -> np.ndarray:
    y = np.asarray(sorted(set(int(i) for i in y)), dtype=np.intp)
    if y.size and (y[0] < 0 or y[-1] >= n):
        raise ShapeMismatch(f"subset indices must lie in [0, {n})")
    return y


def dpp_mle_loss(kernel: np.ndarray, y) -> float:
    """Negative log-likelihood of subset y: logdet(L + I) - logdet(L_y).

    The empty subset uses det of the empty matrix = 1. Raises
    SingularSubset when L_y has no Cholesky factorization, i.e. the subset
    has probability zero under the model.
    """
    kernel = np.asarray(kernel, dtype=np.float64)
    n = kernel.shape[0]
    y = _check_subset(y, n)
    norm = logdet(kernel + np.eye(n))
    try:
        sub = logdet(kernel[np.ix_(y, y)])
    except NotPositiveDefinite as exc:
        raise SingularSubset(f"subset of size {y.size} has a singular kernel minor") from exc
    return norm - sub


def dpp_mle_grad(kernel: np.ndarray, y) -> np.ndarray:
    """Gradient of dpp_mle_loss with respect to the kernel entries.

    (L + I)^-1 minus the inverse of the subset minor scattered back into
    the rows and columns of y.
    """
    kernel = np.asarray(kernel, dtype=np.float64)
    n = kernel.shape[0]
    y = _check_subset(y, n)
    grad = np.linalg.inv(kernel + np.eye(n))
    if y.size:
        sub = kernel[np.ix_(y, y)]
        try:
            np.linalg.cholesky(sub)
        except np.linalg.LinAlgError:
            raise SingularSubset(
                f"subset of size {y.size} has a singular kernel minor"
            ) from None
        grad[np.ix_(y, y)] -= np.linalg.inv(sub)
    return 0.5 * (grad + grad.T)


def actionness_ce_loss(p: np.ndarray, t: np.ndarray) -> float:
    """Categorical cross entropy summed over frames.

    p holds per-frame rank probabilities, t the one-hot targets;
    probabilities are clamped below at 1e-12 before the log.
    """
    p = check_prob_rows(p, name="p")
    t = np.asarray(t, dtype=np.float64)
    if t.shape != p.shape:
        raise ShapeMismatch(f"targets shape {t.shape} != predictions shape {p.shape}")
    return float(-(t * np.log(np.clip(p, LOG_CLAMP, None))).sum())


def joint_loss(summarization: float, actionness: float, lam: float) -> float:
    """Weighted multi-task objective: summarization + lam * actionness."""
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    return float(summarization) + float(lam) * float(actionness)
