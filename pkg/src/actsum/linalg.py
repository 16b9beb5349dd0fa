"""Dense linear-algebra helpers and finite-difference gradient checking."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NonFiniteValue, NotPositiveDefinite

SYMMETRY_TOL = 1e-9


def check_symmetric(m: np.ndarray, tol: float = SYMMETRY_TOL) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if m.size and np.abs(m - m.T).max() > tol:
        raise ValueError("matrix is not symmetric within tolerance")
    return m


def logdet(m: np.ndarray) -> float:
    """log det of a symmetric positive-definite matrix.

    Uses a Cholesky factorization (2 * sum log of the pivots), never the
    raw determinant, so values stay representable for any size. The empty
    matrix has log det 0 by the det(empty) = 1 convention.

    Raises NotPositiveDefinite when any pivot is nonpositive.
    """
    m = check_symmetric(m)
    if m.shape[0] == 0:
        return 0.0
    try:
        chol = np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite(
            f"matrix of size {m.shape[0]} is not positive definite"
        ) from None
    return 2.0 * float(np.sum(np.log(np.diagonal(chol))))


@dataclass(frozen=True)
class GradCheckReport:
    """Outcome of comparing an analytic gradient with central differences."""

    max_rel_error: float
    worst_index: int
    passed: bool


def grad_check(
    f: Callable[[np.ndarray], float],
    grad: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    eps: float = 1e-5,
    tol: float = 1e-6,
) -> GradCheckReport:
    """Check an analytic gradient against central finite differences.

    Per coordinate i the numeric derivative is
    (f(x + eps e_i) - f(x - eps e_i)) / (2 eps) and the relative error uses
    denominator max(|analytic|, |numeric|, 1e-8). |eps| must lie in
    [1e-7, 1e-3]; the sign of eps does not affect the result.
    """
    if not 1e-7 <= abs(eps) <= 1e-3:
        raise ValueError(f"|eps| must lie in [1e-7, 1e-3], got {eps}")
    x = np.asarray(x, dtype=np.float64)
    analytic = np.asarray(grad(x), dtype=np.float64)
    if analytic.shape != x.shape:
        raise ValueError("gradient shape does not match parameter shape")
    if not np.all(np.isfinite(analytic)):
        raise NonFiniteValue("analytic gradient contains non-finite values")

    max_rel = 0.0
    worst = 0
    for i in range(x.size):
        step = np.zeros_like(x)
        step.flat[i] = eps
        hi = float(f(x + step))
        lo = float(f(x - step))
        if not (np.isfinite(hi) and np.isfinite(lo)):
            raise NonFiniteValue(f"f is non-finite near coordinate {i}")
        numeric = (hi - lo) / (2.0 * eps)
        a = float(analytic.flat[i])
        rel = abs(a - numeric) / max(abs(a), abs(numeric), 1e-8)
        if rel > max_rel:
            max_rel = rel
            worst = i
    return GradCheckReport(max_rel_error=max_rel, worst_index=worst, passed=max_rel <= tol)
