"""Numerical utilities shared by the model modules.

Monte Carlo standard errors for serially dependent series (batch means) and
z-scores against closed-form targets.
"""

import logging
import math
from typing import Optional, Sequence

import numpy as np

from ..config import settings

logger = logging.getLogger(__name__)


def batch_means(x: np.ndarray, n_batches: int) -> np.ndarray:
    """Means of ``n_batches`` equal consecutive batches; the tail remainder is dropped."""
    x = np.asarray(x, dtype=float)
    batch_size = x.size // n_batches
    trimmed = x[: batch_size * n_batches]
    return trimmed.reshape(n_batches, batch_size).mean(axis=1)


def batch_means_se(x: np.ndarray, n_batches: Optional[int] = None) -> float:
    """Standard error of ``mean(x)`` for a stationary, serially dependent series.

    Uses non-overlapping batch means; falls back to the i.i.d. formula when the
    series is too short to fill two samples per batch.
    """
    x = np.asarray(x, dtype=float)
    n_batches = n_batches or settings.BATCH_COUNT
    if x.size < 2:
        return math.inf
    if x.size < 2 * n_batches:
        return float(np.std(x, ddof=1) / math.sqrt(x.size))
    means = batch_means(x, n_batches)
    return float(np.std(means, ddof=1) / math.sqrt(n_batches))


def z_score(estimate: float, target: float, se: float) -> float:
    """(estimate - target) / se, with a zero standard error treated exactly."""
    diff = estimate - target
    if se > 0.0 and math.isfinite(se):
        return float(diff / se)
    if se == 0.0:
        return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
    return 0.0


def lag1_autocorrelation(x: np.ndarray) -> float:
    """Lag-1 sample autocorrelation about zero (the series is zero-mean by model)."""
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        return 0.0
    denom = float(np.mean(x * x))
    if denom == 0.0:
        return 0.0
    return float(np.mean(x[:-1] * x[1:]) / denom)


def pooled_z(estimates: Sequence[float], target: float) -> float:
    """z-score of the mean of independent replica estimates against ``target``."""
    x = np.asarray(estimates, dtype=float)
    if x.size < 2:
        return math.nan
    return z_score(float(np.mean(x)), target, float(np.std(x, ddof=1) / math.sqrt(x.size)))


def median_abs_error(estimates: Sequence[Optional[float]], target: float) -> float:
    """Median of |estimate - target| over the available estimates; NaN when none."""
    x = np.asarray([e for e in estimates if e is not None], dtype=float)
    if x.size == 0:
        return math.nan
    return float(np.median(np.abs(x - target)))
