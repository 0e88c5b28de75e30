"""Optimal one-step filter.

By the normal correlation theorem the best mean-square estimate of
(alpha(k), dalpha(k+1)) given (beta(k), dbeta(k+1)) is Phi (beta(k), dbeta(k+1))
with Phi = R_ab R_b^-1. The same code path serves theoretical and empirical
blocks.
"""

import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from ..config import settings
from ..exceptions import DomainError, IndeterminateRatioError, SingularMatrixError, TrajectoryLengthError
from ..schemas.matrix_schemas import Cov2, CrossCov2, FilterMatrix
from ..schemas.params_schemas import SignalObservationModel
from ..schemas.trajectory_schemas import FilterEstimates, Trajectory
from .covariance_algebra import block_beta, cross_block, invert_cov2
from .dmd_core import effective_factor

logger = logging.getLogger(__name__)


def filter_matrix(cross: CrossCov2, obs_block: Cov2) -> FilterMatrix:
    """Full 2x2 product R_ab R_b^-1; no structural zeros are imposed."""
    inverse = invert_cov2(obs_block)
    return FilterMatrix.from_array(cross.to_array() @ inverse.to_array())


def theoretical_filter(model: SignalObservationModel) -> FilterMatrix:
    return filter_matrix(cross_block(model), block_beta(model.observation))


def interpolation_filter(cross: CrossCov2, obs_block: Cov2) -> FilterMatrix:
    """Conditional expectation of (alpha(k), dalpha(k+1)) given beta(k) alone.

    First column (R_ab / R_b, R0_ba / R_b); the second column is zero.
    """
    if obs_block.m11 <= 0.0:
        raise SingularMatrixError("Observation variance is zero; beta(k) carries no information")
    return FilterMatrix(
        phi11=cross.c11 / obs_block.m11,
        phi12=0.0,
        phi21=cross.c21 / obs_block.m11,
        phi22=0.0,
    )


def alpha_filter_matrix(signal_block: Cov2, cross: CrossCov2) -> FilterMatrix:
    """Phi_a = R_a^-1 R_ab, the signal-side factor of the error matrix."""
    inverse = invert_cov2(signal_block)
    return FilterMatrix.from_array(inverse.to_array() @ cross.to_array())


def apply_filter(phi: FilterMatrix, beta_traj: Trajectory) -> FilterEstimates:
    """alpha_hat(k) = phi11 b(k) + phi12 db(k+1); dalpha_hat(k+1) = phi21 b(k) + phi22 db(k+1)."""
    if beta_traj.values.size < 2:
        raise TrajectoryLengthError("Filtering needs at least two observation states")
    b = beta_traj.values[:-1]
    db = beta_traj.increments
    return FilterEstimates(
        alpha_hat=phi.phi11 * b + phi.phi12 * db,
        d_alpha_hat=phi.phi21 * b + phi.phi22 * db,
    )


def interpolate_signal(phi11: float, beta_values: Sequence[float]) -> np.ndarray:
    return phi11 * np.asarray(beta_values, dtype=float)


def estimate_drift(phi: FilterMatrix, rtol: Optional[float] = None) -> float:
    """V0 estimate -phi21 / phi11.

    Raises:
        IndeterminateRatioError: If |phi11| <= rtol * (|phi11| + |phi21|).
    """
    rtol = settings.RATIO_RTOL if rtol is None else rtol
    scale = abs(phi.phi11) + abs(phi.phi21)
    if scale == 0.0 or abs(phi.phi11) <= rtol * scale:
        raise IndeterminateRatioError(
            f"phi11={phi.phi11:.3e} is negligible; the observation carries no information on the signal"
        )
    return -phi.phi21 / phi.phi11


def full_ratio_limit(model: SignalObservationModel) -> float:
    """Large-T limit of -phi21 / phi11 for the full filter.

    Equals V0 - V (V0 + V - V V0) / (2V - V^2) and does not depend on rho_w.
    """
    return estimate_drift(theoretical_filter(model))


def estimate_drift_from_covariances(r_ab: float, r_ba0: float) -> float:
    """-R0_ba / R_ab, i.e. the drift estimate of the interpolation column."""
    return estimate_drift(FilterMatrix(phi11=r_ab, phi12=0.0, phi21=r_ba0, phi22=0.0))


def estimate_noise_variance(v0_est: float, r_alpha_est: float) -> Tuple[float, float]:
    """Signal noise variance (2 V0 - V0^2) R_a and its square root."""
    eff = effective_factor(v0_est)
    if r_alpha_est < 0.0 or not math.isfinite(r_alpha_est):
        raise DomainError(f"Signal variance estimate must be >= 0, got {r_alpha_est}")
    variance = eff * r_alpha_est
    return variance, math.sqrt(variance)
