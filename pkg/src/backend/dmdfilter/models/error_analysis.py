"""Filtering error covariance.

The error matrix of the optimal filter is R_a - R_ab R_b^-1 R_ab^T. In closed
form, with Gamma_ab = R_ab^2 / (R_a R_b),

    Gamma = R_a (1 - Gamma_ab) [[1, -V0], [-V0, V0^2]]
            + [[0, 0], [0, sigma0^2 - (sigma sigma0 rho_w)^2 / ((2V - V^2) R_b)]].

The last correction vanishes for uncorrelated noises.
"""

import logging
import math
from typing import NamedTuple, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from ..config import settings
from ..exceptions import CovarianceConsistencyError, DomainError, TrajectoryLengthError
from ..schemas.matrix_schemas import Cov2, CrossCov2, ErrorMatrix, FilterMatrix, GammaCoefficient
from ..schemas.params_schemas import SignalObservationModel
from ..schemas.trajectory_schemas import PairedTrajectory
from .covariance_algebra import invert_cov2
from .dmd_core import effective_factor, stationary_variance
from .filter_core import alpha_filter_matrix, apply_filter, filter_matrix
from .utils import batch_means_se, z_score

logger = logging.getLogger(__name__)


def gamma_coefficient(r_ab: float, r_a: float, r_b: float, atol: Optional[float] = None) -> GammaCoefficient:
    """Squared correlation R_ab^2 / (R_a R_b).

    Raises:
        DomainError: If a variance is not positive.
        CovarianceConsistencyError: If the result exceeds 1 beyond ``atol``.
    """
    atol = settings.GAMMA_ATOL if atol is None else atol
    if r_a <= 0.0 or r_b <= 0.0:
        raise DomainError(f"Variances must be positive (r_a={r_a}, r_b={r_b})")
    value = r_ab * r_ab / (r_a * r_b)
    if value > 1.0 + atol:
        raise CovarianceConsistencyError(
            f"Squared correlation {value:.12f} exceeds 1; the covariance inputs are inconsistent"
        )
    return GammaCoefficient(value=min(value, 1.0))


def error_matrix(model: SignalObservationModel, gamma: GammaCoefficient) -> ErrorMatrix:
    """Closed-form error matrix of the optimal filter for ``model``."""
    r_a = stationary_variance(model.signal)
    scaled = r_a * (1.0 - gamma.value)
    v0 = model.v0
    residual = model.sigma0 ** 2
    noise_cov = model.noise_covariance
    if noise_cov != 0.0:
        residual -= noise_cov ** 2 / (effective_factor(model.v) * stationary_variance(model.observation))
    return ErrorMatrix(
        g11=scaled,
        g12=-v0 * scaled,
        g21=-v0 * scaled,
        g22=v0 * v0 * scaled + residual,
    )


def error_trace(gamma_matrix: ErrorMatrix) -> float:
    """Scalar mean-square error E(a - a_hat)^2 + E(da - da_hat)^2."""
    return gamma_matrix.trace


def error_matrix_from_blocks(
    signal_block: Cov2,
    cross: CrossCov2,
    obs_block: Cov2,
    rtol: Optional[float] = None,
) -> ErrorMatrix:
    """Direct evaluation of R_a - R_ab R_b^-1 R_ab^T, symmetrised.

    Raises:
        CovarianceConsistencyError: If the raw product is asymmetric beyond ``rtol``.
    """
    rtol = settings.SYMMETRY_RTOL if rtol is None else rtol
    c = cross.to_array()
    gamma = signal_block.to_array() - c @ invert_cov2(obs_block).to_array() @ c.T
    scale = max(np.max(np.abs(gamma)), np.max(np.abs(signal_block.to_array())), np.finfo(float).tiny)
    asymmetry = abs(gamma[0, 1] - gamma[1, 0])
    if asymmetry > rtol * scale:
        raise CovarianceConsistencyError(f"Error matrix asymmetry {asymmetry:.3e} exceeds tolerance")
    off = 0.5 * (gamma[0, 1] + gamma[1, 0])
    return ErrorMatrix(g11=float(gamma[0, 0]), g12=float(off), g21=float(off), g22=float(gamma[1, 1]))


class IdentityChain(NamedTuple):
    phi_alpha: FilterMatrix
    phi_beta_star: np.ndarray
    product: np.ndarray
    gamma: np.ndarray


def identity_chain(signal_block: Cov2, cross: CrossCov2, obs_block: Cov2) -> IdentityChain:
    """Factorised error matrix R_a (I - Phi_a Phi_b^*) with Phi_b^* = R_b^-1 R_ab^T."""
    phi_alpha = alpha_filter_matrix(signal_block, cross)
    phi_beta_star = filter_matrix(cross, obs_block).to_array().T
    product = phi_alpha.to_array() @ phi_beta_star
    gamma = signal_block.to_array() @ (np.eye(2) - product)
    return IdentityChain(phi_alpha=phi_alpha, phi_beta_star=phi_beta_star, product=product, gamma=gamma)


class EmpiricalErrorReport(BaseModel):
    """Monte Carlo mean-square error matrix with batch-means standard errors."""

    model_config = ConfigDict(frozen=True)

    horizon: int
    matrix: ErrorMatrix
    se_g11: float
    se_g12: float
    se_g22: float
    se_trace: float

    def z_scores(self, theory: ErrorMatrix) -> dict:
        return {
            "z_g11": z_score(self.matrix.g11, theory.g11, self.se_g11),
            "z_g12": z_score(self.matrix.g12, theory.g12, self.se_g12),
            "z_g22": z_score(self.matrix.g22, theory.g22, self.se_g22),
            "z_trace": z_score(self.matrix.trace, theory.trace, self.se_trace),
        }


def empirical_error_matrix(pair: PairedTrajectory, phi: FilterMatrix, n_batches: Optional[int] = None) -> EmpiricalErrorReport:
    """Sample MSE matrix of (alpha - alpha_hat, dalpha - dalpha_hat) over k = 0..T-1."""
    if pair.steps < 2:
        raise TrajectoryLengthError("Error estimation needs at least two transitions")
    estimates = apply_filter(phi, pair.beta)
    e1 = pair.alpha.values[:-1] - estimates.alpha_hat
    e2 = pair.alpha.increments - estimates.d_alpha_hat
    p11, p12, p22 = e1 * e1, e1 * e2, e2 * e2
    g11, g12, g22 = float(np.mean(p11)), float(np.mean(p12)), float(np.mean(p22))
    return EmpiricalErrorReport(
        horizon=pair.steps,
        matrix=ErrorMatrix(g11=g11, g12=g12, g21=g12, g22=g22),
        se_g11=batch_means_se(p11, n_batches),
        se_g12=batch_means_se(p12, n_batches),
        se_g22=batch_means_se(p22, n_batches),
        se_trace=batch_means_se(p11 + p22, n_batches),
    )


def error_report_row(theory: ErrorMatrix, gamma: GammaCoefficient, source: str = "theory") -> dict:
    row = {"source": source}
    row.update(theory.to_csv_row(gamma.value))
    return row


def mse_of_gain(pair: PairedTrajectory, gain: float) -> float:
    """Empirical E(alpha(k) - g beta(k))^2 for a scalar gain g."""
    residual = pair.alpha.values[:-1] - gain * pair.beta.values[:-1]
    return float(np.mean(residual * residual)) if residual.size else math.nan
