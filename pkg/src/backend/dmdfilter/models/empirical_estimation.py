"""Empirical covariances, empirical filter and calibration.

Time averages over k = 0..T-1 replace the stationary covariances. The observation
block may be used raw or with its stationary structure imposed (structured mode:
R0_b := -V R_b, R-Delta_b := 2V R_b). With correlated noises the cross block
picks up correction terms A, B, C:

    R0_ab   = -V  R_ab + A,            A = sigma  mean(alpha(k) dW(k+1))
    R0_ba   = -V0 R_ab + B,            B = sigma0 mean(beta(k) dW0(k+1))
    RD_ab   = V V0 R_ab + C,           C = -V0 A - V B + sigma sigma0 mean(dW dW0)
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np

from ..config import settings
from ..exceptions import (
    CovarianceConsistencyError,
    DegenerateProcessError,
    DomainError,
    IndeterminateRatioError,
    MissingNoiseError,
    TrajectoryLengthError,
)
from ..schemas.estimation_schemas import BlockMode, Calibration, Corrections, DriftSource, EmpiricalCov
from ..schemas.matrix_schemas import Cov2, CrossCov2, FilterMatrix
from ..schemas.params_schemas import SignalObservationModel
from ..schemas.trajectory_schemas import PairedTrajectory
from .dmd_core import effective_factor
from .filter_core import (
    estimate_drift,
    estimate_noise_variance,
    filter_matrix,
    interpolation_filter,
)
from .utils import batch_means_se

logger = logging.getLogger(__name__)


def empirical_covariances(pair: PairedTrajectory) -> EmpiricalCov:
    """Sample moments of the paired trajectory; no mean subtraction (zero-mean model)."""
    if pair.alpha.values.size < 2:
        raise TrajectoryLengthError("Empirical covariances need at least two states per trajectory")
    a = pair.alpha.values[:-1]
    b = pair.beta.values[:-1]
    da = pair.alpha.increments
    db = pair.beta.increments

    emp = EmpiricalCov(
        horizon=pair.steps,
        r_ab=float(np.mean(a * b)),
        r_ab0=float(np.mean(a * db)),
        r_ba0=float(np.mean(b * da)),
        r_abD=float(np.mean(da * db)),
        r_b=float(np.mean(b * b)),
        r_b0=float(np.mean(b * db)),
        r_bD=float(np.mean(db * db)),
        r_a=float(np.mean(a * a)),
        mean_alpha=float(np.mean(a)),
        mean_beta=float(np.mean(b)),
    )
    _warn_on_nonzero_means(a, b, emp)
    return emp


def _warn_on_nonzero_means(a: np.ndarray, b: np.ndarray, emp: EmpiricalCov) -> None:
    if a.size < 10 * settings.BATCH_COUNT:
        return
    for name, series, mean in (("alpha", a, emp.mean_alpha), ("beta", b, emp.mean_beta)):
        se = batch_means_se(series)
        if se > 0.0 and abs(mean) > settings.ACCEPTANCE_Z * se:
            logger.warning(f"Sample mean of {name} ({mean:.4g}) is {abs(mean) / se:.1f} standard errors from zero")


def assemble_blocks(emp: EmpiricalCov, mode: BlockMode = "raw", v: Optional[float] = None) -> Tuple[CrossCov2, Cov2]:
    """Cross and observation blocks from sample moments.

    Raw mode places the moments verbatim; structured mode replaces the
    observation moments by -V R_b and 2V R_b and keeps the cross block raw.
    """
    cross = CrossCov2(c11=emp.r_ab, c12=emp.r_ab0, c21=emp.r_ba0, c22=emp.r_abD)
    if mode == "raw":
        return cross, Cov2(m11=emp.r_b, m12=emp.r_b0, m22=emp.r_bD)
    if mode == "structured":
        if v is None:
            raise DomainError("Structured block assembly needs the observation drift V")
        effective_factor(v)
        return cross, Cov2(m11=emp.r_b, m12=-v * emp.r_b, m22=2.0 * v * emp.r_b)
    raise DomainError(f"Unknown block mode {mode!r}")


def empirical_filter_matrix(blocks: Tuple[CrossCov2, Cov2]) -> FilterMatrix:
    cross, obs_block = blocks
    return filter_matrix(cross, obs_block)


def correction_terms(
    pair: PairedTrajectory,
    model: SignalObservationModel,
    atol: Optional[float] = None,
) -> Corrections:
    """Correction terms A, B, C from the stored noises, with the identity residuals checked.

    Raises:
        MissingNoiseError: If either trajectory lacks its noise records.
        CovarianceConsistencyError: If a cross-moment identity fails beyond ``atol``
            (the trajectories were not generated by ``model``).
    """
    if not pair.has_noises:
        raise MissingNoiseError("Correction terms need the driving noises of both trajectories")
    atol = settings.IDENTITY_ATOL if atol is None else atol
    emp = empirical_covariances(pair)
    a = pair.alpha.values[:-1]
    b = pair.beta.values[:-1]
    w0 = pair.alpha.noises
    w = pair.beta.noises

    a_t = model.sigma * float(np.mean(a * w))
    b_t = model.sigma0 * float(np.mean(b * w0))
    noise_cross = float(np.mean(w * w0))
    scaled_cross = model.sigma * model.sigma0 * noise_cross
    c_t = -model.v0 * a_t - model.v * b_t + scaled_cross

    residuals = (
        emp.r_ab0 - (-model.v * emp.r_ab + a_t),
        emp.r_ba0 - (-model.v0 * emp.r_ab + b_t),
        emp.r_abD - (model.v * model.v0 * emp.r_ab + c_t),
    )
    max_residual = max(abs(r) for r in residuals)
    if max_residual > atol:
        raise CovarianceConsistencyError(
            f"Cross-moment identity residual {max_residual:.3e} exceeds {atol:.1e}; "
            "the trajectories do not follow the model recursions"
        )
    return Corrections(
        horizon=pair.steps,
        a_t=a_t,
        b_t=b_t,
        c_t=c_t,
        noise_cross=noise_cross,
        c_t_as_printed=-a_t - b_t + scaled_cross,
        max_residual=max_residual,
    )


def _scaled_denominator(emp: EmpiricalCov, v: float) -> float:
    if emp.r_b <= 0.0:
        raise DegenerateProcessError("Observation sample variance is zero")
    return effective_factor(v) * emp.r_b


def closed_form_filter_components(emp: EmpiricalCov, corr: Corrections, model: SignalObservationModel) -> FilterMatrix:
    """Structured-mode empirical filter written as uncorrelated part plus correction part."""
    v, v0 = model.v, model.v0
    denom = _scaled_denominator(emp, v)
    base = emp.r_ab / emp.r_b
    return FilterMatrix(
        phi11=base + v * corr.a_t / denom,
        phi12=corr.a_t / denom,
        phi21=-v0 * base + v * (2.0 * corr.b_t + corr.c_t) / denom,
        phi22=(v * corr.b_t + corr.c_t) / denom,
    )


def second_addendum(corr: Corrections, emp: EmpiricalCov, v: float) -> FilterMatrix:
    """Part of the structured empirical filter generated by noise correlation."""
    denom = _scaled_denominator(emp, v)
    return FilterMatrix(
        phi11=v * corr.a_t / denom,
        phi12=corr.a_t / denom,
        phi21=v * (2.0 * corr.b_t + corr.c_t) / denom,
        phi22=(v * corr.b_t + corr.c_t) / denom,
    )


def calibrate(
    pair: PairedTrajectory,
    mode: BlockMode = "raw",
    v: Optional[float] = None,
    drift_source: DriftSource = "interpolation",
    z_min: Optional[float] = None,
) -> Calibration:
    """Calibration phase on paired data: empirical filter plus V0 and sigma0 estimates.

    The ``full`` drift source is biased when the noises are correlated and may
    land outside (0, 2); sigma0 is then reported as None.

    Raises:
        IndeterminateRatioError: If the sample cross-covariance is not
            distinguishable from zero (|z| < ``z_min``) or phi11 vanishes.
    """
    z_min = settings.INDETERMINATE_Z if z_min is None else z_min
    emp = empirical_covariances(pair)
    blocks = assemble_blocks(emp, mode=mode, v=v)
    phi = empirical_filter_matrix(blocks)

    if emp.r_a <= 0.0 or emp.r_b <= 0.0:
        raise IndeterminateRatioError("A sample variance is zero; the drift ratio is undefined")
    z_cross = abs(emp.r_ab) * math.sqrt(emp.horizon) / math.sqrt(emp.r_a * emp.r_b)
    if z_cross < z_min:
        raise IndeterminateRatioError(
            f"Sample cross-covariance is {z_cross:.2f} standard errors from zero "
            f"(< {z_min}); the observation is uninformative"
        )

    drift_phi = interpolation_filter(*blocks) if drift_source == "interpolation" else phi
    v0_est = estimate_drift(drift_phi)
    sigma0_sq: Optional[float] = None
    sigma0: Optional[float] = None
    if 0.0 < v0_est < 2.0:
        sigma0_sq, sigma0 = estimate_noise_variance(v0_est, emp.r_a)
        logger.debug(f"Calibrated on T={emp.horizon}: V0={v0_est:.6f}, sigma0={sigma0:.6f}")
    else:
        logger.warning(
            f"Drift estimate V0={v0_est:.6f} ({drift_source} source) lies outside (0, 2); "
            "sigma0 is left undetermined"
        )
    return Calibration(
        empirical=emp,
        phi=phi,
        drift_phi=drift_phi,
        block_mode=mode,
        drift_source=drift_source,
        v0_est=v0_est,
        sigma0_sq_est=sigma0_sq,
        sigma0_est=sigma0,
        r_alpha_est=emp.r_a,
    )
