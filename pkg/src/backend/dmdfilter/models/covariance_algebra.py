"""Closed-form stationary covariance blocks.

Blocks act on the pairs (x(k), dx(k+1)). For a single DMD the stationary
relations are R0 = -V R and R-Delta = 2V R; for the signal/observation pair the
cross block follows from the joint recursion of alpha and beta.
"""

import logging
from typing import Optional

from ..config import settings
from ..exceptions import SingularMatrixError
from ..schemas.matrix_schemas import Cov2, CrossCov2, JointCov
from ..schemas.params_schemas import DmdParams, SignalObservationModel
from .dmd_core import effective_factor, stationary_variance

logger = logging.getLogger(__name__)


def joint_cov_from_params(params: DmdParams) -> JointCov:
    r = stationary_variance(params)
    return JointCov(r=r, r0=-params.v * r, rD=2.0 * params.v * r)


def block_beta(params: DmdParams) -> Cov2:
    """Observation block [[R, -V R], [-V R, 2V R]]."""
    joint = joint_cov_from_params(params)
    return Cov2(m11=joint.r, m12=joint.r0, m22=joint.rD)


def invert_cov2(m: Cov2, rtol: Optional[float] = None) -> Cov2:
    """Exact inverse of a symmetric 2x2 block.

    Raises:
        SingularMatrixError: If det(m) <= rtol * m11^2 (scale-free test).
    """
    rtol = settings.SINGULAR_RTOL if rtol is None else rtol
    det = m.det
    if det <= 0.0 or det <= rtol * m.m11 * m.m11:
        raise SingularMatrixError(
            f"Covariance block is singular (det={det:.3e}, m11={m.m11:.3e}); "
            "the observation process is degenerate"
        )
    return Cov2(m11=m.m22 / det, m12=-m.m12 / det, m22=m.m11 / det)


def closed_form_inverse_beta(params: DmdParams) -> Cov2:
    """Inverse of the observation block written out: [[2VR, VR], [VR, R]] / ((2V - V^2) R^2)."""
    r = stationary_variance(params)
    d = effective_factor(params.v) * r * r
    if d == 0.0:
        raise SingularMatrixError("Observation block is singular for sigma = 0")
    return Cov2(m11=2.0 * params.v * r / d, m12=params.v * r / d, m22=r / d)


def steady_cross_cov(model: SignalObservationModel) -> float:
    """Stationary E[alpha(k) beta(k)] = sigma0 sigma rho_w / (V0 + V - V0 V).

    Fixed point of E[a(k+1) b(k+1)] = (1 - V0)(1 - V) E[a(k) b(k)] + sigma0 sigma rho_w.
    """
    denom = model.v0 + model.v - model.v0 * model.v
    return model.noise_covariance / denom


def structured_cross_block(v0: float, v: float, r_ab: float, noise_cov: float = 0.0) -> CrossCov2:
    """Cross block for a given R_ab with the stationary structure of both recursions.

    ``noise_cov`` is the contemporaneous covariance sigma sigma0 rho_w of the
    scaled noises; it only enters E[da(k+1) db(k+1)].
    """
    return CrossCov2(
        c11=r_ab,
        c12=-v * r_ab,
        c21=-v0 * r_ab,
        c22=v * v0 * r_ab + noise_cov,
    )


def cross_block(model: SignalObservationModel) -> CrossCov2:
    return structured_cross_block(
        model.v0,
        model.v,
        steady_cross_cov(model),
        noise_cov=model.noise_covariance,
    )


def block_alpha(model: SignalObservationModel) -> Cov2:
    """Signal block [[R_a, -V0 R_a], [-V0 R_a, 2 V0 R_a]]."""
    return block_beta(model.signal)
