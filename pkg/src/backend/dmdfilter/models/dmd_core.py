"""Discrete Markov diffusion core.

A DMD is the solution of the difference stochastic equation

    dz(k+1) = -V z(k) + sigma dW(k+1),   0 < V < 2, sigma >= 0,

with i.i.d. standard normal innovations dW. It is stationary in wide sense iff
E z(0) = 0 and E z(0)^2 = sigma^2 / (2V - V^2). This module simulates single
and paired processes with exact stationary initialisation, reconstructs the
driving noise from a trajectory and checks the stationarity/equivalence
relations on simulated data.
"""

import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy import signal

from ..config import settings
from ..exceptions import DegenerateProcessError, DomainError, TrajectoryLengthError
from ..schemas.matrix_schemas import Cov2, JointCov
from ..schemas.params_schemas import DmdParams, FixedInit, InitMode, SignalObservationModel, StationaryInit
from ..schemas.trajectory_schemas import PairedTrajectory, StationaryLaw, Trajectory
from .utils import batch_means_se, lag1_autocorrelation, z_score

logger = logging.getLogger(__name__)


def effective_factor(v: float) -> float:
    """Return 2V - V^2, the factor linking noise and stationary variance.

    Raises:
        DomainError: If V is outside the open interval (0, 2).
    """
    if not math.isfinite(v) or v <= 0.0 or v >= 2.0:
        raise DomainError(f"Drift V={v} is outside (0, 2); the process has no stationary law")
    return 2.0 * v - v * v


def stationary_variance(params: DmdParams) -> float:
    """Stationary variance sigma^2 / (2V - V^2)."""
    return params.sigma ** 2 / effective_factor(params.v)


def stationary_law(params: DmdParams) -> StationaryLaw:
    eff = effective_factor(params.v)
    return StationaryLaw(variance=params.sigma ** 2 / eff, eff_factor=eff)


def stationary_joint_law(model: SignalObservationModel) -> Cov2:
    """Covariance of (alpha(0), beta(0)) under the joint stationary law."""
    # Local import: covariance_algebra builds on this module.
    from .covariance_algebra import steady_cross_cov

    return Cov2(
        m11=stationary_variance(model.signal),
        m12=steady_cross_cov(model),
        m22=stationary_variance(model.observation),
    )


def _ar1_path(v: float, sigma: float, x0: float, noises: np.ndarray) -> np.ndarray:
    """States x(0..T) of x(k+1) = (1 - V) x(k) + sigma dW(k+1)."""
    phi = 1.0 - v
    values = np.empty(noises.size + 1)
    values[0] = x0
    if noises.size:
        values[1:] = signal.lfilter([sigma], [1.0, -phi], noises, zi=[phi * x0])[0]
    return values


def _build_trajectory(values: np.ndarray, noises: np.ndarray, keep_noises: bool) -> Trajectory:
    return Trajectory(
        values=values,
        increments=np.diff(values),
        noises=noises if keep_noises else None,
    )


def simulate_dmd(
    params: DmdParams,
    steps: int,
    init: Optional[InitMode] = None,
    seed: Optional[int] = None,
    keep_noises: bool = True,
) -> Trajectory:
    """Simulate one DMD trajectory of ``steps`` transitions.

    Args:
        params: Drift and noise intensity.
        steps: Number of transitions T (>= 1).
        init: ``StationaryInit()`` (default) draws z(0) ~ N(0, R); ``FixedInit``
            starts from x0 and drops ``burn_in`` leading steps.
        seed: Seed of the numpy PCG64 generator; defaults to ``DEFAULT_SEED``.
        keep_noises: Retain the innovations dW(1..T) with the trajectory.

    Returns:
        The simulated trajectory; identical arguments give identical arrays.
    """
    if steps < 1:
        raise TrajectoryLengthError(f"steps must be >= 1, got {steps}")
    law = stationary_law(params)
    init = init or StationaryInit()
    rng = np.random.default_rng(settings.DEFAULT_SEED if seed is None else seed)

    if isinstance(init, FixedInit):
        noises = rng.standard_normal(init.burn_in + steps)
        values = _ar1_path(params.v, params.sigma, init.x0, noises)
        values = values[init.burn_in:]
        noises = noises[init.burn_in:]
    else:
        x0 = math.sqrt(law.variance) * rng.standard_normal()
        noises = rng.standard_normal(steps)
        values = _ar1_path(params.v, params.sigma, x0, noises)

    logger.debug(f"Simulated DMD V={params.v} sigma={params.sigma} for {steps} steps (seed={seed})")
    return _build_trajectory(values, noises, keep_noises)


def simulate_pair(
    model: SignalObservationModel,
    steps: int,
    seed: Optional[int] = None,
    keep_noises: bool = True,
    init: Optional[InitMode] = None,
) -> PairedTrajectory:
    """Simulate the signal alpha and observation beta with correlated noises.

    The noises are dW0 ~ N(0, 1) and dW = rho dW0 + sqrt(1 - rho^2) Z with Z
    independent. With ``StationaryInit`` (default) (alpha(0), beta(0)) is drawn
    from the exact joint stationary law; ``FixedInit`` starts both processes at
    x0 and drops ``burn_in`` leading steps.
    """
    if steps < 1:
        raise TrajectoryLengthError(f"steps must be >= 1, got {steps}")
    law = stationary_joint_law(model)
    init = init or StationaryInit()
    rng = np.random.default_rng(settings.DEFAULT_SEED if seed is None else seed)

    if isinstance(init, FixedInit):
        alpha0 = beta0 = init.x0
        burn_in = init.burn_in
    else:
        alpha0, beta0 = _joint_stationary_start(law, rng.standard_normal(2))
        burn_in = 0

    rho = model.rho_w
    w0 = rng.standard_normal(burn_in + steps)
    z = rng.standard_normal(burn_in + steps)
    w = rho * w0 + math.sqrt(1.0 - rho * rho) * z

    alpha = _ar1_path(model.v0, model.sigma0, alpha0, w0)[burn_in:]
    beta = _ar1_path(model.v, model.sigma, beta0, w)[burn_in:]
    logger.debug(f"Simulated pair rho_w={rho} for {steps} steps (seed={seed}, init={init.kind})")
    return PairedTrajectory(
        alpha=_build_trajectory(alpha, w0[burn_in:], keep_noises),
        beta=_build_trajectory(beta, w[burn_in:], keep_noises),
    )


def _joint_stationary_start(law: Cov2, z_init: np.ndarray) -> Tuple[float, float]:
    """(alpha(0), beta(0)) from two standard normals via the Cholesky factor of ``law``."""
    r_a, r_ab, r_b = law.m11, law.m12, law.m22
    if r_a <= 0.0:
        return 0.0, math.sqrt(r_b) * float(z_init[1])
    sd_a = math.sqrt(r_a)
    residual = r_b - r_ab * r_ab / r_a
    if residual <= settings.SINGULAR_RTOL * r_b:
        residual = 0.0
    return sd_a * float(z_init[0]), (r_ab / sd_a) * float(z_init[0]) + math.sqrt(residual) * float(z_init[1])


def reconstruct_noise(traj: Trajectory, params: DmdParams) -> np.ndarray:
    """Martingale differences dW(k+1) = (dz(k+1) + V z(k)) / sigma."""
    if params.sigma == 0.0:
        raise DegenerateProcessError("Noise reconstruction needs sigma > 0")
    if traj.values.size < 2:
        raise TrajectoryLengthError("Noise reconstruction needs at least two states")
    return (traj.increments + params.v * traj.values[:-1]) / params.sigma


def normalized_fluctuations(frequencies: Sequence[float], rho: float, n: int) -> np.ndarray:
    """Normalised fluctuations sqrt(N) (S_N(k) - rho) of relative frequencies."""
    if not 0.0 < rho < 1.0:
        raise DomainError(f"Equilibrium rho={rho} must lie in (0, 1)")
    if n < 1:
        raise DomainError(f"Sample size N={n} must be >= 1")
    s = np.asarray(frequencies, dtype=float)
    if np.any((s < 0.0) | (s > 1.0)) or not np.all(np.isfinite(s)):
        raise DomainError("Relative frequencies must lie in [0, 1]")
    return math.sqrt(n) * (s - rho)


def sample_moments(traj: Trajectory) -> JointCov:
    """Empirical R, R0 and R-Delta of one trajectory over k = 0..T-1."""
    if traj.steps < 1:
        raise TrajectoryLengthError("Sample moments need at least one transition")
    x = traj.values[:-1]
    dx = traj.increments
    return JointCov(r=float(np.mean(x * x)), r0=float(np.mean(x * dx)), rD=float(np.mean(dx * dx)))


class EquivalenceReport(BaseModel):
    """z-scores of the stationarity and martingale-difference relations."""

    model_config = ConfigDict(frozen=True)

    moments: JointCov
    z_variance: float
    z_halves: float
    z_r0: float
    z_rD: float
    w_mean: float
    w_var: float
    w_lag1: float
    z_w_mean: float
    z_w_var: float
    z_w_lag1: float

    def max_abs_z(self) -> float:
        return max(
            abs(self.z_variance),
            abs(self.z_halves),
            abs(self.z_r0),
            abs(self.z_rD),
            abs(self.z_w_mean),
            abs(self.z_w_var),
            abs(self.z_w_lag1),
        )


def check_equivalence(traj: Trajectory, params: DmdParams, n_batches: Optional[int] = None) -> EquivalenceReport:
    """Check a trajectory against the stationary law and the equivalence relations.

    Covers the stationary variance, equality of the variance over both halves,
    R0 = -V R and R-Delta = 2V R, and the moments of the reconstructed noise.
    """
    if traj.steps < 4:
        raise TrajectoryLengthError("Equivalence checks need at least four transitions")
    x = traj.values[:-1]
    dx = traj.increments
    sq = x * x
    moments = sample_moments(traj)
    target = stationary_variance(params)

    half = sq.size // 2
    first, second = sq[:half], sq[half:]
    se_halves = math.hypot(batch_means_se(first, n_batches), batch_means_se(second, n_batches))

    w = reconstruct_noise(traj, params)
    t = w.size
    w_mean = float(np.mean(w))
    w_var = float(np.mean(w * w))
    w_lag1 = lag1_autocorrelation(w)

    return EquivalenceReport(
        moments=moments,
        z_variance=z_score(moments.r, target, batch_means_se(sq, n_batches)),
        z_halves=z_score(float(np.mean(first)), float(np.mean(second)), se_halves),
        z_r0=z_score(float(np.mean(x * dx + params.v * sq)), 0.0, batch_means_se(x * dx + params.v * sq, n_batches)),
        z_rD=z_score(float(np.mean(dx * dx - 2.0 * params.v * sq)), 0.0, batch_means_se(dx * dx - 2.0 * params.v * sq, n_batches)),
        w_mean=w_mean,
        w_var=w_var,
        w_lag1=w_lag1,
        z_w_mean=w_mean * math.sqrt(t),
        z_w_var=(w_var - 1.0) / math.sqrt(2.0 / t),
        z_w_lag1=w_lag1 * math.sqrt(t),
    )
