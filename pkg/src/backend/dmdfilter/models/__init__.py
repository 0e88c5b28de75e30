"""Numerical Models Package

This package contains the numerical core of the toolkit: DMD simulation,
closed-form covariance algebra, the optimal filter, its error matrix and the
empirical estimation pipeline.
"""

from .covariance_algebra import (
    block_alpha,
    block_beta,
    closed_form_inverse_beta,
    cross_block,
    invert_cov2,
    joint_cov_from_params,
    steady_cross_cov,
    structured_cross_block,
)
from .dmd_core import (
    check_equivalence,
    effective_factor,
    normalized_fluctuations,
    reconstruct_noise,
    sample_moments,
    simulate_dmd,
    simulate_pair,
    stationary_joint_law,
    stationary_law,
    stationary_variance,
)
from .empirical_estimation import (
    assemble_blocks,
    calibrate,
    closed_form_filter_components,
    correction_terms,
    empirical_covariances,
    empirical_filter_matrix,
    second_addendum,
)
from .error_analysis import (
    empirical_error_matrix,
    error_matrix,
    error_matrix_from_blocks,
    error_trace,
    gamma_coefficient,
    identity_chain,
)
from .filter_core import (
    alpha_filter_matrix,
    apply_filter,
    estimate_drift,
    estimate_drift_from_covariances,
    estimate_noise_variance,
    filter_matrix,
    full_ratio_limit,
    interpolate_signal,
    interpolation_filter,
    theoretical_filter,
)

__all__ = [
    "alpha_filter_matrix",
    "apply_filter",
    "assemble_blocks",
    "block_alpha",
    "block_beta",
    "calibrate",
    "check_equivalence",
    "closed_form_filter_components",
    "closed_form_inverse_beta",
    "correction_terms",
    "cross_block",
    "effective_factor",
    "empirical_covariances",
    "empirical_error_matrix",
    "empirical_filter_matrix",
    "error_matrix",
    "error_matrix_from_blocks",
    "error_trace",
    "estimate_drift",
    "estimate_drift_from_covariances",
    "estimate_noise_variance",
    "filter_matrix",
    "full_ratio_limit",
    "gamma_coefficient",
    "identity_chain",
    "interpolate_signal",
    "interpolation_filter",
    "invert_cov2",
    "joint_cov_from_params",
    "normalized_fluctuations",
    "reconstruct_noise",
    "sample_moments",
    "second_addendum",
    "simulate_dmd",
    "simulate_pair",
    "stationary_joint_law",
    "stationary_law",
    "stationary_variance",
    "steady_cross_cov",
    "structured_cross_block",
    "theoretical_filter",
]
