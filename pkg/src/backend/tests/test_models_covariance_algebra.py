"""Tests for the closed-form covariance blocks."""

import math

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st
from scipy import stats

from dmdfilter.exceptions import SingularMatrixError
from dmdfilter.models.covariance_algebra import (
    block_alpha,
    block_beta,
    closed_form_inverse_beta,
    cross_block,
    invert_cov2,
    joint_cov_from_params,
    steady_cross_cov,
    structured_cross_block,
)
from dmdfilter.models.dmd_core import simulate_pair, stationary_variance
from dmdfilter.models.empirical_estimation import empirical_covariances
from dmdfilter.models.utils import batch_means_se, z_score
from dmdfilter.schemas.matrix_schemas import Cov2
from dmdfilter.schemas.params_schemas import DmdParams, SignalObservationModel


class TestJointCov:
    """Test cases for the single-process stationary relations."""

    def test_relations(self):
        joint = joint_cov_from_params(DmdParams(v=0.5, sigma=1.0))
        assert joint.r == pytest.approx(4.0 / 3.0)
        assert joint.r0 == pytest.approx(-2.0 / 3.0)
        assert joint.rD == pytest.approx(4.0 / 3.0)

    def test_block_beta_layout(self):
        block = block_beta(DmdParams(v=1.0, sigma=1.0))
        np.testing.assert_allclose(block.to_array(), [[1.0, -1.0], [-1.0, 2.0]])

    def test_block_alpha_uses_signal(self, correlated_model):
        block = block_alpha(correlated_model)
        assert block.m11 == pytest.approx(1.5625)
        assert block.m12 == pytest.approx(-0.4 * 1.5625)
        assert block.m22 == pytest.approx(0.8 * 1.5625)


class TestInvertCov2:
    """Test cases for the exact 2x2 inverse."""

    def test_inverse_times_block_is_identity(self):
        m = Cov2(m11=2.0, m12=0.5, m22=1.0)
        np.testing.assert_allclose(m.to_array() @ invert_cov2(m).to_array(), np.eye(2), atol=1e-14)

    def test_singular_block(self):
        with pytest.raises(SingularMatrixError):
            invert_cov2(Cov2(m11=1.0, m12=1.0, m22=1.0))

    def test_zero_block(self):
        with pytest.raises(SingularMatrixError):
            invert_cov2(Cov2(m11=0.0, m12=0.0, m22=0.0))

    def test_beta_block_determinant(self):
        """det of the observation block is (2V - V^2) R^2."""
        params = DmdParams(v=0.5, sigma=1.0)
        r = 4.0 / 3.0
        assert block_beta(params).det == pytest.approx(0.75 * r * r)

    @hyp_settings(max_examples=60, deadline=None)
    @given(v=st.floats(min_value=0.05, max_value=1.95), sigma=st.floats(min_value=0.1, max_value=3.0))
    def test_closed_form_inverse_matches(self, v, sigma):
        params = DmdParams(v=v, sigma=sigma)
        direct = invert_cov2(block_beta(params)).to_array()
        closed = closed_form_inverse_beta(params).to_array()
        np.testing.assert_allclose(closed, direct, rtol=1e-12)

    def test_closed_form_inverse_noiseless(self):
        with pytest.raises(SingularMatrixError):
            closed_form_inverse_beta(DmdParams(v=0.5, sigma=0.0))


class TestCrossBlock:
    """Test cases for the signal/observation cross block."""

    def test_steady_cross_cov(self, correlated_model):
        assert steady_cross_cov(correlated_model) == pytest.approx(0.6 / 0.7)

    @hyp_settings(max_examples=200, deadline=None)
    @given(
        v0=st.floats(min_value=0.05, max_value=1.95),
        v=st.floats(min_value=0.05, max_value=1.95),
        sigma0=st.floats(min_value=0.1, max_value=3.0),
        sigma=st.floats(min_value=0.1, max_value=3.0),
        rho_w=st.floats(min_value=-1.0, max_value=1.0),
    )
    def test_cauchy_schwarz(self, v0, v, sigma0, sigma, rho_w):
        """R_ab^2 never exceeds R_a R_b."""
        model = SignalObservationModel.from_values(v0=v0, sigma0=sigma0, v=v, sigma=sigma, rho_w=rho_w)
        r_ab = steady_cross_cov(model)
        bound = stationary_variance(model.signal) * stationary_variance(model.observation)
        assert r_ab * r_ab <= bound * (1.0 + 1e-12)

    def test_uncorrelated_is_zero(self, uncorrelated_model):
        block = cross_block(uncorrelated_model)
        np.testing.assert_array_equal(block.to_array(), np.zeros((2, 2)))

    def test_structured_layout(self):
        block = structured_cross_block(0.4, 0.5, 0.6)
        np.testing.assert_allclose(block.to_array(), [[0.6, -0.3], [-0.24, 0.12]])

    def test_noise_term_only_in_c22(self, correlated_model):
        r_ab = steady_cross_cov(correlated_model)
        block = cross_block(correlated_model)
        assert block.c12 == pytest.approx(-0.5 * r_ab)
        assert block.c21 == pytest.approx(-0.4 * r_ab)
        assert block.c22 == pytest.approx(0.2 * r_ab + 0.6)

    def test_simulated_moments_match(self, correlated_model):
        """Every sample moment sits within five batch-means standard errors of its closed form."""
        pair = simulate_pair(correlated_model, 200_000, seed=99, keep_noises=False)
        a, b = pair.alpha.values[:-1], pair.beta.values[:-1]
        da, db = pair.alpha.increments, pair.beta.increments
        cross = cross_block(correlated_model)
        obs = block_beta(correlated_model.observation)
        signal = block_alpha(correlated_model)
        products = {
            "r_ab": (a * b, cross.c11),
            "r_ab0": (a * db, cross.c12),
            "r_ba0": (b * da, cross.c21),
            "r_abD": (da * db, cross.c22),
            "r_b": (b * b, obs.m11),
            "r_b0": (b * db, obs.m12),
            "r_bD": (db * db, obs.m22),
            "r_a": (a * a, signal.m11),
        }
        emp = empirical_covariances(pair)
        for name, (series, target) in products.items():
            assert getattr(emp, name) == pytest.approx(float(np.mean(series)), rel=1e-12)
            z = z_score(getattr(emp, name), target, batch_means_se(series))
            assert abs(z) < 5.0, name

    @pytest.mark.slow
    def test_sample_block_error_shrinks_at_root_t_rate(self, correlated_model):
        """RMS error of the sample cross block falls like T^(-1/2) over two decades."""
        target = cross_block(correlated_model).to_array()
        horizons = [1_000, 10_000, 100_000]
        rms = []
        for horizon in horizons:
            squared = []
            for replica in range(40):
                pair = simulate_pair(correlated_model, horizon, seed=horizon + replica, keep_noises=False)
                emp = empirical_covariances(pair)
                sample = np.array([[emp.r_ab, emp.r_ab0], [emp.r_ba0, emp.r_abD]])
                squared.append(float(np.sum((sample - target) ** 2)))
            rms.append(math.sqrt(float(np.mean(squared))))
        fit = stats.linregress(np.log(horizons), np.log(rms))
        assert fit.slope == pytest.approx(-0.5, abs=0.1)

    def test_identical_processes(self):
        """rho_w = 1 with equal parameters gives R_ab = R."""
        model = SignalObservationModel.from_values(v0=0.7, sigma0=1.0, v=0.7, sigma=1.0, rho_w=1.0)
        assert steady_cross_cov(model) == pytest.approx(1.0 / (1.4 - 0.49))
