import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sppkit.errors import DomainError, ShapeMismatchError
from sppkit.frontend import ComplexSpectrogram
from sppkit.spp import (FixedPriorParams, SppSmootherState, likelihood_h0,
                        likelihood_h1, oracle_target_spp,
                        posterior_spp_fixed_prior, smooth_and_clamp, target_map,
                        wiener_gain)

mp.mp.dps = 40


def mp_posterior(y_pow, phi_n, alpha, xi):
    y, phi, a, x = map(mp.mpf, (y_pow, phi_n, alpha, xi))
    return 1 / (1 + a * (1 + x) * mp.e ** (-(y / phi) * x / (1 + x)))


def mp_oracle_target(y_pow, phi_x, phi_n):
    y, px, pn = map(mp.mpf, (y_pow, phi_x, phi_n))
    xi = px / pn
    return 1 / (1 + (1 + 1 / xi) * mp.e ** (-(y / pn) * xi / (1 + xi)))


class TestLikelihoods:
    def test_h0_zero_observation(self):
        assert likelihood_h0(0.0, 1.0) == pytest.approx(1.0 / math.pi, rel=1e-12)

    def test_h0_unit(self):
        assert likelihood_h0(1.0, 1.0) == pytest.approx(1.0 / (math.pi * math.e), rel=1e-12)

    def test_h0_direct_evaluation(self):
        assert likelihood_h0(2.0, 0.5) == pytest.approx((2.0 / math.pi) * math.exp(-4.0), rel=1e-12)

    def test_h0_invalid_noise_power(self):
        with pytest.raises(DomainError):
            likelihood_h0(1.0, 0.0)

    def test_h1_reduces_to_h0_at_zero_snr(self, rng):
        y = rng.uniform(0, 5, size=50)
        phi = rng.uniform(0.1, 3, size=50)
        np.testing.assert_allclose(likelihood_h1(y, phi, 0.0), likelihood_h0(y, phi),
                                   rtol=1e-14)

    def test_h1_zero_observation(self):
        assert likelihood_h1(0.0, 1.0, 1.0) == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-12)

    def test_h1_direct_evaluation(self):
        expected = (1.0 / (4.0 * math.pi)) * math.exp(-0.5)
        assert likelihood_h1(2.0, 1.0, 3.0) == pytest.approx(expected, rel=1e-12)


class TestFixedPriorPosterior:
    def test_zero_observation(self):
        # exponent vanishes: p = 1 / (2 + 10^1.5) with uniform priors
        p = posterior_spp_fixed_prior(0.0, 1.0)
        assert p == pytest.approx(1.0 / (2.0 + 10.0 ** 1.5), rel=1e-12)
        assert p == pytest.approx(0.02974, abs=5e-6)

    def test_saturates_to_one(self):
        assert posterior_spp_fixed_prior(1e6, 1.0) == pytest.approx(1.0, abs=1e-15)

    def test_against_high_precision_oracle(self):
        params = FixedPriorParams()
        p = posterior_spp_fixed_prior(10.0, 1.0, params)
        expected = float(mp_posterior(10.0, 1.0, 1.0, params.xi_h1))
        assert p == pytest.approx(expected, abs=1e-12)

    def test_randomized_against_oracle(self, rng):
        params = FixedPriorParams()
        for _ in range(200):
            y = float(rng.uniform(0.0, 50.0))
            phi = float(rng.uniform(1e-3, 10.0))
            p = posterior_spp_fixed_prior(y, phi, params)
            assert p == pytest.approx(float(mp_posterior(y, phi, 1.0, params.xi_h1)),
                                      abs=1e-9)

    def test_bayes_consistency(self, rng):
        # posterior assembled from the likelihoods and priors must match the
        # closed form
        params = FixedPriorParams(alpha_prior=1.5)
        for _ in range(100):
            y = float(rng.uniform(0.0, 30.0))
            phi = float(rng.uniform(0.05, 5.0))
            h1 = likelihood_h1(y, phi, params.xi_h1)
            h0 = likelihood_h0(y, phi)
            p_h1 = 1.0 / (1.0 + params.alpha_prior)
            p_h0 = 1.0 - p_h1
            bayes = p_h1 * h1 / (p_h0 * h0 + p_h1 * h1)
            assert posterior_spp_fixed_prior(y, phi, params) == pytest.approx(bayes, abs=1e-12)

    @given(st.floats(0.0, 1e4), st.floats(1e-6, 1e3), st.floats(-20.0, 30.0),
           st.floats(0.01, 100.0))
    @settings(max_examples=200, deadline=None)
    def test_bounds(self, y, phi, xi_db, alpha):
        params = FixedPriorParams(xi_h1_db=xi_db, alpha_prior=alpha)
        p = posterior_spp_fixed_prior(y, phi, params)
        assert 0.0 <= p <= 1.0

    def test_strictly_increasing_in_observation(self):
        # restricted to the range where float64 has not saturated p to 1.0
        y = np.linspace(0.0, 30.0, 400)
        p = posterior_spp_fixed_prior(y, 1.0)
        assert np.all(np.diff(p) > 0)


class TestSmoothAndClamp:
    def test_all_zero(self):
        state = SppSmootherState.zeros(3)
        out, state = smooth_and_clamp(np.zeros(3), state)
        assert np.all(out == 0) and np.all(state.p_smoothed == 0)

    def test_cap_engages(self):
        state = SppSmootherState(np.ones(2))
        out, state = smooth_and_clamp(np.ones(2), state)
        np.testing.assert_allclose(out, 0.99)
        np.testing.assert_allclose(state.p_smoothed, 1.0)

    def test_cap_does_not_engage_below_lambda(self):
        state = SppSmootherState(np.array([0.5]))
        out, state = smooth_and_clamp(np.array([1.0]), state)
        assert state.p_smoothed[0] == pytest.approx(0.55)
        assert out[0] == 1.0  # smoothed track stayed under the cap

    @given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=8),
           st.floats(0.05, 0.95))
    @settings(max_examples=100, deadline=None)
    def test_output_stays_in_unit_interval(self, raw, beta):
        params = FixedPriorParams(beta=beta)
        state = SppSmootherState.zeros(len(raw))
        for _ in range(5):
            out, state = smooth_and_clamp(np.array(raw), state, params)
            assert np.all(out >= 0.0) and np.all(out <= 1.0)
            assert np.all(state.p_smoothed >= 0.0) and np.all(state.p_smoothed <= 1.0)


class TestWienerGain:
    def test_equal_powers(self):
        assert wiener_gain(2.0, 2.0) == 0.5

    def test_zero_speech(self):
        assert wiener_gain(0.0, 1.0) == 0.0

    def test_three_to_one(self):
        assert wiener_gain(3.0, 1.0) == 0.75

    def test_both_zero_rejected(self):
        with pytest.raises(DomainError):
            wiener_gain(0.0, 0.0)


class TestOracleTarget:
    def test_vanishing_snr_gives_zero(self):
        assert oracle_target_spp(1.0, 0.0, 1.0) == 0.0
        assert oracle_target_spp(1.0, 1e-12, 1.0) == 0.0  # below the xi floor

    def test_zero_observation_unit_snr(self):
        assert oracle_target_spp(0.0, 1.0, 1.0) == pytest.approx(1.0 / 3.0, rel=1e-12)

    def test_against_high_precision_oracle(self):
        p = oracle_target_spp(4.0, 1.0, 1.0)
        assert p == pytest.approx(float(mp_oracle_target(4.0, 1.0, 1.0)), abs=1e-12)
        assert p == pytest.approx(0.78699, abs=1e-5)

    def test_randomized_against_oracle(self, rng):
        for _ in range(200):
            y = float(rng.uniform(0.0, 50.0))
            px = float(rng.uniform(1e-8, 20.0))
            pn = float(rng.uniform(1e-3, 10.0))
            if px / pn < 1e-10:
                continue
            assert oracle_target_spp(y, px, pn) == pytest.approx(
                float(mp_oracle_target(y, px, pn)), abs=1e-9)

    def test_equals_fixed_prior_with_inverse_snr_prior(self):
        # adaptive-prior form == fixed-prior form with alpha = 1/xi
        xis = np.logspace(-6, 4, 100)
        ratios = np.logspace(-3, 3, 100)
        for xi in xis:
            params = FixedPriorParams(xi_h1_db=10.0 * math.log10(xi),
                                      alpha_prior=1.0 / xi)
            got = oracle_target_spp(ratios, np.full_like(ratios, xi), 1.0)
            want = posterior_spp_fixed_prior(ratios, 1.0, params)
            np.testing.assert_allclose(got, want, atol=1e-12)

    @given(st.floats(0.0, 1e4), st.floats(0.0, 1e3), st.floats(1e-6, 1e3))
    @settings(max_examples=200, deadline=None)
    def test_bounds(self, y, px, pn):
        p = oracle_target_spp(y, px, pn)
        assert 0.0 <= p <= 1.0

    def test_strictly_increasing_in_observation(self):
        y = np.linspace(0.0, 40.0, 400)
        p = oracle_target_spp(y, np.full_like(y, 2.0), 1.0)
        assert np.all(np.diff(p) > 0)


def _spec(data):
    return ComplexSpectrogram(np.asarray(data, dtype=complex))


class TestTargetMap:
    def test_noise_only_targets_are_zero(self, rng):
        noise = rng.standard_normal((129, 20)) + 1j * rng.standard_normal((129, 20))
        clean = np.zeros_like(noise)
        spp = target_map(_spec(clean), _spec(noise), _spec(clean + noise))
        assert np.all(spp.data == 0.0)

    def test_entries_in_unit_interval(self, rng):
        clean = rng.standard_normal((129, 20)) + 1j * rng.standard_normal((129, 20))
        noise = rng.standard_normal((129, 20)) + 1j * rng.standard_normal((129, 20))
        spp = target_map(_spec(clean), _spec(noise), _spec(clean + noise))
        assert np.all((spp.data >= 0.0) & (spp.data <= 1.0))

    def test_matches_scalar_oracle_per_bin(self, rng):
        clean = rng.standard_normal((129, 5)) + 1j * rng.standard_normal((129, 5))
        noise = rng.standard_normal((129, 5)) + 1j * rng.standard_normal((129, 5))
        spp = target_map(_spec(clean), _spec(noise), _spec(clean + noise))
        k, l = 17, 3
        expected = oracle_target_spp(abs(clean[k, l] + noise[k, l]) ** 2,
                                     abs(clean[k, l]) ** 2,
                                     abs(noise[k, l]) ** 2)
        assert spp.data[k, l] == pytest.approx(expected, rel=1e-12)

    def test_shape_mismatch_rejected(self, rng):
        a = _spec(np.zeros((129, 4)))
        b = _spec(np.zeros((129, 5)))
        with pytest.raises(ShapeMismatchError):
            target_map(a, b, b)

    def test_additivity_violation_rejected(self, rng):
        clean = rng.standard_normal((129, 4)) + 0j
        noise = rng.standard_normal((129, 4)) + 0j
        with pytest.raises(DomainError):
            target_map(_spec(clean), _spec(noise), _spec(clean + 1.01 * noise))
