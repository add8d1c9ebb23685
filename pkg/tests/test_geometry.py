import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from steerbeam import (ArrayGeometry, Roi, SteeringState, apply_steering, ipd_of_angle,
                       linear_boundaries, measured_ipd, steered_boundaries,
                       steering_phase, steering_vector, stft, sweep_membership_oracle)
from steerbeam.dsp import MultichannelAudio, StftConfig, bin_frequencies
from steerbeam.errors import SteeringError
from steerbeam.scene import plane_wave


class TestIpd:
    def test_broadside_is_zero(self, geom):
        for f in (100.0, 1000.0, 7900.0):
            assert ipd_of_angle(90.0, f, geom) == pytest.approx(0.0, abs=1e-12)

    def test_60_degrees(self, geom):
        assert ipd_of_angle(60.0, 1000.0, geom) == pytest.approx(0.45796, abs=1e-4)

    def test_endfire_doubles_60(self, geom):
        assert ipd_of_angle(0.0, 1000.0, geom) == pytest.approx(0.91592, abs=1e-4)
        assert ipd_of_angle(0.0, 1000.0, geom) == pytest.approx(
            2 * ipd_of_angle(60.0, 1000.0, geom))

    def test_unwrapped_above_alias(self, geom):
        assert abs(ipd_of_angle(0.0, 7900.0, geom)) > np.pi

    def test_vectorized(self, geom):
        out = ipd_of_angle(np.array([0.0, 90.0, 180.0]), 1000.0, geom)
        assert out.shape == (3,)
        assert out[0] == pytest.approx(-out[2])


class TestSteeringVector:
    def test_no_steering_is_exact_identity(self, geom, cfg):
        a = steering_vector(0.0, geom, cfg)
        assert np.all(a == 1.0 + 0.0j)

    def test_dc_bin_is_one(self, geom, cfg):
        for gamma in (5.0, 25.0, 45.0, -30.0):
            assert steering_vector(gamma, geom, cfg)[0] == 1.0 + 0.0j

    def test_phase_at_1khz_gamma_25(self, geom, cfg):
        a = steering_vector(25.0, geom, cfg)
        assert np.angle(a[20]) == pytest.approx(-0.38708, abs=1e-4)

    @given(gamma=st.floats(-80, 80), d=st.floats(0.01, 0.2))
    @settings(max_examples=30, deadline=None)
    def test_unit_modulus(self, gamma, d):
        a = steering_vector(gamma, ArrayGeometry(d), StftConfig())
        np.testing.assert_allclose(np.abs(a), 1.0, atol=1e-12)

    @pytest.mark.parametrize("gamma", [90.0, 95.0, -90.0, 120.0])
    def test_beyond_endfire_rejected(self, geom, cfg, gamma):
        with pytest.raises(SteeringError):
            steering_vector(gamma, geom, cfg)

    @given(gamma=st.floats(-80, 80), f=st.floats(0, 8000), d=st.floats(0.01, 0.2))
    @settings(max_examples=50, deadline=None)
    def test_phase_shift_consistency(self, gamma, f, d):
        # the steering phase closes the IPD triangle: ipd(theta2) + shift == ipd(theta1)
        geom = ArrayGeometry(d)
        lhs = ipd_of_angle(90.0 - gamma, f, geom) + steering_phase(gamma, f, geom)
        assert lhs == pytest.approx(ipd_of_angle(90.0, f, geom), abs=1e-9)


class TestApplySteering:
    def test_all_ones_identity(self, rng, cfg):
        data = rng.standard_normal((4, 161)) + 1j * rng.standard_normal((4, 161))
        out = apply_steering(data, np.ones(161, dtype=complex))
        np.testing.assert_array_equal(out, data)

    def test_magnitude_preserved(self, rng, geom, cfg):
        data = rng.standard_normal((4, 161)) + 1j * rng.standard_normal((4, 161))
        out = apply_steering(data, steering_vector(30.0, geom, cfg))
        np.testing.assert_allclose(np.abs(out), np.abs(data), rtol=1e-12)

    def test_dimension_mismatch(self, rng):
        with pytest.raises(SteeringError, match="bin count"):
            apply_steering(rng.standard_normal((4, 100)), np.ones(161))


class TestSteeredBoundaries:
    def test_figure_configuration(self):
        b = steered_boundaries(Roi(90.0, 15.0), 30.0)
        assert b.phi_left_deg == pytest.approx(76.044, abs=0.01)
        assert b.phi_right_deg == pytest.approx(40.640, abs=0.01)
        assert not b.saturated_left and not b.saturated_right

    def test_no_steering_identity(self):
        b = steered_boundaries(Roi(90.0, 10.0), 0.0)
        assert (b.phi_left_deg, b.phi_right_deg) == (pytest.approx(100.0), pytest.approx(80.0))
        assert not b.saturated_left and not b.saturated_right

    def test_saturation(self):
        b = steered_boundaries(Roi(90.0, 20.0), 60.0)
        assert b.phi_right_deg == 0.0 and b.saturated_right
        assert b.phi_left_deg == pytest.approx(58.399, abs=0.01)
        assert not b.saturated_left

    def test_ordering_and_range(self):
        for gamma in np.arange(-45, 50, 5.0):
            b = steered_boundaries(Roi(90.0, 12.0), gamma)
            assert 0.0 <= b.phi_right_deg <= b.phi_left_deg <= 180.0

    def test_mirrored_pair(self):
        b = steered_boundaries(Roi(90.0, 10.0), 0.0)
        assert b.mirrored == (pytest.approx(280.0), pytest.approx(260.0))

    def test_contains_with_mirror(self):
        b = steered_boundaries(Roi(90.0, 10.0), 0.0)
        assert b.contains(85.0) and b.contains(275.0)
        assert not b.contains(275.0, include_mirrored=False)
        assert not b.contains(60.0)

    @given(gamma=st.floats(0, 60), beta=st.floats(5, 25))
    @settings(max_examples=60, deadline=None)
    def test_area_growth(self, gamma, beta):
        b = steered_boundaries(Roi(90.0, beta), gamma)
        if b.saturated_left or b.saturated_right:
            return
        assert b.width_deg >= 2 * beta - 1e-9
        if gamma > 1e-6:
            assert b.width_deg > 2 * beta

    def test_linear_matches_at_zero(self):
        roi = Roi(90.0, 10.0)
        eq = steered_boundaries(roi, 0.0)
        assert linear_boundaries(roi, 0.0) == (
            pytest.approx(eq.phi_left_deg), pytest.approx(eq.phi_right_deg))


class TestMembershipOracle:
    def test_steered_center_always_inside(self, geom):
        for gamma in (0.0, 10.0, 25.0, 40.0):
            assert sweep_membership_oracle(90.0 - gamma, Roi(90.0, 10.0), gamma, geom)

    def test_flip_points_beta10_gamma25(self, geom):
        roi = Roi(90.0, 10.0)
        # right flip at arccos(sin10 + cos65), left flip at arccos(cos65 - sin10)
        assert sweep_membership_oracle(53.40 + 0.5, roi, 25.0, geom)
        assert not sweep_membership_oracle(53.40 - 0.5, roi, 25.0, geom)
        assert sweep_membership_oracle(75.58 - 0.5, roi, 25.0, geom)
        assert not sweep_membership_oracle(75.58 + 0.5, roi, 25.0, geom)

    def test_frequency_independence(self, geom):
        roi = Roi(90.0, 10.0)
        phis = np.arange(0.0, 180.0, 0.25)
        reference = sweep_membership_oracle(phis, roi, 25.0, geom, probe_freq_hz=500.0)
        for f in (1000.0, 2000.0, 3000.0):
            np.testing.assert_array_equal(
                sweep_membership_oracle(phis, roi, 25.0, geom, probe_freq_hz=f), reference)

    def test_probe_above_alias_rejected(self, geom):
        with pytest.raises(SteeringError, match="aliasing"):
            sweep_membership_oracle(90.0, Roi(), 0.0, geom, probe_freq_hz=4000.0)

    @pytest.mark.parametrize("gamma", [0.0, 10.0, 25.0, 40.0])
    @pytest.mark.parametrize("beta", [10.0, 20.0])
    def test_boundary_oracle_equivalence(self, geom, gamma, beta):
        roi = Roi(90.0, beta)
        b = steered_boundaries(roi, gamma)
        phis = np.arange(0.0, 180.0001, 0.05)
        inside = sweep_membership_oracle(phis, roi, gamma, geom)
        flips = phis[:-1][np.diff(inside.astype(int)) != 0] + 0.025
        expected = [v for v, sat in ((b.phi_right_deg, b.saturated_right),
                                     (b.phi_left_deg, b.saturated_left)) if not sat]
        assert len(flips) == len(expected)
        for flip, exp in zip(sorted(flips), sorted(expected)):
            assert flip == pytest.approx(exp, abs=0.1)


class TestMeasuredIpd:
    def test_simulated_source_matches_analytic(self, geom, cfg, rng):
        x = 0.1 * rng.standard_normal(480000)
        spec = stft(plane_wave(x, 60.0, geom, 16000), cfg)
        f = bin_frequencies(cfg)
        sel = (f > 50) & (f < geom.aliasing_frequency)
        np.testing.assert_allclose(measured_ipd(spec)[sel],
                                   ipd_of_angle(60.0, f[sel], geom), atol=1e-3)

    def test_sign_convention_steering_to_zero(self, geom, cfg, rng):
        # a source at theta2, steered by gamma, must show zero phase difference:
        # this test pins the measurement convention
        x = 0.1 * rng.standard_normal(480000)
        spec = stft(plane_wave(x, 65.0, geom, 16000), cfg)
        steered = spec.with_channel(1, apply_steering(spec.channel(1),
                                                      steering_vector(25.0, geom, cfg)))
        f = bin_frequencies(cfg)
        sel = f < 3000
        assert np.max(np.abs(measured_ipd(steered)[sel])) < 1e-3


class TestSteeringState:
    def test_state_properties(self, geom, cfg):
        state = SteeringState(25.0, 90.0, geom, cfg)
        assert state.theta2_deg == 65.0
        np.testing.assert_allclose(np.abs(state.vector), 1.0)

    def test_invalid_state(self, geom, cfg):
        with pytest.raises(SteeringError):
            SteeringState(95.0, 90.0, geom, cfg)


class TestValidation:
    def test_roi_bounds(self):
        with pytest.raises(ValueError):
            Roi(90.0, 95.0)
        with pytest.raises(ValueError):
            Roi(10.0, 15.0)

    def test_geometry_bounds(self):
        with pytest.raises(ValueError):
            ArrayGeometry(-0.05)
        with pytest.raises(ValueError):
            ArrayGeometry(0.05, 0.0)

    def test_aliasing_frequency(self, geom):
        assert geom.aliasing_frequency == pytest.approx(3430.0)
