"""Tests for emission kinematics, scenario rates, spectra and bandwidth."""

import math

import numpy as np
import pytest

from dispersion import DispersionModel, NonlinearFilm, refractive_index, wavevector_magnitude
from shared_utils import DomainError, NumericalError
from spdc_model import (
    DetectionWindow, EmissionDirection, GridSettings, JointRateGrid, ScenarioRates, angular_emission_profile,
    band_omega_axis, correlation_time, counter_to_co_ratio, detection_angle_from_na, emission_bandwidth,
    emission_spectrum, filter_scan, forward_backward_integrals, frequency_angular_spectrum,
    half_maximum_edges, joint_rate_grid, mismatch, pair_rate_density, periodic_theta_axis,
    phase_matching_factor, pump_factor, ratio_vs_thickness, scenario_rates, wavelength_span_nm,
)


# ============================================================================
# MISMATCH AND SHAPING FUNCTIONS
# ============================================================================

def test_collinear_degenerate_has_no_transverse_mismatch(monolayer, pump):
    _, delta_perp = mismatch(monolayer, pump, pump.omega_degenerate, 0.0, 0.0)
    assert delta_perp == 0.0


def test_mirror_flips_transverse_and_keeps_longitudinal(monolayer, pump):
    omega = 0.47 * pump.omega_p
    par, perp = mismatch(monolayer, pump, omega, 0.3, -1.1)
    par_m, perp_m = mismatch(monolayer, pump, omega, -0.3, 1.1)
    assert par_m == pytest.approx(par, rel=1e-12)
    assert perp_m == pytest.approx(-perp, rel=1e-12)


def test_counter_propagating_degenerate_mismatch_equals_pump_wavevector(monolayer, pump):
    par, _ = mismatch(monolayer, pump, pump.omega_degenerate, 0.0, math.pi)
    assert par == pytest.approx(wavevector_magnitude(monolayer.dispersion, pump.omega_p), rel=1e-12)


def test_signal_at_pump_frequency_is_rejected(monolayer, pump):
    with pytest.raises(DomainError, match="idler frequency nonpositive"):
        mismatch(monolayer, pump, pump.omega_p, 0.0, 0.0)


def test_phase_matching_factor_values():
    L = 1e-6
    assert phase_matching_factor(0.0, L) == 1.0
    assert phase_matching_factor(2.0 * math.pi / L, L) == pytest.approx(0.0, abs=1e-12)
    assert phase_matching_factor(4.65e7, 0.801e-9) >= 0.999


def test_pump_factor_values():
    w0 = 10e-6
    assert pump_factor(0.0, w0) == 1.0
    assert pump_factor(1.0 / w0, w0) == pytest.approx(math.exp(-0.5), rel=1e-12)
    assert pump_factor(1e6, w0) == pytest.approx(math.exp(-50.0), rel=1e-9)


def test_rate_density_scales_with_chi2_squared(pump):
    omega = 0.45 * pump.omega_p
    base = pair_rate_density(NonlinearFilm(27), pump, omega, 0.05, -0.04)
    doubled = pair_rate_density(NonlinearFilm(27, chi2_magnitude=2.0), pump, omega, 0.05, -0.04)
    assert doubled == pytest.approx(4.0 * base, rel=1e-12)


def test_rate_density_is_product_of_factors(thick_film, pump):
    omega = 0.52 * pump.omega_p
    par, perp = mismatch(thick_film, pump, omega, 0.02, 2.9)
    L = thick_film.thickness_m
    expected = L ** 2 * phase_matching_factor(par, L) * pump_factor(perp, pump.waist_m)
    assert pair_rate_density(thick_film, pump, omega, 0.02, 2.9) == pytest.approx(expected, rel=1e-12)


def test_rate_density_exchange_and_mirror_symmetry(thick_film, pump):
    rng = np.random.default_rng(3)
    omega = rng.uniform(0.4, 0.6, 50) * pump.omega_p
    theta_s = rng.uniform(-math.pi, math.pi, 50)
    theta_i = rng.uniform(-math.pi, math.pi, 50)

    direct = pair_rate_density(thick_film, pump, omega, theta_s, theta_i)
    exchanged = pair_rate_density(thick_film, pump, pump.omega_p - omega, theta_i, theta_s)
    mirrored = pair_rate_density(thick_film, pump, omega, -theta_s, -theta_i)
    np.testing.assert_allclose(exchanged, direct, rtol=1e-9, atol=1e-300)
    np.testing.assert_allclose(mirrored, direct, rtol=1e-12, atol=1e-300)


def test_monolayer_forward_and_backward_pairs_equally_likely(monolayer, pump):
    forward = pair_rate_density(monolayer, pump, pump.omega_degenerate, 0.0, 0.0)
    backward = pair_rate_density(monolayer, pump, pump.omega_degenerate, math.pi, math.pi)
    assert backward == pytest.approx(forward, rel=1e-3)


def test_monolayer_phase_matching_flat_over_telecom_grid(monolayer, pump):
    omega = band_omega_axis(pump, (1460.0, 1650.0), 64)[:, None, None]
    theta = periodic_theta_axis(180)
    par, _ = mismatch(monolayer, pump, omega, theta[None, :, None], theta[None, None, :])
    assert np.max(np.abs(1.0 - phase_matching_factor(par, monolayer.thickness_m))) <= 1e-3


def test_emission_direction_wraps_angle():
    assert EmissionDirection(1.5 * math.pi).theta == pytest.approx(-0.5 * math.pi)
    assert EmissionDirection(-math.pi).theta == pytest.approx(math.pi)
    assert EmissionDirection(0.1).is_forward
    assert not EmissionDirection(math.pi).is_forward


# ============================================================================
# GRIDS, SPECTRA AND PROFILES
# ============================================================================

def test_joint_rate_grid_shape_and_sign(thick_film, pump):
    omega = band_omega_axis(pump, (1460.0, 1650.0), 5)
    theta = periodic_theta_axis(32)
    grid = joint_rate_grid(thick_film, pump, omega, theta, theta, chunk_size=2)
    assert grid.values.shape == (5, 32, 32)
    assert np.all(grid.values >= 0)


def test_joint_rate_grid_requires_increasing_axes():
    with pytest.raises(ValueError, match="strictly increasing"):
        JointRateGrid(np.array([2.0, 1.0]), np.array([0.0]), np.array([0.0]), np.zeros((2, 1, 1)))


def test_monolayer_spectrum_forward_backward_symmetric(monolayer, pump, circle_grids):
    omega = band_omega_axis(pump, (1460.0, 1650.0), circle_grids.omega_points)
    theta = periodic_theta_axis(circle_grids.theta_points)
    spectrum = frequency_angular_spectrum(monolayer, pump, omega, theta, circle_grids.theta_points)
    half = len(theta) // 2
    shifted = np.roll(spectrum, -half, axis=1)
    np.testing.assert_allclose(shifted, spectrum, rtol=0.01, atol=1e-12 * spectrum.max())


def test_monolayer_spectrum_mirror_symmetric(monolayer, pump, circle_grids):
    omega = band_omega_axis(pump, (1460.0, 1650.0), 4)
    theta = periodic_theta_axis(circle_grids.theta_points)
    spectrum = frequency_angular_spectrum(monolayer, pump, omega, theta, circle_grids.theta_points)
    mirror_index = (-np.arange(len(theta))) % len(theta)
    np.testing.assert_allclose(spectrum[:, mirror_index], spectrum, rtol=1e-9, atol=1e-14 * spectrum.max())


def test_thick_film_spectrum_forward_dominated(thick_film, pump, circle_grids):
    omega = band_omega_axis(pump, (1460.0, 1650.0), 6)
    theta = periodic_theta_axis(circle_grids.theta_points)
    spectrum = frequency_angular_spectrum(thick_film, pump, omega, theta, circle_grids.theta_points)
    forward, backward = forward_backward_integrals(theta, spectrum.sum(axis=0))
    assert backward < forward


def test_monolayer_angular_profile_symmetric(monolayer, pump, circle_grids):
    profile = angular_emission_profile(monolayer, pump, (1460.0, 1650.0), circle_grids)
    forward, backward = forward_backward_integrals(profile.theta_axis, profile.signal)
    assert backward == pytest.approx(forward, rel=0.01)
    assert profile.signal.max() == pytest.approx(1.0)


def test_angular_profiles_of_signal_and_idler_agree_on_symmetric_band(thick_film, pump, circle_grids,
                                                                      symmetric_band):
    profile = angular_emission_profile(thick_film, pump, symmetric_band, circle_grids)
    np.testing.assert_allclose(profile.signal, profile.idler, atol=1e-6)


def test_thick_film_angular_profile_forward_dominated(thick_film, pump, circle_grids):
    profile = angular_emission_profile(thick_film, pump, (1460.0, 1650.0), circle_grids)
    forward, backward = forward_backward_integrals(profile.theta_axis, profile.signal)
    assert backward / forward < 1.0


def test_angular_profile_rejects_empty_band(monolayer, pump, circle_grids):
    with pytest.raises(DomainError):
        angular_emission_profile(monolayer, pump, (1650.0, 1460.0), circle_grids)


# ============================================================================
# SCENARIOS
# ============================================================================

def test_monolayer_scenarios_equally_likely(monolayer, pump, windows, box_grids):
    rates = scenario_rates(monolayer, pump, *windows, box_grids)
    values = np.array(list(rates.as_dict().values()))
    assert np.all(values > 0)
    assert np.max(values) / np.min(values) - 1.0 < 0.02
    assert counter_to_co_ratio(rates).value == pytest.approx(2.0, abs=0.05)


def test_counter_to_co_ratio_algebra():
    assert counter_to_co_ratio(ScenarioRates(3.0, 3.0, 3.0, 3.0)).value == 2.0
    infinite = counter_to_co_ratio(ScenarioRates(0.0, 1.0, 1.0, 1.0))
    assert infinite.is_infinite
    assert math.isinf(infinite.value)


def test_mixed_scenarios_agree_on_symmetric_band(thick_film, pump, symmetric_windows, box_grids):
    rates = scenario_rates(thick_film, pump, *symmetric_windows, box_grids)
    assert rates.r_fb == pytest.approx(rates.r_bf, rel=1e-6)


def test_thick_film_favours_forward_pairs(thick_film, pump, windows, box_grids):
    rates = scenario_rates(thick_film, pump, *windows, box_grids)
    assert rates.r_bb < rates.r_ff


def test_ratio_decreases_with_thickness(monolayer, pump, windows, box_grids):
    table = ratio_vs_thickness([1, 27, 54, 108, 216], monolayer, pump, *windows, box_grids)
    ratios = [ratio for _, ratio in table]
    assert all(a > b for a, b in zip(ratios, ratios[1:]))
    assert ratios[0] == pytest.approx(2.0, abs=0.05)
    assert ratios[-1] < 0.40


def test_scenario_rates_reject_swapped_windows(monolayer, pump, windows, box_grids):
    forward, backward = windows
    with pytest.raises(ValueError, match="face forward"):
        scenario_rates(monolayer, pump, backward, forward, box_grids)


def test_ratio_independent_of_chi2(pump, windows, box_grids):
    base = counter_to_co_ratio(scenario_rates(NonlinearFilm(54), pump, *windows, box_grids)).value
    scaled = counter_to_co_ratio(scenario_rates(NonlinearFilm(54, chi2_magnitude=7.5), pump, *windows,
                                                box_grids)).value
    assert scaled == pytest.approx(base, rel=1e-10)


def test_scenario_rates_stable_under_grid_refinement(thick_film, pump, windows, box_grids):
    fine = GridSettings(omega_points=2 * box_grids.omega_points, theta_per_box=2 * box_grids.theta_per_box)
    coarse_rates = scenario_rates(thick_film, pump, *windows, box_grids).as_dict()
    fine_rates = scenario_rates(thick_film, pump, *windows, fine).as_dict()
    for key, value in coarse_rates.items():
        assert value == pytest.approx(fine_rates[key], rel=0.01), key


def test_windows_must_share_band(monolayer, pump, box_grids):
    with pytest.raises(ValueError, match="same spectral band"):
        scenario_rates(monolayer, pump, DetectionWindow.forward(0.2, (1460.0, 1650.0)),
                       DetectionWindow.backward(0.2, (1500.0, 1600.0)), box_grids)


# ============================================================================
# BANDWIDTH
# ============================================================================

def test_monolayer_bandwidth_near_100_thz(monolayer, pump):
    bandwidth = emission_bandwidth(monolayer, pump, 0.2)
    assert bandwidth == pytest.approx(100.0, rel=0.3)
    assert 2.5 <= correlation_time(bandwidth) <= 4.5


def test_monolayer_wavelength_span_near_900_nm(monolayer, pump):
    spectrum = emission_spectrum(monolayer, pump, collection_full_width=0.2)
    assert wavelength_span_nm(spectrum) == pytest.approx(900.0, rel=0.3)
    degenerate = np.argmin(np.abs(spectrum.omega_axis - pump.omega_degenerate))
    assert spectrum.density[degenerate] == pytest.approx(1.0, rel=1e-2)


def test_thicker_film_has_narrower_bandwidth(monolayer, pump):
    thin = emission_bandwidth(monolayer, pump, 0.2)
    thick = emission_bandwidth(monolayer.with_layers(2000), pump, 0.2)
    assert thick < thin


def test_narrow_frequency_grid_reports_missing_half_maximum(monolayer, pump):
    omega = band_omega_axis(pump, (1540.0, 1560.0), 32)
    spectrum = emission_spectrum(monolayer, pump, omega, 0.2)
    with pytest.raises(NumericalError, match="wider frequency grid"):
        half_maximum_edges(spectrum)


def test_filter_scan_normalized_at_degeneracy(monolayer, pump):
    grids = GridSettings(cone_points=128)
    scan = filter_scan(monolayer, pump, [1470.0, 1550.0, 1640.0], 10.0, 0.2, grids=grids)
    rates = dict(scan)
    assert rates[1550.0] == pytest.approx(1.0, rel=1e-9)
    assert all(rate > 0 for _, rate in scan)


def test_correlation_time_values():
    assert correlation_time(100.0) == pytest.approx(3.18, abs=0.01)
    assert correlation_time(1.0) == pytest.approx(318.3, abs=0.1)
    assert correlation_time(200.0) == pytest.approx(correlation_time(100.0) / 2.0)
    with pytest.raises(ValueError):
        correlation_time(0.0)


def test_detection_angle_from_na():
    model = DispersionModel()
    n = refractive_index(model, 1550.0)
    assert detection_angle_from_na(0.56, model, 1550.0) == pytest.approx(0.56 / n)
    assert detection_angle_from_na(0.56, model, 1550.0) == pytest.approx(0.2, abs=0.01)
    assert detection_angle_from_na(0.0, model, 1550.0) == 0.0
    with pytest.raises(DomainError):
        detection_angle_from_na(3.0, model, 1550.0)
