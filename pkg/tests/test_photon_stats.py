"""Tests for time-tag simulation, coincidence histograms and g2."""

import itertools
import math

import numpy as np
import pytest

from photon_stats import (
    CoincidenceHistogram, DetectorModel, SourceModel, accidental_baseline, analytic_g2_zero,
    coincidence_histogram, coincidence_peak_rate, coincidence_to_accidental_ratio,
    default_exclusion_half_width, expected_singles_rate, fit_power_sweep, g2_from_histogram,
    loss_corrected_rate, power_sweep, simulate_time_tags,
)
from shared_utils import DomainError, NumericalError


def _flat_histogram(zero_count: int, baseline: int, half_bins: int = 10, bin_width: float = 1e-9,
                    duration: float = 100.0) -> CoincidenceHistogram:
    tau = np.arange(-half_bins, half_bins + 1) * bin_width
    counts = np.full(tau.size, baseline, dtype=np.int64)
    counts[half_bins] = zero_count
    return CoincidenceHistogram(bin_width, tau, counts, duration)


# ============================================================================
# MODELS AND TIME TAGS
# ============================================================================

def test_detector_model_validation():
    with pytest.raises(ValueError):
        DetectorModel(efficiency=1.5)
    with pytest.raises(ValueError):
        DetectorModel(dark_rate=-1.0)


def test_simulation_deterministic_per_seed():
    source = SourceModel(pair_rate_per_mw=10.0, uncorrelated_background_1=50.0)
    det = DetectorModel(0.7, 20.0, 0.3e-9)
    first = simulate_time_tags(source, det, det, 5.0, 10.0, seed=11)
    second = simulate_time_tags(source, det, det, 5.0, 10.0, seed=11)
    other = simulate_time_tags(source, det, det, 5.0, 10.0, seed=12)
    np.testing.assert_array_equal(first[0], second[0])
    np.testing.assert_array_equal(first[1], second[1])
    assert first[0].size != other[0].size or not np.array_equal(first[0], other[0])


def test_streams_sorted_and_singles_rates_match_expectation():
    source = SourceModel(pair_rate_per_mw=50.0, uncorrelated_background_1=100.0, uncorrelated_background_2=300.0)
    det1 = DetectorModel(0.6, 40.0, 0.0)
    det2 = DetectorModel(0.8, 10.0, 0.0)
    duration = 200.0
    s1, s2 = simulate_time_tags(source, det1, det2, 10.0, duration, seed=5)
    assert np.all(np.diff(s1) >= 0) and np.all(np.diff(s2) >= 0)

    for stream, det, arm in ((s1, det1, 1), (s2, det2, 2)):
        expected = expected_singles_rate(source, det, 10.0, arm) * duration
        assert abs(stream.size - expected) < 5.0 * math.sqrt(expected)


def test_zero_power_leaves_only_noise():
    source = SourceModel(pair_rate_per_mw=100.0)
    det = DetectorModel(1.0, 0.0, 0.0)
    s1, s2 = simulate_time_tags(source, det, det, 0.0, 10.0, seed=1)
    assert s1.size == 0 and s2.size == 0


# ============================================================================
# HISTOGRAMS
# ============================================================================

def test_identical_streams_land_in_zero_bin():
    tags = np.array([1.0, 2.0, 3.0])
    hist = coincidence_histogram(tags, tags, 1e-9, 10e-9, duration=3.0)
    assert hist.tau_axis.size == 21
    assert hist.tau_axis[hist.zero_index] == 0.0
    assert hist.counts[hist.zero_index] == 3
    assert hist.counts.sum() == 3


def test_histogram_bins_are_centered_on_multiples_of_width():
    hist = coincidence_histogram(np.array([0.0]), np.array([2.1e-9]), 1e-9, 10e-9, duration=1.0)
    assert hist.tau_axis[np.argmax(hist.counts)] == pytest.approx(2e-9)
    reverse = coincidence_histogram(np.array([2.1e-9]), np.array([0.0]), 1e-9, 10e-9, duration=1.0)
    assert reverse.tau_axis[np.argmax(reverse.counts)] == pytest.approx(-2e-9)


def test_empty_streams_give_empty_histogram():
    hist = coincidence_histogram(np.array([]), np.array([1.0]), 1e-9, 10e-9)
    assert hist.counts.sum() == 0
    with pytest.raises(NumericalError, match="extend duration"):
        g2_from_histogram(hist)


def test_too_few_sideband_bins_rejected():
    hist = coincidence_histogram(np.array([1.0]), np.array([1.0]), 1e-9, 2e-9, duration=1.0)
    with pytest.raises(ValueError, match="sideband"):
        accidental_baseline(hist)


def test_uncorrelated_sources_have_flat_g2():
    source = SourceModel(pair_rate_per_mw=0.0, uncorrelated_background_1=5e3, uncorrelated_background_2=5e3)
    det = DetectorModel(1.0, 0.0, 0.0)
    s1, s2 = simulate_time_tags(source, det, det, 1.0, 1000.0, seed=7)
    hist = coincidence_histogram(s1, s2, 100e-9, 5e-6, duration=1000.0)
    g2, g2_zero = g2_from_histogram(hist)
    assert np.all(np.abs(g2 - 1.0) < 0.1)
    assert g2_zero == pytest.approx(1.0, abs=0.1)


# ============================================================================
# g2, CAR AND RATES
# ============================================================================

def test_histogram_statistics_on_constructed_histogram():
    hist = _flat_histogram(zero_count=60, baseline=10, duration=100.0)
    g2, g2_zero = g2_from_histogram(hist)
    assert g2_zero == pytest.approx(6.0)
    assert coincidence_to_accidental_ratio(hist) == pytest.approx(5.0)
    assert coincidence_peak_rate(hist) == pytest.approx(0.5)


def test_default_exclusion_half_width():
    det1 = DetectorModel(jitter_sigma=0.3e-9)
    det2 = DetectorModel(jitter_sigma=0.4e-9)
    assert default_exclusion_half_width(det1, det2) == pytest.approx(2.5e-9)


def test_analytic_g2_zero():
    assert analytic_g2_zero(10.0, 1e3, 1e3, 1e-9) == pytest.approx(1.0 + 10.0 / 1e-3)
    with pytest.raises(DomainError):
        analytic_g2_zero(10.0, 0.0, 1e3, 1e-9)


def test_loss_corrected_rate():
    assert loss_corrected_rate(8.4, [0.5, 0.5]) == pytest.approx(33.6)
    assert loss_corrected_rate(4.0, []) == 4.0
    with pytest.raises(DomainError):
        loss_corrected_rate(8.4, [0.5, 0.0])
    with pytest.raises(DomainError):
        loss_corrected_rate(8.4, [1.2])


def test_loss_correction_ignores_chain_order():
    chain = [0.9, 0.5, 0.73, 0.2]
    reference = loss_corrected_rate(8.4, chain)
    for ordering in itertools.permutations(chain):
        assert loss_corrected_rate(8.4, list(ordering)) == pytest.approx(reference, rel=1e-12)


def test_more_background_lowers_g2_zero():
    det = DetectorModel(1.0, 0.0, 0.0)
    g2_values = []
    for background in (1e4, 2e4):
        source = SourceModel(500.0, background, background)
        s1, s2 = simulate_time_tags(source, det, det, 1.0, 20.0, seed=12)
        hist = coincidence_histogram(s1, s2, 1e-9, 200e-9, duration=20.0)
        g2_values.append(g2_from_histogram(hist)[1])
    assert g2_values[1] < g2_values[0]


@pytest.mark.slow
def test_monte_carlo_g2_matches_analytic_formula():
    rng = np.random.default_rng(2024)
    for index in range(20):
        pair_rate = rng.uniform(200.0, 2000.0)
        eta1, eta2 = rng.uniform(0.5, 0.9, 2)
        noise1, noise2 = rng.uniform(200.0, 2000.0, 2)
        bin_width = rng.uniform(0.5e-9, 5e-9)

        source = SourceModel(pair_rate, noise1, noise2)
        det1, det2 = DetectorModel(eta1, 0.0, 0.0), DetectorModel(eta2, 0.0, 0.0)
        true_rate = pair_rate * eta1 * eta2
        singles_1 = expected_singles_rate(source, det1, 1.0, 1)
        singles_2 = expected_singles_rate(source, det2, 1.0, 2)

        duration = 4e4 / true_rate
        per_bin = singles_1 * singles_2 * bin_width * duration
        half_bins = max(int(math.ceil(5e4 / per_bin)), 10)

        s1, s2 = simulate_time_tags(source, det1, det2, 1.0, duration, seed=100 + index)
        hist = coincidence_histogram(s1, s2, bin_width, half_bins * bin_width, duration=duration)
        _, g2_zero = g2_from_histogram(hist)
        expected = analytic_g2_zero(true_rate, singles_1, singles_2, bin_width)
        assert g2_zero == pytest.approx(expected, rel=0.05), index


# ============================================================================
# POWER SWEEP
# ============================================================================

def test_fit_power_sweep_exact_line():
    fit = fit_power_sweep([(5.0, 1.0), (10.0, 2.0), (20.0, 4.0)])
    assert fit.slope == pytest.approx(0.2)
    assert fit.intercept == pytest.approx(0.0, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0)
    with pytest.raises(ValueError):
        fit_power_sweep([(5.0, 1.0)])


@pytest.mark.slow
def test_coincidence_rate_linear_in_power_with_twofold_counter_gain():
    det = DetectorModel(0.5, 100.0, 0.3e-9)
    powers = [5.0, 10.0, 20.0, 30.0, 40.0]
    fits = {}
    for label, rate in (("co", 1.0), ("counter", 2.0)):
        source = SourceModel(rate, 200.0, 200.0)
        points = power_sweep(source, det, det, powers, 1000.0, seed=42, bin_width=1e-9, tau_range=100e-9)
        fits[label] = fit_power_sweep(points)
        assert fits[label].r_squared >= 0.99

    assert fits["counter"].slope / fits["co"].slope == pytest.approx(2.0, rel=0.1)
    assert fits["co"].slope == pytest.approx(0.25, rel=0.1)


def test_power_sweep_requires_points():
    with pytest.raises(ValueError):
        power_sweep(SourceModel(), DetectorModel(), DetectorModel(), [], 1.0, seed=0)


def test_power_sweep_through_zero_power():
    det = DetectorModel(1.0, 100.0, 0.0)
    source = SourceModel(1.0, 1000.0, 1000.0)
    points = power_sweep(source, det, det, [0.0, 5.0, 10.0], 200.0, seed=3)
    assert points[0][0] == 0.0
    assert abs(points[0][1]) < 0.02
    fit = fit_power_sweep(points)
    assert fit.slope == pytest.approx(1.0, rel=0.1)
    assert fit.r_squared > 0.99
