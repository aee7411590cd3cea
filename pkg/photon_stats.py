"""
Photon statistics module.
Monte Carlo two-detector (Hanbury-Brown-Twiss) coincidence experiments and the
analytic oracles used to check them: time tags, start-stop histograms,
g2(tau), loss correction and pump-power sweeps.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
from scipy.stats import linregress

try:
    from .shared_utils import DomainError, NumericalError, require_in_range, require_positive
except (ImportError, ValueError):
    from shared_utils import DomainError, NumericalError, require_in_range, require_positive

logger = logging.getLogger(__name__)

MIN_SIDEBAND_BINS = 5


@dataclass(frozen=True)
class DetectorModel:
    """Single-photon detector: efficiency, dark count rate (Hz), Gaussian jitter sigma (s)."""
    efficiency: float = 1.0
    dark_rate: float = 0.0
    jitter_sigma: float = 0.0

    def __post_init__(self):
        require_in_range("detector.efficiency", self.efficiency, 0.0, 1.0)
        require_positive("detector.dark_rate", self.dark_rate, allow_zero=True)
        require_positive("detector.jitter_sigma", self.jitter_sigma, allow_zero=True)


@dataclass(frozen=True)
class SourceModel:
    """Pair source: pair rate per mW of pump and uncorrelated background per arm (Hz)."""
    pair_rate_per_mw: float = 0.21
    uncorrelated_background_1: float = 0.0
    uncorrelated_background_2: float = 0.0

    def __post_init__(self):
        require_positive("source.pair_rate_per_mw", self.pair_rate_per_mw, allow_zero=True)
        require_positive("source.uncorrelated_background_1", self.uncorrelated_background_1, allow_zero=True)
        require_positive("source.uncorrelated_background_2", self.uncorrelated_background_2, allow_zero=True)


@dataclass
class CoincidenceHistogram:
    """Binned t2 - t1 differences; tau_axis holds bin centers."""
    bin_width: float
    tau_axis: np.ndarray
    counts: np.ndarray
    duration: float

    def __post_init__(self):
        require_positive("bin_width", self.bin_width)
        if len(self.counts) != len(self.tau_axis):
            raise ValueError("counts and tau_axis must have the same length")

    @property
    def zero_index(self) -> int:
        return int(np.argmin(np.abs(self.tau_axis)))


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r_squared: float


# ============================================================================
# TIME TAGS
# ============================================================================

def expected_singles_rate(source: SourceModel, detector: DetectorModel, power_mw: float, arm: int = 1) -> float:
    """Mean singles rate on one arm: pair_rate * eta + dark + background."""
    background = source.uncorrelated_background_1 if arm == 1 else source.uncorrelated_background_2
    return source.pair_rate_per_mw * power_mw * detector.efficiency + detector.dark_rate + background


def _uniform_tags(rng: np.random.Generator, rate: float, duration: float) -> np.ndarray:
    count = rng.poisson(rate * duration) if rate > 0 else 0
    return rng.uniform(0.0, duration, count)


def simulate_time_tags(source: SourceModel, det1: DetectorModel, det2: DetectorModel,
                       power_mw: float, duration: float, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Simulate arrival-time streams on two detectors.

    Pair emission times are Poisson at pair_rate_per_mw * power; each photon of
    a pair is detected with the detector efficiency and shifted by Gaussian
    jitter. Dark counts and uncorrelated background add independent Poisson
    tags. Output is deterministic for a given seed.

    Returns:
        (stream_1, stream_2): sorted arrival times in seconds
    """
    require_positive("duration", duration)
    require_positive("power_mw", power_mw, allow_zero=True)
    rng = np.random.default_rng(seed)

    pair_times = _uniform_tags(rng, source.pair_rate_per_mw * power_mw, duration)
    streams = []
    for detector, background in ((det1, source.uncorrelated_background_1),
                                 (det2, source.uncorrelated_background_2)):
        detected = pair_times[rng.random(pair_times.size) < detector.efficiency]
        if detector.jitter_sigma > 0:
            detected = detected + rng.normal(0.0, detector.jitter_sigma, detected.size)
        noise = _uniform_tags(rng, detector.dark_rate + background, duration)
        streams.append(np.sort(np.concatenate([detected, noise]), kind="stable"))

    logger.debug(f"Simulated {pair_times.size} pairs; singles {streams[0].size}/{streams[1].size}")
    return streams[0], streams[1]


# ============================================================================
# HISTOGRAMS AND g2
# ============================================================================

def coincidence_histogram(s1: np.ndarray, s2: np.ndarray, bin_width: float, tau_range: float,
                          duration: Optional[float] = None) -> CoincidenceHistogram:
    """
    Histogram of all pairwise differences t2 - t1 within +-tau_range.

    Bins are centered on multiples of bin_width, so tau = 0 sits in the middle
    of a bin. Empty streams give an all-zero histogram.

    Args:
        s1, s2: Sorted time tags (s)
        bin_width: Bin width (s)
        tau_range: Half range (s); bins cover [-tau_range, tau_range]
        duration: Acquisition time; defaults to the span of the tags
    """
    require_positive("bin_width", bin_width)
    require_positive("tau_range", tau_range)
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)

    half_bins = int(round(tau_range / bin_width))
    tau_axis = np.arange(-half_bins, half_bins + 1) * bin_width
    edges = (np.arange(-half_bins, half_bins + 2) - 0.5) * bin_width
    reach = edges[-1]

    if s1.size and s2.size:
        lo = np.searchsorted(s2, s1 - reach, side="left")
        hi = np.searchsorted(s2, s1 + reach, side="right")
        lengths = hi - lo
        total = int(lengths.sum())
        starts = np.repeat(lo, lengths)
        offsets = np.arange(total) - np.repeat(np.cumsum(lengths) - lengths, lengths)
        differences = s2[starts + offsets] - np.repeat(s1, lengths)
        counts, _ = np.histogram(differences, bins=edges)
    else:
        counts = np.zeros(tau_axis.size, dtype=np.int64)

    if duration is None:
        stacked = np.concatenate([s1, s2])
        duration = float(stacked.max() - stacked.min()) if stacked.size > 1 else 0.0
    return CoincidenceHistogram(bin_width, tau_axis, counts.astype(np.int64), float(duration))


def default_exclusion_half_width(det1: DetectorModel, det2: DetectorModel, sigmas: float = 5.0) -> float:
    """sigmas * sqrt(sigma_1^2 + sigma_2^2)."""
    return sigmas * math.hypot(det1.jitter_sigma, det2.jitter_sigma)


def _sideband_mask(hist: CoincidenceHistogram, exclusion_half_width: float) -> np.ndarray:
    return np.abs(hist.tau_axis) > exclusion_half_width


def accidental_baseline(hist: CoincidenceHistogram, exclusion_half_width: float = 0.0) -> float:
    """Mean count of bins with |tau| above the exclusion half-width."""
    sideband = _sideband_mask(hist, exclusion_half_width)
    if sideband.sum() < MIN_SIDEBAND_BINS:
        raise ValueError(
            f"Histogram has {int(sideband.sum())} sideband bins; need at least {MIN_SIDEBAND_BINS}"
        )
    return float(np.mean(hist.counts[sideband]))


def g2_from_histogram(hist: CoincidenceHistogram, exclusion_half_width: float = 0.0) -> Tuple[np.ndarray, float]:
    """
    Normalize a coincidence histogram by its accidental baseline.

    Returns:
        (g2_curve, g2_zero)

    Raises:
        NumericalError: If the baseline is zero
    """
    baseline = accidental_baseline(hist, exclusion_half_width)
    if baseline == 0:
        logger.error("Zero accidental baseline")
        raise NumericalError("insufficient accidentals; extend duration")
    g2 = hist.counts / baseline
    return g2, float(g2[hist.zero_index])


def _peak_window(hist: CoincidenceHistogram, exclusion_half_width: float) -> np.ndarray:
    return np.abs(hist.tau_axis) <= max(exclusion_half_width, 0.5 * hist.bin_width)


def coincidence_peak_rate(hist: CoincidenceHistogram, exclusion_half_width: float = 0.0) -> float:
    """True coincidence rate: peak-window counts above the baseline, per second."""
    require_positive("histogram duration", hist.duration)
    window = _peak_window(hist, exclusion_half_width)
    baseline = accidental_baseline(hist, exclusion_half_width)
    excess = float(hist.counts[window].sum()) - baseline * int(window.sum())
    return excess / hist.duration


def coincidence_to_accidental_ratio(hist: CoincidenceHistogram, exclusion_half_width: float = 0.0) -> float:
    """Excess peak counts over the accidentals expected in the same window."""
    window = _peak_window(hist, exclusion_half_width)
    baseline = accidental_baseline(hist, exclusion_half_width)
    if baseline == 0:
        raise NumericalError("insufficient accidentals; extend duration")
    accidentals = baseline * int(window.sum())
    return (float(hist.counts[window].sum()) - accidentals) / accidentals


# ============================================================================
# ANALYTIC ORACLES
# ============================================================================

def analytic_g2_zero(true_coincidence_rate: float, singles_rate_1: float, singles_rate_2: float,
                     bin_width: float) -> float:
    """
    g2(0) = 1 + R_c / (R_1 R_2 dt).

    Raises:
        DomainError: If a singles rate is zero
    """
    require_positive("true_coincidence_rate", true_coincidence_rate, allow_zero=True)
    require_positive("bin_width", bin_width)
    if singles_rate_1 <= 0 or singles_rate_2 <= 0:
        raise DomainError("Singles rates must be > 0 for g2(0)")
    return 1.0 + true_coincidence_rate / (singles_rate_1 * singles_rate_2 * bin_width)


def loss_corrected_rate(raw_rate: float, transmission_chain: Sequence[float]) -> float:
    """
    Undo optical losses: raw_rate / prod(transmissions).

    Raises:
        DomainError: If any transmission is zero or outside (0, 1]
    """
    for index, transmission in enumerate(transmission_chain):
        if not (0.0 < transmission <= 1.0):
            logger.error(f"Invalid transmission at position {index}: {transmission}")
            raise DomainError(f"transmission_chain[{index}] must be in (0, 1], got {transmission}")
    return raw_rate / float(np.prod(np.asarray(transmission_chain, dtype=float)))


# ============================================================================
# POWER SWEEP
# ============================================================================

def power_sweep(source: SourceModel, det1: DetectorModel, det2: DetectorModel, powers: Sequence[float],
                duration: float, seed: int, bin_width: float = 1e-9, tau_range: float = 100e-9,
                exclusion_sigmas: float = 5.0) -> List[Tuple[float, float]]:
    """
    Coincidence rate versus pump power.

    Each power point is simulated with its own seed (seed + index), histogrammed
    and integrated over the correlation peak above the accidental baseline.
    """
    if len(powers) == 0:
        raise ValueError("powers must be nonempty")
    exclusion = default_exclusion_half_width(det1, det2, exclusion_sigmas)

    points = []
    for index, power in enumerate(powers):
        s1, s2 = simulate_time_tags(source, det1, det2, power, duration, seed + index)
        hist = coincidence_histogram(s1, s2, bin_width, tau_range, duration=duration)
        rate = coincidence_peak_rate(hist, exclusion)
        points.append((float(power), rate))
        logger.debug(f"Power {power} mW -> coincidence rate {rate:.4f} Hz")
    return points


def fit_power_sweep(points: Sequence[Tuple[float, float]]) -> LinearFit:
    """Least-squares line through (power, rate) points."""
    if len(points) < 2:
        raise ValueError("Need at least two points for a linear fit")
    powers, rates = zip(*points)
    fit = linregress(powers, rates)
    return LinearFit(float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2))
