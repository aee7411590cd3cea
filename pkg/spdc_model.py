"""
Emission-kinematics model for non-phase-matched SPDC in a thin film.

Pair emission rate density in the in-plane (2-D) cross-section:

    R(w_s, th_s, th_i) = chi2^2 * L^2 * F_pm(dk_par) * F_p(dk_perp)
    F_pm = sinc^2(dk_par * L / 2)
    F_p  = exp(-(dk_perp * w0)^2 / 2)
    dk_par  = k_p - k_s cos(th_s) - k_i cos(th_i)
    dk_perp = k_s sin(th_s) + k_i sin(th_i)

with w_i = w_p - w_s. Angles are measured from the forward pump axis inside the
medium; |theta| < pi/2 is forward. Rates are in arbitrary units.

All grid integrals use the trapezoidal rule on uniform grids. Full-circle
marginals use the periodic grid theta_j = -pi + 2*pi*j/N, for which the
trapezoidal rule reduces to h * sum.
"""

from dataclasses import dataclass, field
from typing import Iterable, List, Sequence, Tuple
import logging
import math

import numpy as np
from scipy.integrate import trapezoid
from scipy.stats import ncx2

try:
    from .dispersion import (
        DispersionModel, NonlinearFilm, angular_frequency, refractive_index,
        vacuum_wavelength_nm, wavevector_magnitude,
    )
    from .shared_utils import (
        DomainError, NumericalError, box_axis, chunk_ranges, normalize_angle,
        require_choice, require_positive,
    )
except (ImportError, ValueError):
    from dispersion import (
        DispersionModel, NonlinearFilm, angular_frequency, refractive_index,
        vacuum_wavelength_nm, wavevector_magnitude,
    )
    from shared_utils import (
        DomainError, NumericalError, box_axis, chunk_ranges, normalize_angle,
        require_choice, require_positive,
    )

logger = logging.getLogger(__name__)

VALID_ARRANGEMENTS = ["counter", "co", "all"]


# ============================================================================
# DOMAIN TYPES
# ============================================================================

@dataclass(frozen=True)
class PumpBeam:
    """
    Monochromatic Gaussian pump propagating along +z.

    Attributes:
        lambda_p_nm: Vacuum wavelength in nm
        waist_m: Beam waist radius w0 in meters
        power_mw: Average power in mW
        polarization_theta: Polarization angle from the armchair axis (rad)
    """
    lambda_p_nm: float = 775.0
    waist_m: float = 10e-6
    power_mw: float = 40.0
    polarization_theta: float = 0.0

    def __post_init__(self):
        require_positive("pump.lambda_p_nm", self.lambda_p_nm)
        require_positive("pump.waist_m", self.waist_m)
        require_positive("pump.power_mw", self.power_mw, allow_zero=True)

    @property
    def omega_p(self) -> float:
        return float(angular_frequency(self.lambda_p_nm))

    @property
    def omega_degenerate(self) -> float:
        return 0.5 * self.omega_p


@dataclass(frozen=True)
class EmissionDirection:
    """Signed emission angle from the forward pump axis, wrapped into (-pi, pi]."""
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", normalize_angle(self.theta))

    @property
    def is_forward(self) -> bool:
        return abs(self.theta) < 0.5 * math.pi


@dataclass(frozen=True)
class DetectionWindow:
    """
    Angular collection box plus spectral band.

    Attributes:
        center: Box center angle (0 forward, pi backward)
        angular_full_width: Full width of the box in radians
        lambda_band_nm: (min, max) vacuum wavelength band of the signal in nm
    """
    center: float = 0.0
    angular_full_width: float = 0.2
    lambda_band_nm: Tuple[float, float] = (1460.0, 1650.0)

    def __post_init__(self):
        require_positive("window.angular_full_width", self.angular_full_width)
        lo, hi = (float(v) for v in self.lambda_band_nm)
        if not (0 < lo < hi):
            raise ValueError(f"window.lambda_band_nm must satisfy 0 < min < max, got [{lo}, {hi}]")
        object.__setattr__(self, "lambda_band_nm", (lo, hi))

    @property
    def direction(self) -> EmissionDirection:
        return EmissionDirection(self.center)

    @classmethod
    def forward(cls, full_width: float = 0.2, band=(1460.0, 1650.0)) -> "DetectionWindow":
        return cls(0.0, full_width, tuple(band))

    @classmethod
    def backward(cls, full_width: float = 0.2, band=(1460.0, 1650.0)) -> "DetectionWindow":
        return cls(math.pi, full_width, tuple(band))


@dataclass
class JointRateGrid:
    """Sampled pair emission rate density over (w_s, th_s, th_i)."""
    omega_s_axis: np.ndarray
    theta_s_axis: np.ndarray
    theta_i_axis: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        expected = (len(self.omega_s_axis), len(self.theta_s_axis), len(self.theta_i_axis))
        if self.values.shape != expected:
            raise ValueError(f"values shape {self.values.shape} does not match axes {expected}")
        for name in ("omega_s_axis", "theta_s_axis", "theta_i_axis"):
            axis = getattr(self, name)
            if len(axis) > 1 and not np.all(np.diff(axis) > 0):
                raise ValueError(f"{name} must be strictly increasing")
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0):
            raise NumericalError("Joint rate grid contains negative or non-finite values")


@dataclass(frozen=True)
class ScenarioRates:
    """Pair rates for the four propagation scenarios (signal, idler)."""
    r_ff: float
    r_fb: float
    r_bf: float
    r_bb: float

    def as_dict(self) -> dict:
        return {"r_ff": self.r_ff, "r_fb": self.r_fb, "r_bf": self.r_bf, "r_bb": self.r_bb}


@dataclass(frozen=True)
class RatioResult:
    """Counter-to-co ratio with an explicit flag when r_ff == 0."""
    value: float
    is_infinite: bool = False


@dataclass
class AngularProfile:
    """Angular emission profiles of signal and idler, normalized to max 1."""
    theta_axis: np.ndarray
    signal: np.ndarray
    idler: np.ndarray


@dataclass
class EmissionSpectrum:
    """Coincidence spectral density normalized to 1 at the degenerate frequency."""
    omega_axis: np.ndarray
    density: np.ndarray
    omega_degenerate: float
    arrangement: str = "counter"

    @property
    def nu_thz(self) -> np.ndarray:
        return self.omega_axis / (2.0 * np.pi) / 1e12

    @property
    def wavelength_nm(self) -> np.ndarray:
        return vacuum_wavelength_nm(self.omega_axis)


@dataclass(frozen=True)
class GridSettings:
    """
    Integration grid resolutions.

    Attributes:
        omega_points: Signal frequency samples
        theta_points: Samples on the full circle for marginals and profiles
        theta_per_box: Samples across one scenario box
        cone_points: Radial samples across a collection cone
        chunk_size: Frequencies evaluated per vectorized block
    """
    omega_points: int = 512
    theta_points: int = 720
    theta_per_box: int = 96
    cone_points: int = 256
    chunk_size: int = 8

    def __post_init__(self):
        for name in ("omega_points", "theta_points", "theta_per_box", "cone_points", "chunk_size"):
            if int(getattr(self, name)) < 2 and name != "chunk_size":
                raise ValueError(f"grids.{name} must be >= 2, got {getattr(self, name)}")
        if self.chunk_size < 1:
            raise ValueError(f"grids.chunk_size must be >= 1, got {self.chunk_size}")


# ============================================================================
# MISMATCH AND SHAPING FUNCTIONS
# ============================================================================

def _idler_omega(pump: PumpBeam, omega_s) -> np.ndarray:
    omega_s = np.asarray(omega_s, dtype=float)
    if np.any(omega_s <= 0):
        raise DomainError("Signal frequency must be > 0")
    omega_i = pump.omega_p - omega_s
    if np.any(omega_i <= 0):
        logger.error("Signal frequency at or above pump frequency")
        raise DomainError("idler frequency nonpositive: signal frequency must be below the pump frequency")
    return omega_i


def mismatch(film: NonlinearFilm, pump: PumpBeam, omega_s, theta_s, theta_i) -> Tuple[np.ndarray, np.ndarray]:
    """
    Longitudinal and transverse wavevector mismatch.

    Args:
        film: Nonlinear film (dispersion used for all three waves)
        pump: Pump beam
        omega_s: Signal angular frequency (rad/s), broadcastable
        theta_s: Signal angle (rad), broadcastable
        theta_i: Idler angle (rad), broadcastable

    Returns:
        (delta_k_par, delta_k_perp) in rad/m, broadcast shape

    Raises:
        DomainError: If the idler frequency is nonpositive
    """
    omega_i = _idler_omega(pump, omega_s)
    model = film.dispersion
    k_p = wavevector_magnitude(model, pump.omega_p)
    k_s = wavevector_magnitude(model, omega_s)
    k_i = wavevector_magnitude(model, omega_i)

    delta_par = k_p - k_s * np.cos(theta_s) - k_i * np.cos(theta_i)
    delta_perp = k_s * np.sin(theta_s) + k_i * np.sin(theta_i)
    return delta_par, delta_perp


def phase_matching_factor(delta_k_par, L: float):
    """sinc^2(dk_par * L / 2) with sinc(x) = sin(x)/x and sinc(0) = 1."""
    require_positive("L", L)
    x = np.asarray(delta_k_par, dtype=float) * L / 2.0
    # np.sinc is the normalized sinc sin(pi y)/(pi y)
    result = np.sinc(x / np.pi) ** 2
    return float(result) if result.ndim == 0 else result


def pump_factor(delta_k_perp, w0: float):
    """exp(-(dk_perp * w0)^2 / 2)."""
    require_positive("w0", w0)
    result = np.exp(-0.5 * (np.asarray(delta_k_perp, dtype=float) * w0) ** 2)
    return float(result) if result.ndim == 0 else result


def pair_rate_density(film: NonlinearFilm, pump: PumpBeam, omega_s, theta_s, theta_i):
    """
    Pair emission rate density chi2^2 * L^2 * F_pm * F_p (arbitrary units).

    Inputs broadcast against each other like numpy arrays.
    """
    delta_par, delta_perp = mismatch(film, pump, omega_s, theta_s, theta_i)
    L = film.thickness_m
    result = (film.chi2_magnitude * L) ** 2 * phase_matching_factor(delta_par, L) * pump_factor(delta_perp, pump.waist_m)
    return float(result) if np.ndim(result) == 0 else result


# ============================================================================
# GRID EVALUATION
# ============================================================================

class _RateEvaluator:
    """Vectorized rate evaluation on (omega chunk) x theta_s x theta_i blocks."""

    def __init__(self, film: NonlinearFilm, pump: PumpBeam, omega_axis: np.ndarray):
        self.film = film
        self.pump = pump
        self.omega_axis = np.asarray(omega_axis, dtype=float)
        omega_i = _idler_omega(pump, self.omega_axis)
        model = film.dispersion
        self.k_p = wavevector_magnitude(model, pump.omega_p)
        self.k_s = np.atleast_1d(wavevector_magnitude(model, self.omega_axis))
        self.k_i = np.atleast_1d(wavevector_magnitude(model, omega_i))
        self.prefactor = (film.chi2_magnitude * film.thickness_m) ** 2

    def block(self, start: int, stop: int, theta_s: np.ndarray, theta_i: np.ndarray) -> np.ndarray:
        k_s = self.k_s[start:stop, None, None]
        k_i = self.k_i[start:stop, None, None]
        cos_s, sin_s = np.cos(theta_s)[None, :, None], np.sin(theta_s)[None, :, None]
        cos_i, sin_i = np.cos(theta_i)[None, None, :], np.sin(theta_i)[None, None, :]

        delta_par = self.k_p - k_s * cos_s - k_i * cos_i
        delta_perp = k_s * sin_s + k_i * sin_i
        L = self.film.thickness_m
        f_pm = np.sinc(delta_par * L / (2.0 * np.pi)) ** 2
        f_p = np.exp(-0.5 * (delta_perp * self.pump.waist_m) ** 2)
        return self.prefactor * f_pm * f_p


def periodic_theta_axis(points: int) -> np.ndarray:
    """Uniform full-circle axis -pi + 2*pi*j/N, j = 0..N-1."""
    if points < 4:
        raise ValueError(f"theta points must be >= 4, got {points}")
    return -np.pi + 2.0 * np.pi * np.arange(points) / points


def band_omega_axis(pump: PumpBeam, lambda_band_nm: Tuple[float, float], points: int) -> np.ndarray:
    """Uniform signal-frequency axis spanning a vacuum wavelength band."""
    lo, hi = lambda_band_nm
    if not (0 < lo < hi):
        raise DomainError(f"Empty or invalid wavelength band [{lo}, {hi}] nm")
    omega_min = float(angular_frequency(hi))
    omega_max = float(angular_frequency(lo))
    if omega_max >= pump.omega_p:
        raise DomainError(
            f"Band edge {lo} nm is at or above the pump frequency ({pump.lambda_p_nm} nm pump)"
        )
    return np.linspace(omega_min, omega_max, points)


def joint_rate_grid(film: NonlinearFilm, pump: PumpBeam, omega_axis, theta_s_axis, theta_i_axis,
                    chunk_size: int = 8) -> JointRateGrid:
    """
    Evaluate the pair rate density on the full tensor grid.

    Args:
        film, pump: Emission medium and pump
        omega_axis, theta_s_axis, theta_i_axis: Strictly increasing axes
        chunk_size: Frequencies per vectorized block

    Returns:
        JointRateGrid with values[w, th_s, th_i]
    """
    omega_axis = np.asarray(omega_axis, dtype=float)
    theta_s_axis = np.asarray(theta_s_axis, dtype=float)
    theta_i_axis = np.asarray(theta_i_axis, dtype=float)
    evaluator = _RateEvaluator(film, pump, omega_axis)

    values = np.empty((len(omega_axis), len(theta_s_axis), len(theta_i_axis)))
    for start, stop in chunk_ranges(len(omega_axis), chunk_size):
        values[start:stop] = evaluator.block(start, stop, theta_s_axis, theta_i_axis)

    logger.debug(f"Joint rate grid evaluated: {values.shape}")
    return JointRateGrid(omega_axis, theta_s_axis, theta_i_axis, values)


# ============================================================================
# SPECTRA AND PROFILES
# ============================================================================

def frequency_angular_spectrum(film: NonlinearFilm, pump: PumpBeam, omega_axis, theta_axis,
                               theta_i_points: int = 720, chunk_size: int = 8) -> np.ndarray:
    """
    Frequency-angular spectrum S(w_s, th_s): the pair rate marginalized over
    the idler angle on the full circle.

    Args:
        film, pump: Emission medium and pump
        omega_axis: Signal angular frequencies (rad/s)
        theta_axis: Signal angles (rad)
        theta_i_points: Samples of the periodic idler-angle grid

    Returns:
        Array of shape (len(omega_axis), len(theta_axis)), all entries >= 0
    """
    omega_axis = np.atleast_1d(np.asarray(omega_axis, dtype=float))
    theta_axis = np.atleast_1d(np.asarray(theta_axis, dtype=float))
    if omega_axis.size == 0 or theta_axis.size == 0:
        raise ValueError("omega_axis and theta_axis must be nonempty")

    theta_i = periodic_theta_axis(theta_i_points)
    step = 2.0 * np.pi / theta_i_points
    evaluator = _RateEvaluator(film, pump, omega_axis)

    spectrum = np.empty((len(omega_axis), len(theta_axis)))
    for start, stop in chunk_ranges(len(omega_axis), chunk_size):
        spectrum[start:stop] = evaluator.block(start, stop, theta_axis, theta_i).sum(axis=2) * step

    logger.info(f"Frequency-angular spectrum computed on {spectrum.shape} grid "
                f"({theta_i_points} idler angles)")
    return spectrum


def forward_backward_integrals(theta_axis: np.ndarray, profile: np.ndarray) -> Tuple[float, float]:
    """
    Sum of a periodic-grid profile over forward (|th| < pi/2) and backward
    angles. Samples exactly at +-pi/2 are split evenly between both halves.
    """
    theta_axis = np.asarray(theta_axis, dtype=float)
    magnitude = np.abs(np.vectorize(normalize_angle)(theta_axis))
    on_edge = np.isclose(magnitude, 0.5 * np.pi, rtol=0.0, atol=1e-12)
    forward_weight = np.where(on_edge, 0.5, (magnitude < 0.5 * np.pi).astype(float))
    backward_weight = np.where(on_edge, 0.5, 1.0 - forward_weight)
    step = 2.0 * np.pi / len(theta_axis)
    return float(np.sum(profile * forward_weight) * step), float(np.sum(profile * backward_weight) * step)


def angular_emission_profile(film: NonlinearFilm, pump: PumpBeam, lambda_band: Tuple[float, float],
                             grids: GridSettings = GridSettings()) -> AngularProfile:
    """
    Signal and idler angular emission profiles integrated over a spectral band.

    P_s(th_s) = integral over w_s in band and all th_i; P_i analogous with
    roles swapped. Both are normalized so that max = 1.

    Raises:
        DomainError: If the band is empty or outside the model's validity
    """
    omega_axis = band_omega_axis(pump, lambda_band, grids.omega_points)
    theta = periodic_theta_axis(grids.theta_points)
    step = 2.0 * np.pi / grids.theta_points
    evaluator = _RateEvaluator(film, pump, omega_axis)

    per_omega_signal = np.empty((len(omega_axis), len(theta)))
    per_omega_idler = np.empty((len(omega_axis), len(theta)))
    for start, stop in chunk_ranges(len(omega_axis), grids.chunk_size):
        block = evaluator.block(start, stop, theta, theta)
        per_omega_signal[start:stop] = block.sum(axis=2) * step
        per_omega_idler[start:stop] = block.sum(axis=1) * step

    signal = trapezoid(per_omega_signal, omega_axis, axis=0)
    idler = trapezoid(per_omega_idler, omega_axis, axis=0)

    peak = max(signal.max(), idler.max())
    if peak <= 0:
        raise NumericalError("Angular emission profile is identically zero")
    logger.info(f"Angular emission profile computed: {len(omega_axis)} frequencies x {len(theta)}^2 angles")
    return AngularProfile(theta, signal / signal.max(), idler / idler.max())


# ============================================================================
# SCENARIO RATES
# ============================================================================

def scenario_rates(film: NonlinearFilm, pump: PumpBeam, window_forward: DetectionWindow,
                   window_backward: DetectionWindow, grids: GridSettings = GridSettings()) -> ScenarioRates:
    """
    Integrate the rate density over the four (signal box, idler box) scenarios.

    Signal frequencies run over the forward window's band. Boxes have full
    width angular_full_width centered on each window's center.

    Returns:
        ScenarioRates(r_ff, r_fb, r_bf, r_bb)
    """
    if window_forward.lambda_band_nm != window_backward.lambda_band_nm:
        raise ValueError("Forward and backward windows must share the same spectral band")
    if not window_forward.direction.is_forward or window_backward.direction.is_forward:
        logger.error(f"Window centers {window_forward.center} / {window_backward.center} are in the wrong hemispheres")
        raise ValueError("window_forward must face forward (|center| < pi/2) and window_backward backward")

    omega_axis = band_omega_axis(pump, window_forward.lambda_band_nm, grids.omega_points)
    boxes = {
        "f": box_axis(window_forward.center, window_forward.angular_full_width, grids.theta_per_box),
        "b": box_axis(window_backward.center, window_backward.angular_full_width, grids.theta_per_box),
    }
    evaluator = _RateEvaluator(film, pump, omega_axis)

    rates = {}
    for signal_key in ("f", "b"):
        for idler_key in ("f", "b"):
            theta_s, theta_i = boxes[signal_key], boxes[idler_key]
            per_omega = np.empty(len(omega_axis))
            for start, stop in chunk_ranges(len(omega_axis), grids.chunk_size):
                block = evaluator.block(start, stop, theta_s, theta_i)
                inner = trapezoid(block, theta_i, axis=2)
                per_omega[start:stop] = trapezoid(inner, theta_s, axis=1)
            rates[f"r_{signal_key}{idler_key}"] = float(trapezoid(per_omega, omega_axis))

    result = ScenarioRates(**rates)
    logger.info(f"Scenario rates ({film.layer_count} layers): {result.as_dict()}")
    return result


def counter_to_co_ratio(rates: ScenarioRates) -> RatioResult:
    """(r_fb + r_bf) / r_ff, flagged infinite when r_ff == 0."""
    if rates.r_ff == 0:
        logger.warning("r_ff is zero; counter-to-co ratio is infinite")
        return RatioResult(math.inf, is_infinite=True)
    return RatioResult((rates.r_fb + rates.r_bf) / rates.r_ff)


def ratio_vs_thickness(layer_counts: Iterable[int], film: NonlinearFilm, pump: PumpBeam,
                       window_forward: DetectionWindow, window_backward: DetectionWindow,
                       grids: GridSettings = GridSettings()) -> List[Tuple[int, float]]:
    """Counter-to-co ratio for each layer count, other film properties unchanged."""
    table = []
    for layers in layer_counts:
        rates = scenario_rates(film.with_layers(layers), pump, window_forward, window_backward, grids)
        table.append((int(layers), counter_to_co_ratio(rates).value))
    return table


# ============================================================================
# EMISSION SPECTRUM AND BANDWIDTH
# ============================================================================

def default_spectrum_axis(pump: PumpBeam, points: int = 512,
                          fraction_range: Tuple[float, float] = (0.15, 0.85)) -> np.ndarray:
    """Signal-frequency axis symmetric about degeneracy, as fractions of w_p."""
    lo, hi = fraction_range
    if not (0 < lo < 0.5 < hi < 1) or not math.isclose(lo + hi, 1.0):
        raise ValueError(f"fraction_range must be symmetric about 0.5 inside (0, 1), got {fraction_range}")
    return np.linspace(lo, hi, points) * pump.omega_p


def _cone_density(film: NonlinearFilm, pump: PumpBeam, omega_s: np.ndarray,
                  collection_full_width: float, arrangement: str, cone_points: int) -> np.ndarray:
    """
    Coincidence density per unit signal frequency for cone collection.

    Both photons are collected inside cones of half-angle alpha. The pump
    function pins the idler transverse momentum to minus the signal one; its
    Gaussian spread is integrated analytically, giving the probability that
    the idler lands inside its cone (noncentral chi-square, 2 dof). Photon-flux
    weighting w_s * w_i * k_s^2 * k_i^2 applies in solid-angle measure.
    """
    alpha = 0.5 * collection_full_width
    omega_s = np.atleast_1d(omega_s)
    omega_i = _idler_omega(pump, omega_s)
    model = film.dispersion
    k_p = wavevector_magnitude(model, pump.omega_p)
    k_s = np.atleast_1d(wavevector_magnitude(model, omega_s))[:, None]
    k_i = np.atleast_1d(wavevector_magnitude(model, omega_i))[:, None]
    w0 = pump.waist_m
    L = film.thickness_m

    theta_s = np.linspace(0.0, alpha, cone_points)[None, :]
    q_s = k_s * np.sin(theta_s)
    sin_i = q_s / k_i
    has_partner = sin_i < 1.0
    cos_i = np.sqrt(np.clip(1.0 - sin_i ** 2, 1e-12, None))

    acceptance = ncx2.cdf((k_i * math.sin(alpha) * w0) ** 2, df=2, nc=(q_s * w0) ** 2)
    measure = 2.0 * np.pi * np.sin(theta_s) * k_s ** 2 * (2.0 * np.pi / w0 ** 2)

    signs = {"counter": (-1.0,), "co": (1.0,), "all": (1.0, -1.0)}[arrangement]
    integrand = np.zeros_like(q_s * k_i)
    for sign in signs:
        delta_par = k_p - k_s * np.cos(theta_s) - sign * k_i * cos_i
        f_pm = np.sinc(delta_par * L / (2.0 * np.pi)) ** 2
        integrand = integrand + f_pm * acceptance / cos_i

    integrand = np.where(has_partner, integrand * measure, 0.0)
    flux = omega_s * omega_i * (film.chi2_magnitude * L) ** 2
    return flux * trapezoid(integrand, theta_s[0], axis=1)


def emission_spectrum(film: NonlinearFilm, pump: PumpBeam, omega_axis=None,
                      collection_full_width: float = 0.2, arrangement: str = "counter",
                      grids: GridSettings = GridSettings()) -> EmissionSpectrum:
    """
    Coincidence emission spectrum for cone collection, normalized at degeneracy.

    Args:
        film, pump: Emission medium and pump
        omega_axis: Signal frequencies (rad/s); default symmetric axis over 0.15-0.85 w_p
        collection_full_width: Full collection angle inside the medium (rad)
        arrangement: "counter" (idler backward), "co" (idler forward) or "all"
        grids: Resolution settings (omega_points, cone_points)
    """
    require_positive("collection_full_width", collection_full_width)
    require_choice("arrangement", arrangement, VALID_ARRANGEMENTS)
    if omega_axis is None:
        omega_axis = default_spectrum_axis(pump, grids.omega_points)
    omega_axis = np.asarray(omega_axis, dtype=float)

    density = _cone_density(film, pump, omega_axis, collection_full_width, arrangement, grids.cone_points)
    reference = _cone_density(film, pump, np.array([pump.omega_degenerate]), collection_full_width,
                              arrangement, grids.cone_points)[0]
    if reference <= 0:
        raise NumericalError("Emission spectrum vanishes at the degenerate frequency; cannot normalize")

    return EmissionSpectrum(omega_axis, density / reference, pump.omega_degenerate, arrangement)


def half_maximum_edges(spectrum: EmissionSpectrum) -> Tuple[float, float]:
    """
    Half-maximum crossing frequencies (THz) around the spectrum's global maximum.

    Raises:
        NumericalError: If no crossing exists on one side inside the grid
    """
    density = spectrum.density
    nu = spectrum.nu_thz
    peak = int(np.argmax(density))
    half = 0.5 * density[peak]

    below_left = np.nonzero(density[:peak] < half)[0]
    below_right = np.nonzero(density[peak:] < half)[0]
    if below_left.size == 0 or below_right.size == 0:
        logger.error("Spectrum has no half-maximum crossing inside the frequency grid")
        raise NumericalError(
            "No half-maximum crossing inside the computed frequency range; use a wider frequency grid"
        )

    i = below_left[-1]
    j = peak + below_right[0]
    nu_low = np.interp(half, [density[i], density[i + 1]], [nu[i], nu[i + 1]])
    nu_high = np.interp(half, [density[j], density[j - 1]], [nu[j], nu[j - 1]])
    return float(nu_low), float(nu_high)


def wavelength_span_nm(spectrum: EmissionSpectrum) -> float:
    """Vacuum wavelength span between the half-maximum edges."""
    nu_low, nu_high = half_maximum_edges(spectrum)
    to_nm = 2.0 * np.pi * 1e12
    return float(vacuum_wavelength_nm(nu_low * to_nm) - vacuum_wavelength_nm(nu_high * to_nm))


def emission_bandwidth(film: NonlinearFilm, pump: PumpBeam, collection_full_width: float = 0.2,
                       arrangement: str = "counter", grids: GridSettings = GridSettings()) -> float:
    """
    FWHM emission bandwidth in THz for a given collection angle.

    Raises:
        NumericalError: If the half maximum is not reached inside the grid
    """
    spectrum = emission_spectrum(film, pump, None, collection_full_width, arrangement, grids)
    nu_low, nu_high = half_maximum_edges(spectrum)
    bandwidth = nu_high - nu_low
    logger.info(f"Emission bandwidth ({film.layer_count} layers, {arrangement}): {bandwidth:.2f} THz")
    return bandwidth


def correlation_time(bandwidth_thz: float) -> float:
    """Biphoton correlation time in fs for a Lorentzian profile: 1 / (pi * dnu)."""
    require_positive("bandwidth_thz", bandwidth_thz)
    return 1.0 / (math.pi * bandwidth_thz * 1e12) * 1e15


def filter_scan(film: NonlinearFilm, pump: PumpBeam, centers_nm: Sequence[float],
                filter_width_nm: float = 10.0, collection_full_width: float = 0.2,
                arrangement: str = "counter", points_per_filter: int = 33,
                grids: GridSettings = GridSettings()) -> List[Tuple[float, float]]:
    """
    Coincidence rate through a tunable band-pass filter on the signal arm.

    Each rate is the emission spectrum integrated over the filter passband,
    normalized to a filter centered at the degenerate wavelength.
    """
    require_positive("filter_width_nm", filter_width_nm)

    def filtered_rate(center_nm: float) -> float:
        band = (center_nm - 0.5 * filter_width_nm, center_nm + 0.5 * filter_width_nm)
        omega = band_omega_axis(pump, band, points_per_filter)
        density = _cone_density(film, pump, omega, collection_full_width, arrangement, grids.cone_points)
        return float(trapezoid(density, omega))

    reference = filtered_rate(2.0 * pump.lambda_p_nm)
    if reference <= 0:
        raise NumericalError("Filtered rate vanishes at the degenerate wavelength")
    return [(float(center), filtered_rate(center) / reference) for center in centers_nm]


def detection_angle_from_na(na: float, model: DispersionModel, lambda_nm: float) -> float:
    """
    Internal collection half-angle theta_det = NA / n(lambda).

    Raises:
        DomainError: If NA is negative or not below the film index
    """
    n = refractive_index(model, lambda_nm)
    if na < 0 or na >= n:
        logger.error(f"NA {na} incompatible with index {n:.4f}")
        raise DomainError(f"NA must satisfy 0 <= NA < n = {n:.4f}, got {na}")
    return na / n
