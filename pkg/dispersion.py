"""
Dispersion module for the nonlinear film.
Sellmeier refractive index, wavevector magnitudes, layer-count bookkeeping and
coherence-length diagnostics.

The shipped GaSe model is an ordinary-ray Sellmeier set with one ultraviolet
oscillator and one infrared lattice term:

    n^2 = A + B1 * lam^2 / (lam^2 - C1) + B2 * lam^2 / (lam^2 - C2)     (lam in um)

calibrated so that the degenerate coherence length is about 3.5 um for a
775 nm pump and below 200 nm for a 405 nm pump. Wavelengths below ~620 nm are
above the GaSe band gap; the index there is an extrapolation of the oscillator
form and absorption is ignored.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Sequence, Tuple, Union
import json
import logging
import math

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

try:
    from .shared_utils import DomainError, require_positive
except (ImportError, ValueError):
    from shared_utils import DomainError, require_positive

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# 173 nm / 216 layers
LAYER_THICKNESS_M = 0.801e-9

DEFAULT_MODEL_NAME = "gase_ordinary"
DEFAULT_COEFFICIENTS: Tuple[float, ...] = (4.393333, 3.166667, 0.12, 3.1485, 2194.0)
DEFAULT_RANGE_NM: Tuple[float, float] = (400.0, 20000.0)


@dataclass(frozen=True)
class DispersionModel:
    """
    Sellmeier dispersion model.

    Attributes:
        coefficients: [A, B1, C1, B2, C2, ...] with C in um^2
        range_nm: (min, max) vacuum wavelength validity in nm
        name: Label used in logs and reports
    """
    coefficients: Tuple[float, ...] = DEFAULT_COEFFICIENTS
    range_nm: Tuple[float, float] = DEFAULT_RANGE_NM
    name: str = DEFAULT_MODEL_NAME

    def __post_init__(self):
        coefficients = tuple(float(v) for v in self.coefficients)
        if len(coefficients) < 1 or len(coefficients) % 2 == 0:
            raise ValueError(
                f"coefficients must be [A, B1, C1, ...] (odd length), got {len(coefficients)} values"
            )
        if len(self.range_nm) != 2:
            raise ValueError(f"range_nm must be [min, max], got {self.range_nm}")
        lo, hi = (float(v) for v in self.range_nm)
        if not (0 < lo < hi):
            raise ValueError(f"range_nm must satisfy 0 < min < max, got [{lo}, {hi}]")
        object.__setattr__(self, "coefficients", coefficients)
        object.__setattr__(self, "range_nm", (lo, hi))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "coefficients": list(self.coefficients),
            "range_nm": list(self.range_nm),
        }


@dataclass(frozen=True)
class NonlinearFilm:
    """
    Subwavelength chi(2) film made of identical layers.

    Attributes:
        layer_count: Number of layers (>= 1)
        chi2_magnitude: Nonlinear susceptibility magnitude, arbitrary units (> 0)
        dispersion: Refractive-index model of the film
        layer_thickness_m: Thickness of one layer in meters
    """
    layer_count: int = 1
    chi2_magnitude: float = 1.0
    dispersion: DispersionModel = field(default_factory=DispersionModel)
    layer_thickness_m: float = LAYER_THICKNESS_M

    def __post_init__(self):
        if int(self.layer_count) != self.layer_count or self.layer_count < 1:
            raise DomainError(f"layer_count must be a positive integer, got {self.layer_count}")
        require_positive("chi2_magnitude", self.chi2_magnitude)
        require_positive("layer_thickness_m", self.layer_thickness_m)
        object.__setattr__(self, "layer_count", int(self.layer_count))

    @property
    def thickness_m(self) -> float:
        return self.layer_count * self.layer_thickness_m

    def with_layers(self, layer_count: int) -> "NonlinearFilm":
        """Copy of this film with a different layer count."""
        return NonlinearFilm(layer_count, self.chi2_magnitude, self.dispersion, self.layer_thickness_m)


@dataclass(frozen=True)
class CoherenceLength:
    """Coherence length with an explicit flag for the zero-mismatch case."""
    value_m: float
    is_infinite: bool = False

    @property
    def micrometers(self) -> float:
        return self.value_m * 1e6


# ============================================================================
# UNIT CONVERSIONS
# ============================================================================

def angular_frequency(lambda_nm: ArrayLike) -> ArrayLike:
    """Angular frequency (rad/s) of a vacuum wavelength in nm."""
    return 2.0 * np.pi * SPEED_OF_LIGHT / (np.asarray(lambda_nm, dtype=float) * 1e-9)


def vacuum_wavelength_nm(omega: ArrayLike) -> ArrayLike:
    """Vacuum wavelength (nm) of an angular frequency in rad/s."""
    return 2.0 * np.pi * SPEED_OF_LIGHT / np.asarray(omega, dtype=float) * 1e9


# ============================================================================
# INDEX AND WAVEVECTOR
# ============================================================================

def _check_range(model: DispersionModel, lambda_nm: np.ndarray):
    lo, hi = model.range_nm
    outside = (lambda_nm < lo) | (lambda_nm > hi) | ~np.isfinite(lambda_nm)
    if np.any(outside):
        bad = lambda_nm[outside].flat[0]
        logger.error(f"Wavelength {bad} nm outside dispersion range of {model.name}")
        raise DomainError(
            f"Wavelength {bad:.6g} nm outside valid range [{lo:g}, {hi:g}] nm of model '{model.name}'"
        )


def refractive_index(model: DispersionModel, lambda_vac: ArrayLike) -> ArrayLike:
    """
    Evaluate the Sellmeier index n(lambda).

    Args:
        model: Dispersion model
        lambda_vac: Vacuum wavelength(s) in nm

    Returns:
        Refractive index, same shape as the input (float for scalar input)

    Raises:
        DomainError: If any wavelength is outside the model's valid range
    """
    lam_nm = np.asarray(lambda_vac, dtype=float)
    _check_range(model, lam_nm)

    lam2 = (lam_nm * 1e-3) ** 2
    coefficients = model.coefficients
    n_squared = np.full_like(lam2, coefficients[0])
    for b, c_pole in zip(coefficients[1::2], coefficients[2::2]):
        n_squared = n_squared + b * lam2 / (lam2 - c_pole)

    if np.any(n_squared <= 1.0):
        raise DomainError(f"Model '{model.name}' gives n <= 1 inside its range; check coefficients")

    n = np.sqrt(n_squared)
    return float(n) if n.ndim == 0 else n


def wavevector_magnitude(model: DispersionModel, omega: ArrayLike) -> ArrayLike:
    """
    Wavevector magnitude k = omega * n(lambda) / c inside the medium.

    Args:
        model: Dispersion model
        omega: Angular frequency in rad/s

    Returns:
        k in rad/m

    Raises:
        DomainError: For nonpositive frequencies or wavelengths outside the range
    """
    omega_arr = np.asarray(omega, dtype=float)
    if np.any(omega_arr <= 0):
        logger.error("Nonpositive angular frequency passed to wavevector_magnitude")
        raise DomainError("Angular frequency must be > 0")
    k = omega_arr * refractive_index(model, vacuum_wavelength_nm(omega_arr)) / SPEED_OF_LIGHT
    return float(k) if np.ndim(k) == 0 else k


def group_index(model: DispersionModel, lambda_vac: float, step_nm: float = 0.5) -> float:
    """Group index n - lambda * dn/dlambda from a central difference."""
    n_plus = refractive_index(model, lambda_vac + step_nm)
    n_minus = refractive_index(model, lambda_vac - step_nm)
    derivative = (n_plus - n_minus) / (2.0 * step_nm)
    return float(refractive_index(model, lambda_vac) - lambda_vac * derivative)


# ============================================================================
# FILM BOOKKEEPING
# ============================================================================

def layers_to_thickness(layer_count: int) -> float:
    """
    Physical thickness of a film of layer_count layers.

    Raises:
        DomainError: If layer_count < 1
    """
    if int(layer_count) != layer_count or layer_count < 1:
        logger.error(f"Invalid layer count: {layer_count}")
        raise DomainError(f"layer_count must be >= 1, got {layer_count}")
    return int(layer_count) * LAYER_THICKNESS_M


def coherence_length(film: NonlinearFilm, lambda_pump: float) -> CoherenceLength:
    """
    Coherence length pi/|dk| of degenerate collinear forward down-conversion.

    dk = k(lambda_p) - 2 k(2 lambda_p), equivalently
    L_coh = lambda_p / (2 (n(lambda_p) - n(2 lambda_p))).

    Args:
        film: Film whose dispersion model is used (chi2 is irrelevant)
        lambda_pump: Pump vacuum wavelength in nm

    Returns:
        CoherenceLength, flagged infinite when dk == 0
    """
    require_positive("lambda_pump", lambda_pump)
    omega_p = float(angular_frequency(lambda_pump))
    k_pump = wavevector_magnitude(film.dispersion, omega_p)
    k_half = wavevector_magnitude(film.dispersion, omega_p / 2.0)
    delta_k = k_pump - 2.0 * k_half

    if delta_k == 0.0:
        logger.info(f"Zero mismatch at {lambda_pump} nm pump: coherence length is infinite")
        return CoherenceLength(math.inf, is_infinite=True)

    length = math.pi / abs(delta_k)
    logger.debug(f"Coherence length at {lambda_pump} nm pump: {length * 1e6:.4f} um")
    return CoherenceLength(length)


def coherence_length_scan(film: NonlinearFilm, pump_wavelengths_nm: Sequence[float]) -> List[CoherenceLength]:
    """Coherence length for each pump wavelength in turn."""
    return [coherence_length(film, lam) for lam in pump_wavelengths_nm]


# ============================================================================
# FILE I/O
# ============================================================================

def dispersion_model_from_dict(data: dict) -> DispersionModel:
    """Build a DispersionModel from a dict with keys coefficients, range_nm and optional name."""
    missing = [key for key in ("coefficients", "range_nm") if key not in data]
    if missing:
        raise ValueError(f"Dispersion model missing keys: {missing}")
    return DispersionModel(
        coefficients=tuple(data["coefficients"]),
        range_nm=tuple(data["range_nm"]),
        name=str(data.get("name", "custom")),
    )


def load_dispersion_model(path: str) -> DispersionModel:
    """
    Load a dispersion model from a JSON file.

    Raises:
        FileNotFoundError: If the file does not exist
        ValueError: If the file content is malformed
    """
    model_path = Path(path)
    if not model_path.exists():
        logger.error(f"Dispersion file not found: {path}")
        raise FileNotFoundError(f"Dispersion file not found: {path}")

    try:
        with open(model_path, "r") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        logger.error(f"Could not parse dispersion file {path}: {e}")
        raise ValueError(f"Could not parse dispersion file {path}: {e}")

    model = dispersion_model_from_dict(data)
    logger.info(f"Loaded dispersion model '{model.name}' from {path}")
    return model
