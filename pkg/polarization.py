"""
Polarization module.
D3h second-order susceptibility tensor, pump-angle dependent two-photon
polarization states, Bell-state targets and the six-fold SHG pattern.

Axis convention: H = zigzag (x), V = armchair (y); pump angles are measured
from the armchair axis, so the pump field is e_p = (sin theta, cos theta) in (x, y).
Two-photon amplitudes are ordered (HH, HV, VH, VV).
"""

from dataclasses import dataclass
from typing import Dict, Tuple
import logging
import math

import numpy as np

try:
    from .shared_utils import require_choice
except (ImportError, ValueError):
    from shared_utils import require_choice

logger = logging.getLogger(__name__)

NORMALIZATION_TOL = 1e-12
BASIS_ORDER = ("HH", "HV", "VH", "VV")

VALID_ANALYZERS = ["parallel", "perpendicular"]


@dataclass(frozen=True)
class AxisConvention:
    """Lab polarization labels mapped onto crystal axes."""
    H: str = "zigzag (x)"
    V: str = "armchair (y)"
    theta_reference: str = "armchair axis"


AXES = AxisConvention()


@dataclass(frozen=True)
class ChiTensor:
    """
    D3h in-plane chi(2) tensor with four nonzero elements:
    chi_yyy = d, chi_yxx = chi_xxy = chi_xyx = -d.
    """
    d: float = 1.0

    def as_array(self) -> np.ndarray:
        """Tensor chi[i, j, k] with index 0 = x, 1 = y."""
        chi = np.zeros((2, 2, 2))
        chi[1, 1, 1] = self.d
        chi[1, 0, 0] = -self.d
        chi[0, 0, 1] = -self.d
        chi[0, 1, 0] = -self.d
        return chi

    def nonzero_elements(self) -> Dict[str, float]:
        labels = "xy"
        chi = self.as_array()
        return {
            f"{labels[i]}{labels[j]}{labels[k]}": float(chi[i, j, k])
            for i in range(2) for j in range(2) for k in range(2) if chi[i, j, k] != 0
        }


@dataclass(frozen=True)
class TwoPhotonState:
    """Normalized pure polarization state over (HH, HV, VH, VV)."""
    amplitudes: Tuple[complex, complex, complex, complex]

    def __post_init__(self):
        amplitudes = np.asarray(self.amplitudes, dtype=complex).ravel()
        if amplitudes.shape != (4,):
            raise ValueError(f"TwoPhotonState needs 4 amplitudes, got {amplitudes.shape[0]}")
        norm = float(np.sum(np.abs(amplitudes) ** 2))
        if abs(norm - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"TwoPhotonState must be normalized (sum |a|^2 = {norm:.15f})")
        object.__setattr__(self, "amplitudes", tuple(complex(a) for a in amplitudes))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.amplitudes, dtype=complex)

    @classmethod
    def from_unnormalized(cls, amplitudes) -> "TwoPhotonState":
        """Normalize and canonicalize the global phase of raw amplitudes."""
        vector = np.asarray(amplitudes, dtype=complex)
        norm = np.linalg.norm(vector)
        if norm == 0:
            raise ValueError("Cannot build a state from all-zero amplitudes")
        return cls(tuple(canonicalize_phase(vector / norm)))


def canonicalize_phase(vector: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Rotate the global phase so the first nonzero amplitude is real and positive."""
    vector = np.asarray(vector, dtype=complex)
    nonzero = np.nonzero(np.abs(vector) > tol)[0]
    if nonzero.size == 0:
        return vector
    lead = vector[nonzero[0]]
    return vector * (abs(lead) / lead)


# ============================================================================
# STATES
# ============================================================================

_BELL_AMPLITUDES = {
    "Phi+": (1, 0, 0, 1),
    "Phi-": (1, 0, 0, -1),
    "Psi+": (0, 1, 1, 0),
    "Psi-": (0, 1, -1, 0),
}
_BELL_ALIASES = {"Φ+": "Phi+", "Φ-": "Phi-", "Φ−": "Phi-", "Ψ+": "Psi+", "Ψ-": "Psi-", "Ψ−": "Psi-"}
BELL_STATE_NAMES = list(_BELL_AMPLITUDES)


def bell_state(name: str) -> TwoPhotonState:
    """
    Canonical Bell state with 1/sqrt(2) amplitudes.

    Args:
        name: One of Phi+, Phi-, Psi+, Psi- (Greek letters also accepted)

    Raises:
        ValueError: For unknown names
    """
    key = _BELL_ALIASES.get(name, name)
    require_choice("Bell state", key, BELL_STATE_NAMES)
    return TwoPhotonState(tuple(np.asarray(_BELL_AMPLITUDES[key], dtype=complex) / math.sqrt(2.0)))


def _lab_rotation(frame_rotation: float) -> np.ndarray:
    """Single-photon rotation from crystal (x, y) to lab (H, V) axes."""
    c, s = math.cos(frame_rotation), math.sin(frame_rotation)
    return np.array([[c, s], [-s, c]])


def pair_state_from_pump(theta: float, d: float = 1.0, frame_rotation: float = 0.0) -> TwoPhotonState:
    """
    Two-photon polarization state produced by a pump polarized at theta.

    Contracts the pump field e_p = (sin theta, cos theta) with the tensor:
    A_jk = sum_i e_p,i chi_ijk, giving
    psi ~ cos(theta) (|VV> - |HH>) - sin(theta) (|HV> + |VH>).

    Args:
        theta: Pump polarization angle from the armchair axis (rad)
        d: Tensor magnitude (drops out after normalization)
        frame_rotation: Angle of the lab H axis from the zigzag axis (rad)

    Returns:
        Normalized state with canonical global phase
    """
    pump_field = np.array([math.sin(theta), math.cos(theta)])
    amplitude = np.einsum("i,ijk->jk", pump_field, ChiTensor(d).as_array())
    if frame_rotation:
        rotation = _lab_rotation(frame_rotation)
        amplitude = rotation @ amplitude @ rotation.T
    return TwoPhotonState.from_unnormalized(amplitude.ravel())


def bell_fidelities(state: TwoPhotonState) -> Dict[str, float]:
    """|<B|psi>|^2 for each of the four Bell states."""
    vector = state.vector
    return {
        name: float(abs(np.vdot(bell_state(name).vector, vector)) ** 2)
        for name in BELL_STATE_NAMES
    }


def state_to_density_matrix(state: TwoPhotonState) -> np.ndarray:
    """
    Pure-state density matrix |psi><psi|.

    Raises:
        ValueError: If the amplitudes are not normalized
    """
    vector = np.asarray(state.amplitudes if isinstance(state, TwoPhotonState) else state, dtype=complex)
    norm = float(np.sum(np.abs(vector) ** 2))
    if abs(norm - 1.0) > NORMALIZATION_TOL:
        logger.error(f"State not normalized: {norm}")
        raise ValueError(f"State must be normalized (sum |a|^2 = {norm:.15f})")
    return np.outer(vector, vector.conj())


# ============================================================================
# SECOND-HARMONIC GENERATION
# ============================================================================

def shg_intensity(theta, analyzer: str = "parallel", d: float = 1.0):
    """
    Polarization-resolved SHG intensity for a fundamental polarized at theta.

    P_i = sum_jk chi_ijk E_j E_k projected on the pump axis (parallel) or its
    orthogonal (perpendicular): d^2 cos^2(3 theta) and d^2 sin^2(3 theta).
    """
    require_choice("analyzer", analyzer, VALID_ANALYZERS)
    theta = np.asarray(theta, dtype=float)
    field_vec = np.stack([np.sin(theta), np.cos(theta)], axis=-1)
    polarization = np.einsum("ijk,...j,...k->...i", ChiTensor(d).as_array(), field_vec, field_vec)

    if analyzer == "parallel":
        axis = field_vec
    else:
        axis = np.stack([np.cos(theta), -np.sin(theta)], axis=-1)
    intensity = np.sum(polarization * axis, axis=-1) ** 2
    return float(intensity) if intensity.ndim == 0 else intensity


def shg_pattern(thetas, d: float = 1.0) -> Tuple[np.ndarray, np.ndarray]:
    """Parallel and perpendicular SHG intensities over an array of angles."""
    thetas = np.asarray(thetas, dtype=float)
    return shg_intensity(thetas, "parallel", d), shg_intensity(thetas, "perpendicular", d)
