"""
Two-qubit polarization state tomography.

Projectors for the H/V/D/A/R/L bases, Poisson count simulation, linear
inversion, maximum-likelihood reconstruction over rho = T^dag T / tr(T^dag T)
with T lower triangular (16 real parameters), fidelity, concurrence and purity.

Amplitude and matrix ordering is (HH, HV, VH, VV).
"""

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union
import csv
import logging
import math

import numpy as np
from scipy.optimize import minimize

try:
    from .polarization import TwoPhotonState, pair_state_from_pump, state_to_density_matrix
    from .shared_utils import (
        NumericalError, ensure_file_path, require_choice, require_in_range, require_positive, to_native,
    )
except (ImportError, ValueError):
    from polarization import TwoPhotonState, pair_state_from_pump, state_to_density_matrix
    from shared_utils import (
        NumericalError, ensure_file_path, require_choice, require_in_range, require_positive, to_native,
    )

logger = logging.getLogger(__name__)

PHYSICALITY_TOL = 1e-10
PROBABILITY_FLOOR = 1e-12
VALID_LABELS = ["H", "V", "D", "A", "R", "L"]
VALID_HANDEDNESS = ["standard", "flipped"]
COUNTS_FIELDS = ["basis_1", "basis_2", "counts", "seconds"]

Setting = Tuple[str, str]

# Informationally complete two-qubit tomography set
STANDARD_16: Tuple[Setting, ...] = (
    ("H", "H"), ("H", "V"), ("V", "V"), ("V", "H"),
    ("R", "H"), ("R", "V"), ("D", "V"), ("D", "H"),
    ("D", "R"), ("D", "D"), ("R", "D"), ("H", "D"),
    ("V", "D"), ("V", "L"), ("H", "L"), ("R", "L"),
)

_SIGMA = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
_PAULI_BASIS = np.array([np.kron(a, b) for a in _SIGMA for b in _SIGMA])
_SPIN_FLIP = np.kron(_SIGMA[2], _SIGMA[2])


class ConvergenceError(NumericalError):
    """MLE did not converge; carries the best result found and optimizer diagnostics."""

    def __init__(self, message: str, best_result: "TomographyResult", diagnostics: dict):
        super().__init__(message)
        self.best_result = best_result
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class MeasurementRecord:
    """Counts recorded for one two-photon analyzer setting."""
    setting: Setting
    counts: float
    acquisition_time: float = 1.0

    def __post_init__(self):
        if len(self.setting) != 2:
            raise ValueError(f"setting must be a pair of basis labels, got {self.setting}")
        for label in self.setting:
            require_choice("basis label", label, VALID_LABELS)
        require_positive(f"counts for {self.setting}", self.counts, allow_zero=True)
        require_positive(f"acquisition_time for {self.setting}", self.acquisition_time)
        object.__setattr__(self, "setting", tuple(self.setting))


@dataclass
class TomographyResult:
    """Reconstructed state with its figures of merit."""
    rho: np.ndarray
    fidelity_to_target: Optional[float]
    concurrence: float
    purity: float
    log_likelihood: float
    converged: bool = True
    iterations: int = 0
    likelihood_history: List[float] = field(default_factory=list)


# ============================================================================
# BASES AND PROJECTORS
# ============================================================================

def basis_vector(label: str, handedness: str = "standard") -> np.ndarray:
    """
    Single-photon polarization vector in (H, V).

    R = (H + iV)/sqrt2 and L = (H - iV)/sqrt2 in the standard convention;
    "flipped" swaps the circular pair.
    """
    require_choice("basis label", label, VALID_LABELS)
    require_choice("handedness", handedness, VALID_HANDEDNESS)
    s = 1.0 / math.sqrt(2.0)
    circular = 1j if handedness == "standard" else -1j
    vectors = {
        "H": np.array([1, 0], dtype=complex),
        "V": np.array([0, 1], dtype=complex),
        "D": np.array([s, s], dtype=complex),
        "A": np.array([s, -s], dtype=complex),
        "R": np.array([s, circular * s], dtype=complex),
        "L": np.array([s, -circular * s], dtype=complex),
    }
    return vectors[label]


def projector(setting: Setting, handedness: str = "standard") -> np.ndarray:
    """Rank-1 projector |a><a| (x) |b><b| for a setting (a, b)."""
    if len(setting) != 2:
        raise ValueError(f"setting must be a pair of basis labels, got {setting}")
    vector = np.kron(basis_vector(setting[0], handedness), basis_vector(setting[1], handedness))
    return np.outer(vector, vector.conj())


def standard_16_settings() -> List[Setting]:
    """The 16 analyzer settings used by default."""
    return list(STANDARD_16)


def _weighted_projectors(records: Sequence[MeasurementRecord], handedness: str) -> np.ndarray:
    return np.array([record.acquisition_time * projector(record.setting, handedness) for record in records])


# ============================================================================
# STATE HELPERS
# ============================================================================

def validate_density_matrix(rho: np.ndarray, tol: float = PHYSICALITY_TOL) -> np.ndarray:
    """
    Check Hermiticity, unit trace and positivity.

    Raises:
        ValueError: On any violation beyond tol
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"Density matrix must be 4x4, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValueError("Density matrix is not Hermitian")
    trace = np.trace(rho)
    if abs(trace - 1.0) > tol:
        raise ValueError(f"Density matrix trace is {trace.real:.12f}, expected 1")
    min_eigenvalue = float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))))
    if min_eigenvalue < -tol:
        raise ValueError(f"Density matrix has negative eigenvalue {min_eigenvalue:.3e}")
    return rho


def werner_state(state: TwoPhotonState, p: float) -> np.ndarray:
    """p |psi><psi| + (1 - p) I/4."""
    require_in_range("werner p", p, 0.0, 1.0)
    return p * state_to_density_matrix(state) + (1.0 - p) * np.eye(4, dtype=complex) / 4.0


def _as_vector(target) -> np.ndarray:
    vector = np.asarray(target.amplitudes if isinstance(target, TwoPhotonState) else target, dtype=complex)
    if abs(np.vdot(vector, vector).real - 1.0) > 1e-10:
        raise ValueError("Target state must be normalized")
    return vector


def fidelity(rho: np.ndarray, target) -> float:
    """Pure-target fidelity <psi|rho|psi>."""
    rho = validate_density_matrix(rho)
    vector = _as_vector(target)
    value = float(np.real(np.vdot(vector, rho @ vector)))
    return min(max(value, 0.0), 1.0)


def concurrence(rho: np.ndarray) -> float:
    """
    Wootters concurrence max(0, l1 - l2 - l3 - l4), l_i the decreasing square
    roots of the eigenvalues of rho (sy x sy) rho* (sy x sy).
    """
    rho = validate_density_matrix(rho)
    rho_tilde = _SPIN_FLIP @ rho.conj() @ _SPIN_FLIP
    weights, vectors = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    sqrt_rho = (vectors * np.sqrt(np.clip(weights, 0.0, None))) @ vectors.conj().T
    product = sqrt_rho @ rho_tilde @ sqrt_rho
    eigenvalues = np.linalg.eigvalsh(0.5 * (product + product.conj().T))
    lambdas = np.sort(np.sqrt(np.clip(eigenvalues, 0.0, None)))[::-1]
    return float(max(0.0, lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]))


def purity(rho: np.ndarray) -> float:
    """tr(rho^2)."""
    rho = np.asarray(rho, dtype=complex)
    return float(np.real(np.trace(rho @ rho)))


# ============================================================================
# COUNTS
# ============================================================================

def expected_records(rho: np.ndarray, settings: Sequence[Setting], mean_total: float,
                     acquisition_time: float = 1.0, handedness: str = "standard") -> List[MeasurementRecord]:
    """Noiseless records with counts mean_total * tr(P_k rho)."""
    rho = validate_density_matrix(rho)
    require_positive("mean_total", mean_total)
    records = []
    for setting in settings:
        probability = max(float(np.real(np.trace(projector(setting, handedness) @ rho))), 0.0)
        records.append(MeasurementRecord(tuple(setting), mean_total * probability, acquisition_time))
    return records


def simulate_counts(rho: np.ndarray, settings: Sequence[Setting], mean_total: float, seed: int,
                    acquisition_time: float = 1.0, handedness: str = "standard") -> List[MeasurementRecord]:
    """
    Poisson counts with mean mean_total * tr(P_k rho) per setting.

    Raises:
        ValueError: If rho is unphysical or mean_total <= 0
    """
    rng = np.random.default_rng(seed)
    noiseless = expected_records(rho, settings, mean_total, acquisition_time, handedness)
    return [replace(record, counts=int(rng.poisson(record.counts))) for record in noiseless]


def subtract_accidentals(records: Sequence[MeasurementRecord],
                         accidental_counts: Union[float, Mapping[Setting, float]]) -> List[MeasurementRecord]:
    """Flat accidental subtraction, clipped at zero."""
    corrected = []
    for record in records:
        if isinstance(accidental_counts, Mapping):
            baseline = float(accidental_counts.get(record.setting, 0.0))
        else:
            baseline = float(accidental_counts)
        corrected.append(replace(record, counts=max(record.counts - baseline, 0.0)))
    return corrected


# ============================================================================
# LINEAR INVERSION
# ============================================================================

def linear_reconstruct(records: Sequence[MeasurementRecord], handedness: str = "standard") -> np.ndarray:
    """
    Linear inversion of tr(P_k rho) = n_k / N in the two-qubit Pauli basis.

    The overall scale N is solved together with rho, so any informationally
    complete list of settings (16 or more) is accepted. The result is
    Hermitian with unit trace but may have negative eigenvalues.

    Raises:
        ValueError: If the design matrix is singular or all counts are zero
    """
    weighted = _weighted_projectors(records, handedness)
    design = np.real(np.einsum("kij,mji->km", weighted, _PAULI_BASIS)) / 4.0
    if np.linalg.matrix_rank(design) < 16:
        logger.error("Measurement settings are not informationally complete")
        raise ValueError("Singular design matrix: settings are not informationally complete")

    counts = np.array([record.counts for record in records], dtype=float)
    coefficients, *_ = np.linalg.lstsq(design, counts, rcond=None)
    if coefficients[0] <= 0:
        raise ValueError("Total counts must be > 0 for reconstruction")

    rho = np.einsum("m,mij->ij", coefficients / coefficients[0], _PAULI_BASIS) / 4.0
    return 0.5 * (rho + rho.conj().T)


# ============================================================================
# MAXIMUM LIKELIHOOD
# ============================================================================

_DIAGONAL = [(0, 0), (1, 1), (2, 2), (3, 3)]
_LOWER = [(1, 0), (2, 1), (3, 2), (2, 0), (3, 1), (3, 0)]


def params_to_t(params: np.ndarray) -> np.ndarray:
    """Lower-triangular T from 4 real diagonal and 6 complex off-diagonal entries."""
    t = np.zeros((4, 4), dtype=complex)
    for index, (r, c) in enumerate(_DIAGONAL):
        t[r, c] = params[index]
    for index, (r, c) in enumerate(_LOWER):
        t[r, c] = params[4 + 2 * index] + 1j * params[5 + 2 * index]
    return t


def params_to_rho(params: np.ndarray) -> np.ndarray:
    t = params_to_t(params)
    m = t.conj().T @ t
    return m / np.real(np.trace(m))


def rho_to_params(rho: np.ndarray) -> np.ndarray:
    """Parameters of a lower-triangular T with rho = T^dag T (rho positive definite)."""
    flip = np.eye(4)[::-1]
    lower = np.linalg.cholesky(flip @ rho @ flip)
    t = flip @ lower.conj().T @ flip
    params = np.zeros(16)
    for index, (r, c) in enumerate(_DIAGONAL):
        params[index] = t[r, c].real
    for index, (r, c) in enumerate(_LOWER):
        params[4 + 2 * index] = t[r, c].real
        params[5 + 2 * index] = t[r, c].imag
    return params


def _physical_start(rho: np.ndarray, mixing: float = 0.01) -> np.ndarray:
    weights, vectors = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    weights = np.clip(weights, 0.0, None)
    if weights.sum() <= 0:
        return np.eye(4, dtype=complex) / 4.0
    clipped = (vectors * weights) @ vectors.conj().T / weights.sum()
    return (1.0 - mixing) * clipped + mixing * np.eye(4) / 4.0


class _PoissonLikelihood:
    """
    Negative Poisson log-likelihood per count, with the scale N profiled out:

        f = -(1/n) sum_k n_k ln q_k + ln sum_k q_k,   q_k = tr(W_k rho)

    where W_k = t_k P_k includes the acquisition time.
    """

    def __init__(self, records: Sequence[MeasurementRecord], handedness: str):
        self.weighted = _weighted_projectors(records, handedness)
        self.counts = np.array([record.counts for record in records], dtype=float)
        self.total = float(self.counts.sum())

    def probabilities(self, rho: np.ndarray) -> np.ndarray:
        q = np.real(np.einsum("kij,ji->k", self.weighted, rho))
        return np.maximum(q, PROBABILITY_FLOOR)

    def __call__(self, params: np.ndarray) -> Tuple[float, np.ndarray]:
        t = params_to_t(params)
        m = t.conj().T @ t
        tau = np.real(np.trace(m))
        rho = m / tau
        q = self.probabilities(rho)
        s = q.sum()
        value = -np.dot(self.counts, np.log(q)) / self.total + math.log(s)

        weights = (-self.counts / q) / self.total + 1.0 / s
        g_rho = np.einsum("k,kij->ij", weights, self.weighted)
        g = (g_rho - np.real(np.trace(g_rho @ rho)) * np.eye(4)) / tau
        x = g @ t.conj().T

        gradient = np.zeros(16)
        for index, (r, c) in enumerate(_DIAGONAL):
            gradient[index] = 2.0 * x[c, r].real
        for index, (r, c) in enumerate(_LOWER):
            gradient[4 + 2 * index] = 2.0 * x[c, r].real
            gradient[5 + 2 * index] = -2.0 * x[c, r].imag
        return float(value), gradient

    def log_likelihood(self, rho: np.ndarray) -> float:
        """sum_k n_k ln(N q_k) - N q_k at the fitted scale N = n / sum q."""
        q = self.probabilities(rho)
        scale = self.total / q.sum()
        return float(np.dot(self.counts, np.log(scale * q)) - scale * q.sum())


def _summarize(rho: np.ndarray, likelihood: _PoissonLikelihood, target, converged: bool,
               iterations: int, history: List[float]) -> TomographyResult:
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.real(np.trace(rho))
    return TomographyResult(
        rho=rho,
        fidelity_to_target=fidelity(rho, target) if target is not None else None,
        concurrence=concurrence(rho),
        purity=purity(rho),
        log_likelihood=likelihood.log_likelihood(rho),
        converged=converged,
        iterations=iterations,
        likelihood_history=history,
    )


def mle_reconstruct(records: Sequence[MeasurementRecord], initial: Optional[np.ndarray] = None,
                    target=None, max_iterations: int = 5000, tolerance: float = 1e-9,
                    handedness: str = "standard") -> TomographyResult:
    """
    Maximum-likelihood density matrix under Poisson statistics.

    Quasi-Newton (BFGS) ascent over the 16 T parameters. Converged when the
    relative log-likelihood improvement over the last accepted iteration is
    below tolerance (or the optimizer reports success).

    Args:
        records: Informationally complete measurement records
        initial: Optional starting density matrix; default is the linear inversion
        target: Optional pure state for fidelity_to_target
        max_iterations: Iteration cap
        tolerance: Relative log-likelihood improvement threshold

    Raises:
        ValueError: If total counts are zero or settings are incomplete
        ConvergenceError: If not converged within max_iterations
    """
    likelihood = _PoissonLikelihood(records, handedness)
    if likelihood.total <= 0:
        logger.error("No counts in measurement records")
        raise ValueError("Total counts must be > 0 for maximum-likelihood reconstruction")

    start = linear_reconstruct(records, handedness) if initial is None else np.asarray(initial, dtype=complex)
    params0 = rho_to_params(_physical_start(start))

    history: List[float] = []

    def record_iteration(params):
        history.append(likelihood.log_likelihood(params_to_rho(params)))

    history.append(likelihood.log_likelihood(params_to_rho(params0)))
    outcome = minimize(likelihood, params0, jac=True, method="BFGS", callback=record_iteration,
                       options={"maxiter": max_iterations, "gtol": 1e-10})

    if len(history) >= 2:
        last_gain = history[-1] - history[-2]
        relative_gain = abs(last_gain) / max(abs(history[-1]), 1.0)
    else:
        relative_gain = 0.0
    converged = bool(outcome.success) or relative_gain < tolerance

    result = _summarize(params_to_rho(outcome.x), likelihood, target, converged, int(outcome.nit), history)
    if not converged:
        diagnostics = {"message": str(outcome.message), "iterations": int(outcome.nit),
                       "relative_gain": relative_gain}
        logger.error(f"MLE did not converge: {diagnostics}")
        raise ConvergenceError(f"MLE did not converge after {outcome.nit} iterations", result, diagnostics)

    logger.info(f"MLE converged in {outcome.nit} iterations (log-likelihood {result.log_likelihood:.6f})")
    return result


def pump_angle_experiment(theta: float, noise: float, mean_total: float, seed: int,
                          settings: Optional[Sequence[Setting]] = None,
                          handedness: str = "standard") -> TomographyResult:
    """
    Simulated tomography of the pair state for a pump angle with Werner noise:
    state -> Werner mixing -> Poisson counts -> MLE -> metrics against the ideal state.
    """
    ideal = pair_state_from_pump(theta)
    rho = werner_state(ideal, noise)
    records = simulate_counts(rho, settings or STANDARD_16, mean_total, seed, handedness=handedness)
    return mle_reconstruct(records, target=ideal, handedness=handedness)


# ============================================================================
# FILE I/O
# ============================================================================

def read_counts_csv(path: str) -> List[MeasurementRecord]:
    """
    Read a counts file with header basis_1,basis_2,counts,seconds.

    Raises:
        FileNotFoundError: If the file does not exist
        ValueError: On missing columns, bad values or duplicate settings
    """
    counts_path = Path(path)
    if not counts_path.exists():
        logger.error(f"Counts file not found: {path}")
        raise FileNotFoundError(f"Counts file not found: {path}")

    records: List[MeasurementRecord] = []
    seen = set()
    with open(counts_path, "r", newline="") as f:
        reader = csv.DictReader(f)
        missing = [name for name in COUNTS_FIELDS if name not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"Counts file {path} missing columns: {missing}")
        for line, row in enumerate(reader, start=2):
            setting = (row["basis_1"].strip(), row["basis_2"].strip())
            if setting in seen:
                raise ValueError(f"Duplicate setting {setting} at line {line} of {path}")
            seen.add(setting)
            try:
                records.append(MeasurementRecord(setting, float(row["counts"]), float(row["seconds"])))
            except ValueError as e:
                raise ValueError(f"Line {line} of {path}: {e}")

    logger.info(f"Read {len(records)} measurement records from {path}")
    return records


def write_counts_csv(path: str, records: Sequence[MeasurementRecord]) -> Path:
    """Write records in the counts-file schema."""
    output_path = ensure_file_path(path)
    with open(output_path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=COUNTS_FIELDS)
        writer.writeheader()
        for record in records:
            counts = record.counts
            writer.writerow({
                "basis_1": record.setting[0],
                "basis_2": record.setting[1],
                "counts": int(counts) if float(counts).is_integer() else f"{counts:.9g}",
                "seconds": f"{record.acquisition_time:.9g}",
            })
    return output_path


def result_to_dict(result: TomographyResult) -> Dict[str, object]:
    """JSON-ready result: matrix as nested [re, im] pairs plus figures of merit."""
    return to_native({
        "rho": [[complex(v) for v in row] for row in result.rho],
        "fidelity": result.fidelity_to_target,
        "concurrence": result.concurrence,
        "purity": result.purity,
        "log_likelihood": result.log_likelihood,
        "converged": result.converged,
        "iterations": result.iterations,
    })
