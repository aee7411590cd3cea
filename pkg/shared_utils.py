"""
Shared Utilities Module
Centralized helper functions used across the simulation and analysis modules.
Contains: error types, argument validation, angle bookkeeping, chunked evaluation
and conversion of numpy values for JSON/CSV output.
"""

from typing import Any, Iterator, List, Tuple
from pathlib import Path
import logging
import math

import numpy as np

logger = logging.getLogger(__name__)


# ============================================================================
# ERROR TYPES
# ============================================================================

class DomainError(ValueError):
    """Input lies outside the physical domain of a model (wavelength range, frequency, NA...)."""


class NumericalError(RuntimeError):
    """A numerical procedure could not produce a trustworthy result."""


# ============================================================================
# VALIDATION UTILITIES
# ============================================================================

def require_positive(name: str, value: float, allow_zero: bool = False) -> float:
    """
    Validate that a scalar parameter is positive (or nonnegative).

    Args:
        name: Parameter name used in the error message
        value: Value to validate
        allow_zero: Accept zero as valid

    Returns:
        float: The validated value

    Raises:
        ValueError: If value is not finite or violates the sign constraint
    """
    value = float(value)
    if not math.isfinite(value):
        logger.error(f"{name} is not finite: {value}")
        raise ValueError(f"{name} must be finite, got {value}")
    if value < 0 or (value == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        logger.error(f"Invalid {name}: {value}")
        raise ValueError(f"{name} must be {bound}, got {value}")
    return value


def require_in_range(name: str, value: float, min_val: float, max_val: float) -> float:
    """
    Validate that value lies in the closed interval [min_val, max_val].

    Raises:
        ValueError: If value is outside the interval
    """
    value = float(value)
    if not (min_val <= value <= max_val):
        logger.error(f"{name}={value} outside [{min_val}, {max_val}]")
        raise ValueError(f"{name} must be in [{min_val}, {max_val}], got {value}")
    return value


def require_choice(name: str, value: str, valid: List[str]) -> str:
    """Validate that value is one of the valid options."""
    if value not in valid:
        logger.error(f"Unknown {name}: {value}")
        raise ValueError(f"Unknown {name}: {value}. Valid: {valid}")
    return value


# ============================================================================
# ANGLE AND GRID UTILITIES
# ============================================================================

def normalize_angle(theta: float) -> float:
    """
    Wrap an angle into (-pi, pi].

    Examples:
        normalize_angle(3 * pi / 2)  ->  -pi / 2
        normalize_angle(-pi)         ->  pi
    """
    wrapped = math.remainder(float(theta), 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


def box_axis(center: float, full_width: float, points: int) -> np.ndarray:
    """
    Uniform angular axis spanning a box of given full width around center.

    The axis is symmetric about the center so that mirrored boxes sample
    mirrored angles exactly.
    """
    if points < 2:
        raise ValueError(f"points must be >= 2, got {points}")
    offsets = np.linspace(-0.5 * full_width, 0.5 * full_width, points)
    return center + offsets


def chunk_ranges(total: int, chunk_size: int) -> Iterator[Tuple[int, int]]:
    """
    Yield (start, stop) index pairs covering range(total) in chunks.

    Args:
        total: Number of items
        chunk_size: Size of each chunk

    Raises:
        ValueError: If chunk_size is not positive
    """
    if chunk_size <= 0:
        raise ValueError("chunk_size must be positive")
    for start in range(0, total, chunk_size):
        yield start, min(start + chunk_size, total)


# ============================================================================
# OUTPUT CONVERSION
# ============================================================================

def to_native(value: Any) -> Any:
    """
    Convert numpy containers and scalars to native Python types for JSON serialization.

    Complex values become [re, im] pairs; non-finite floats become the strings
    "inf", "-inf" or "nan".
    """
    if isinstance(value, dict):
        return {str(k): to_native(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_native(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_native(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return [to_native(float(value.real)), to_native(float(value.imag))]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


def format_float(value: float) -> str:
    """Locale-independent float text with 9 significant digits."""
    return f"{float(value):.9g}"


def ensure_file_path(path: str, create_parent: bool = True) -> Path:
    """
    Ensure file path is valid and parent directories exist if needed.

    Args:
        path: File path string
        create_parent: Whether to create parent directories

    Returns:
        Path: Pathlib Path object
    """
    file_path = Path(path)

    if create_parent:
        file_path.parent.mkdir(parents=True, exist_ok=True)

    return file_path
