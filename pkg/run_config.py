"""
Run configuration for the simulator.

One JSON file with sections film, pump, windows, grids, simulation and
tomography. Missing keys fall back to the embedded defaults; every field is
validated at load time and errors name the dotted field path.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple
import copy
import json
import logging
import math

try:
    from .dispersion import DispersionModel, NonlinearFilm, load_dispersion_model
    from .photon_stats import DetectorModel, SourceModel
    from .spdc_model import DetectionWindow, GridSettings, PumpBeam, detection_angle_from_na
    from .tomography import STANDARD_16, VALID_HANDEDNESS, Setting, VALID_LABELS
except (ImportError, ValueError):
    from dispersion import DispersionModel, NonlinearFilm, load_dispersion_model
    from photon_stats import DetectorModel, SourceModel
    from spdc_model import DetectionWindow, GridSettings, PumpBeam, detection_angle_from_na
    from tomography import STANDARD_16, VALID_HANDEDNESS, Setting, VALID_LABELS

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_FILE = Path(__file__).parent / "config.json"


class ConfigError(ValueError):
    """Invalid configuration value; the message names the dotted field path."""


@dataclass(frozen=True)
class SimulationConfig:
    """Monte Carlo coincidence settings."""
    source: SourceModel = field(default_factory=SourceModel)
    detector_1: DetectorModel = field(default_factory=DetectorModel)
    detector_2: DetectorModel = field(default_factory=DetectorModel)
    seed: int = 1
    duration_s: float = 1000.0
    powers_mw: Tuple[float, ...] = (5.0, 10.0, 20.0, 30.0, 40.0)
    bin_width_s: float = 1e-9
    tau_range_s: float = 100e-9
    exclusion_sigmas: float = 5.0
    transmission_chain: Tuple[float, ...] = ()


@dataclass(frozen=True)
class TomographyConfig:
    """Reconstruction and simulated-tomography settings."""
    settings: Tuple[Setting, ...] = STANDARD_16
    werner_p: float = 1.0
    mean_total: float = 1e5
    handedness: str = "standard"
    subtract_accidentals: bool = False
    accidental_counts: float = 0.0
    max_iterations: int = 5000


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration for one CLI run."""
    film: NonlinearFilm
    pump: PumpBeam
    window_forward: DetectionWindow
    window_backward: DetectionWindow
    grids: GridSettings
    simulation: SimulationConfig
    tomography: TomographyConfig
    source_path: Optional[str] = None


# ============================================================================
# DEFAULTS AND MERGING
# ============================================================================

def _get_default_config() -> Dict[str, Any]:
    """Default configuration: monolayer film, 775 nm pump, 0.2 rad windows, telecom band."""
    return {
        "dispersion_path": None,
        "film": {
            "layer_count": 1,
            "chi2_magnitude": 1.0,
            "layer_thickness_m": 0.801e-9,
        },
        "pump": {
            "lambda_p_nm": 775.0,
            "waist_m": 10e-6,
            "power_mw": 40.0,
            "theta_rad": 0.0,
        },
        "windows": {
            "angular_full_width_rad": 0.2,
            "numerical_aperture": None,
            "lambda_band_nm": [1460.0, 1650.0],
        },
        "grids": {
            "omega_points": 512,
            "theta_points": 720,
            "theta_per_box": 96,
            "cone_points": 256,
            "chunk_size": 8,
        },
        "simulation": {
            "seed": 1,
            "duration_s": 1000.0,
            "powers_mw": [5.0, 10.0, 20.0, 30.0, 40.0],
            "bin_width_s": 1e-9,
            "tau_range_s": 100e-9,
            "exclusion_sigmas": 5.0,
            "transmission_chain": [],
            "source": {
                "pair_rate_per_mw": 0.21,
                "uncorrelated_background_1": 1000.0,
                "uncorrelated_background_2": 1000.0,
            },
            "detector_1": {"efficiency": 1.0, "dark_rate": 100.0, "jitter_sigma": 0.0},
            "detector_2": {"efficiency": 1.0, "dark_rate": 100.0, "jitter_sigma": 0.0},
        },
        "tomography": {
            "settings_path": None,
            "werner_p": 1.0,
            "mean_total": 1e5,
            "handedness": "standard",
            "subtract_accidentals": False,
            "accidental_counts": 0.0,
            "max_iterations": 5000,
        },
    }


def _deep_merge(base: Dict[str, Any], overrides: Dict[str, Any], path: str = "") -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in overrides.items():
        dotted = f"{path}{key}"
        if key not in base:
            logger.warning(f"Unknown config key {dotted} ignored")
            continue
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{dotted} must be an object, got {type(value).__name__}")
            merged[key] = _deep_merge(base[key], value, f"{dotted}.")
        else:
            merged[key] = value
    return merged


def apply_overrides(data: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """
    Set dotted-path values (e.g. {"simulation.seed": 7}) on a config dict.

    Raises:
        ConfigError: If a path does not exist in the configuration
    """
    updated = copy.deepcopy(data)
    for dotted, value in overrides.items():
        if value is None:
            continue
        node = updated
        keys = dotted.split(".")
        for key in keys[:-1]:
            if not isinstance(node.get(key), dict):
                raise ConfigError(f"Unknown config section in override: {dotted}")
            node = node[key]
        if keys[-1] not in node:
            raise ConfigError(f"Unknown config key in override: {dotted}")
        node[keys[-1]] = value
    return updated


# ============================================================================
# FIELD VALIDATION
# ============================================================================

def _cast(data: Dict[str, Any], section: str, key: str, kind: Callable):
    value = data[key]
    if kind is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        if not math.isfinite(value):
            raise ConfigError(f"{section}.{key} must be finite, got {value}")
        return float(value)
    if kind is int and isinstance(value, int) and not isinstance(value, bool):
        return value
    if kind is bool and isinstance(value, bool):
        return value
    if kind is int and isinstance(value, float) and value.is_integer():
        return int(value)
    raise ConfigError(f"{section}.{key} must be {kind.__name__}, got {value!r}")


def _float_list(data: Dict[str, Any], section: str, key: str) -> Tuple[float, ...]:
    values = data[key]
    if not isinstance(values, (list, tuple)):
        raise ConfigError(f"{section}.{key} must be a list of numbers, got {values!r}")
    return tuple(_cast({key: v}, section, key, float) for v in values)


def _build(section: str, factory: Callable, **kwargs):
    """Construct a domain object, re-raising its validation error under the section path."""
    try:
        return factory(**kwargs)
    except ValueError as e:
        head, _, rest = str(e).partition(" ")
        field_name = head.split(".", 1)[1] if "." in head else head
        logger.error(f"Invalid configuration in {section}: {e}")
        raise ConfigError(f"{section}.{field_name} {rest}")


def load_settings_file(path: str) -> Tuple[Setting, ...]:
    """
    Load a tomography settings list: JSON array of [basis_1, basis_2] pairs.

    Raises:
        FileNotFoundError: If the file does not exist
        ConfigError: If an entry is not a valid pair of basis labels
    """
    settings_path = Path(path)
    if not settings_path.exists():
        logger.error(f"Settings file not found: {path}")
        raise FileNotFoundError(f"Settings file not found: {path}")
    try:
        with open(settings_path, "r") as f:
            entries = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Could not parse settings file {path}: {e}")
    if not isinstance(entries, list):
        raise ConfigError(f"tomography.settings_path must contain a JSON array, got {type(entries).__name__}")
    settings = []
    for index, entry in enumerate(entries):
        if (not isinstance(entry, list) or len(entry) != 2
                or any(not isinstance(label, str) or label not in VALID_LABELS for label in entry)):
            logger.error(f"Invalid settings entry {index}: {entry!r}")
            raise ConfigError(f"tomography.settings_path entry {index} invalid: {entry!r}. "
                              f"Expected [basis_1, basis_2] with labels from {VALID_LABELS}")
        settings.append((entry[0], entry[1]))
    return tuple(settings)


def _windows(data: Dict[str, Any], dispersion: DispersionModel) -> Tuple[DetectionWindow, DetectionWindow]:
    band = _float_list(data, "windows", "lambda_band_nm")
    if len(band) != 2:
        raise ConfigError(f"windows.lambda_band_nm must be [min, max], got {list(band)}")
    width = _cast(data, "windows", "angular_full_width_rad", float)
    if data.get("numerical_aperture") is not None:
        na = _cast(data, "windows", "numerical_aperture", float)
        try:
            width = 2.0 * detection_angle_from_na(na, dispersion, 0.5 * (band[0] + band[1]))
        except ValueError as e:
            raise ConfigError(f"windows.numerical_aperture: {e}")
        logger.info(f"Collection full width from NA {na}: {width:.4f} rad")
    forward = _build("windows", DetectionWindow.forward, full_width=width, band=band)
    backward = _build("windows", DetectionWindow.backward, full_width=width, band=band)
    return forward, backward


def _detector(data: Dict[str, Any], section: str) -> DetectorModel:
    return _build(
        section, DetectorModel,
        efficiency=_cast(data, section, "efficiency", float),
        dark_rate=_cast(data, section, "dark_rate", float),
        jitter_sigma=_cast(data, section, "jitter_sigma", float),
    )


def _simulation(data: Dict[str, Any]) -> SimulationConfig:
    section = "simulation"
    source_data = data["source"]
    source = _build(
        f"{section}.source", SourceModel,
        pair_rate_per_mw=_cast(source_data, f"{section}.source", "pair_rate_per_mw", float),
        uncorrelated_background_1=_cast(source_data, f"{section}.source", "uncorrelated_background_1", float),
        uncorrelated_background_2=_cast(source_data, f"{section}.source", "uncorrelated_background_2", float),
    )
    config = SimulationConfig(
        source=source,
        detector_1=_detector(data["detector_1"], f"{section}.detector_1"),
        detector_2=_detector(data["detector_2"], f"{section}.detector_2"),
        seed=_cast(data, section, "seed", int),
        duration_s=_cast(data, section, "duration_s", float),
        powers_mw=_float_list(data, section, "powers_mw"),
        bin_width_s=_cast(data, section, "bin_width_s", float),
        tau_range_s=_cast(data, section, "tau_range_s", float),
        exclusion_sigmas=_cast(data, section, "exclusion_sigmas", float),
        transmission_chain=_float_list(data, section, "transmission_chain"),
    )
    for key in ("duration_s", "bin_width_s", "tau_range_s"):
        if getattr(config, key) <= 0:
            raise ConfigError(f"{section}.{key} must be > 0 (got {getattr(config, key)})")
    if config.exclusion_sigmas < 0:
        raise ConfigError(f"{section}.exclusion_sigmas must be >= 0 (got {config.exclusion_sigmas})")
    if config.tau_range_s < 5 * config.bin_width_s:
        raise ConfigError(f"{section}.tau_range_s must cover at least 5 bins (got {config.tau_range_s})")
    if any(p < 0 for p in config.powers_mw):
        raise ConfigError(f"{section}.powers_mw must be >= 0 (got {list(config.powers_mw)})")
    for index, t in enumerate(config.transmission_chain):
        if not (0 < t <= 1):
            raise ConfigError(f"{section}.transmission_chain[{index}] must be in (0, 1] (got {t})")
    return config


def _tomography(data: Dict[str, Any]) -> TomographyConfig:
    section = "tomography"
    settings = STANDARD_16
    if data.get("settings_path"):
        settings = load_settings_file(data["settings_path"])
    handedness = data["handedness"]
    if handedness not in VALID_HANDEDNESS:
        raise ConfigError(f"{section}.handedness unknown: {handedness}. Valid: {VALID_HANDEDNESS}")
    config = TomographyConfig(
        settings=settings,
        werner_p=_cast(data, section, "werner_p", float),
        mean_total=_cast(data, section, "mean_total", float),
        handedness=handedness,
        subtract_accidentals=_cast(data, section, "subtract_accidentals", bool),
        accidental_counts=_cast(data, section, "accidental_counts", float),
        max_iterations=_cast(data, section, "max_iterations", int),
    )
    if not (0.0 <= config.werner_p <= 1.0):
        raise ConfigError(f"{section}.werner_p must be in [0, 1] (got {config.werner_p})")
    if config.mean_total <= 0:
        raise ConfigError(f"{section}.mean_total must be > 0 (got {config.mean_total})")
    if config.accidental_counts < 0:
        raise ConfigError(f"{section}.accidental_counts must be >= 0 (got {config.accidental_counts})")
    if config.max_iterations < 1:
        raise ConfigError(f"{section}.max_iterations must be >= 1 (got {config.max_iterations})")
    return config


def config_from_dict(data: Dict[str, Any], source_path: Optional[str] = None) -> RunConfig:
    """
    Validate a fully merged config dict and build the RunConfig.

    Raises:
        ConfigError: On any invalid field
        FileNotFoundError: If a referenced file is missing
    """
    dispersion = DispersionModel()
    if data.get("dispersion_path"):
        try:
            dispersion = load_dispersion_model(data["dispersion_path"])
        except FileNotFoundError:
            raise
        except ValueError as e:
            raise ConfigError(f"dispersion_path: {e}")

    film_data = data["film"]
    film = _build(
        "film", NonlinearFilm,
        layer_count=_cast(film_data, "film", "layer_count", int),
        chi2_magnitude=_cast(film_data, "film", "chi2_magnitude", float),
        dispersion=dispersion,
        layer_thickness_m=_cast(film_data, "film", "layer_thickness_m", float),
    )

    pump_data = data["pump"]
    pump = _build(
        "pump", PumpBeam,
        lambda_p_nm=_cast(pump_data, "pump", "lambda_p_nm", float),
        waist_m=_cast(pump_data, "pump", "waist_m", float),
        power_mw=_cast(pump_data, "pump", "power_mw", float),
        polarization_theta=_cast(pump_data, "pump", "theta_rad", float),
    )

    window_forward, window_backward = _windows(data["windows"], dispersion)
    grid_data = data["grids"]
    grids = _build("grids", GridSettings, **{key: _cast(grid_data, "grids", key, int) for key in grid_data})

    return RunConfig(
        film=film,
        pump=pump,
        window_forward=window_forward,
        window_backward=window_backward,
        grids=grids,
        simulation=_simulation(data["simulation"]),
        tomography=_tomography(data["tomography"]),
        source_path=source_path,
    )


def load_config_dict(path: Optional[str] = None) -> Tuple[Dict[str, Any], Optional[str]]:
    """
    Read a config file and deep-merge it into the defaults.

    With no path, the packaged config.json is used when readable, otherwise
    the embedded defaults. An explicitly named file must exist and parse.
    """
    defaults = _get_default_config()
    if path is None:
        if DEFAULT_CONFIG_FILE.exists():
            try:
                with open(DEFAULT_CONFIG_FILE, "r") as f:
                    return _deep_merge(defaults, json.load(f)), str(DEFAULT_CONFIG_FILE)
            except Exception as e:
                logger.warning(f"Could not load default config: {e}. Using defaults.")
        return defaults, None

    config_path = Path(path)
    if not config_path.exists():
        logger.error(f"Config file not found: {path}")
        raise FileNotFoundError(f"Config file not found: {path}")
    try:
        with open(config_path, "r") as f:
            user_data = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Could not parse config file {path}: {e}")
    if not isinstance(user_data, dict):
        raise ConfigError(f"Config file {path} must contain a JSON object")
    logger.info(f"Loaded config from {path}")
    return _deep_merge(defaults, user_data), str(config_path)


def load_run_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Load, merge, apply flag overrides and validate."""
    data, source_path = load_config_dict(path)
    if overrides:
        data = apply_overrides(data, overrides)
    return config_from_dict(data, source_path)


def config_keys(sections: List[str]) -> List[str]:
    """Dotted leaf keys of the default config under the given sections."""
    defaults = _get_default_config()
    keys = []

    def walk(node: Any, prefix: str):
        if isinstance(node, dict):
            for key, value in node.items():
                walk(value, f"{prefix}.{key}" if prefix else key)
        else:
            keys.append(prefix)

    for section in sections:
        walk(defaults[section], section)
    return keys
