"""Shared fixtures: films, pump, windows and coarse integration grids."""

import pytest

from dispersion import NonlinearFilm
from spdc_model import DetectionWindow, GridSettings, PumpBeam

# 1/1461.43 + 1/1650 = 2/1550: signal band symmetric about degeneracy in frequency
SYMMETRIC_BAND_NM = (1.0 / (2.0 / 1550.0 - 1.0 / 1650.0), 1650.0)


@pytest.fixture
def monolayer():
    return NonlinearFilm(layer_count=1)


@pytest.fixture
def thick_film():
    return NonlinearFilm(layer_count=216)


@pytest.fixture
def pump():
    return PumpBeam()


@pytest.fixture
def windows():
    return DetectionWindow.forward(0.2), DetectionWindow.backward(0.2)


@pytest.fixture
def symmetric_windows():
    return DetectionWindow.forward(0.2, SYMMETRIC_BAND_NM), DetectionWindow.backward(0.2, SYMMETRIC_BAND_NM)


@pytest.fixture
def box_grids():
    """Scenario-box resolution that keeps the pump ridge resolved."""
    return GridSettings(omega_points=32, theta_points=720, theta_per_box=64, cone_points=128, chunk_size=8)


@pytest.fixture
def circle_grids():
    """Full-circle resolution: 720 angles resolve the ~0.009 rad pump ridge."""
    return GridSettings(omega_points=12, theta_points=720, theta_per_box=64, cone_points=128, chunk_size=4)


@pytest.fixture
def symmetric_band():
    return SYMMETRIC_BAND_NM
