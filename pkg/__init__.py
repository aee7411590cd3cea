"""
Thin-film SPDC toolkit
Simulation and analysis of photon-pair emission from subwavelength chi(2) films.

Main modules:
- dispersion: Sellmeier index, wavevectors, coherence length
- spdc_model: Emission kinematics, scenario rates, spectra and bandwidth
- polarization: chi(2) tensor, pump-angle pair states, SHG pattern
- photon_stats: Time-tag Monte Carlo, coincidence histograms, g2
- tomography: Two-qubit state tomography (linear and maximum likelihood)
- cli: Command-line entry point

Quick start:
    from dispersion import NonlinearFilm, coherence_length
    from spdc_model import PumpBeam, DetectionWindow, scenario_rates, counter_to_co_ratio
    rates = scenario_rates(NonlinearFilm(1), PumpBeam(), DetectionWindow.forward(), DetectionWindow.backward())
    print(counter_to_co_ratio(rates).value)
"""

__version__ = "1.0"
__author__ = "Thin-film SPDC contributors"

from .dispersion import DispersionModel, NonlinearFilm, coherence_length, refractive_index
from .spdc_model import (
    DetectionWindow, PumpBeam, counter_to_co_ratio, emission_bandwidth, scenario_rates,
)
from .polarization import bell_state, pair_state_from_pump
from .photon_stats import DetectorModel, SourceModel, coincidence_histogram, g2_from_histogram
from .tomography import concurrence, fidelity, mle_reconstruct

__all__ = [
    'DispersionModel',
    'NonlinearFilm',
    'coherence_length',
    'refractive_index',
    'DetectionWindow',
    'PumpBeam',
    'counter_to_co_ratio',
    'emission_bandwidth',
    'scenario_rates',
    'bell_state',
    'pair_state_from_pump',
    'DetectorModel',
    'SourceModel',
    'coincidence_histogram',
    'g2_from_histogram',
    'concurrence',
    'fidelity',
    'mle_reconstruct',
]
