"""Motional dephasing and spin-wave freezing in atomic-ensemble quantum memories."""

__version__ = "0.1.0"

from .core import (BeamGeometry, CloudParams, LevelScheme, SpeciesParams, WaveVector3,
                   spinwave_magnitude_small_angle, spinwave_wavevector, thermal_speed,
                   wavevector_from_beam, zeeman_shift_first_order)
from .config import ExperimentConfig, load_config
from .curves import DecayCurve
from .fitting import FitResult, fit_decay, lifetime_with_error
from .photons import DetectionParams, fidelity, g2_from_probs, visibility

__all__ = [
    "BeamGeometry", "CloudParams", "LevelScheme", "SpeciesParams", "WaveVector3",
    "spinwave_magnitude_small_angle", "spinwave_wavevector", "thermal_speed",
    "wavevector_from_beam", "zeeman_shift_first_order",
    "ExperimentConfig", "load_config", "DecayCurve", "FitResult", "fit_decay",
    "lifetime_with_error", "DetectionParams", "fidelity", "g2_from_probs", "visibility",
]
