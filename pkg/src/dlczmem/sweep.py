"""Lifetime and initial g2 versus detection angle, with and without freezing."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .config import ExperimentConfig
from .core import spinwave_magnitude_small_angle, thermal_speed
from .decay import motional_lifetime
from .errors import DomainError, InfeasibleError
from .experiment import ExperimentResult, run_experiment

MAX_ANGLE = math.radians(10.0)


@dataclass(frozen=True)
class SweepRow:
    theta_s: float
    freezing: bool
    tau_1e: Optional[float]
    tau_err: Optional[float]
    g2_initial: Optional[float]
    g2_err: Optional[float]
    residual_fraction: float = 0.0
    fallback: bool = False  # freezing was infeasible; row holds the unfrozen run

    def __post_init__(self):
        if not self.theta_s > 0:
            raise DomainError("theta_s must be positive")


def _row(result: ExperimentResult, freezing: bool, fallback: bool) -> SweepRow:
    tau = tau_err = g2_0 = g2_err = None
    fit = result.efficiency_fit
    if fit is not None and fit.identifiable:
        tau, tau_err = fit.tau_1e, fit.tau_err
    if result.g2_fit is not None:
        g2_0, g2_err = result.g2_fit.initial_value()
    residual = 1.0 if fallback or result.solution is None else result.solution.residual_fraction
    return SweepRow(result.theta_s, freezing, tau, tau_err, g2_0, g2_err, residual, fallback)


def angle_sweep(angles: Sequence[float], freezing: bool, config: ExperimentConfig):
    """One SweepRow per angle (radians), ordered by angle.

    The lifetime is the fitted 1/e time of the simulated efficiency
    curve; the initial g2 is the fitted g2 curve extrapolated to t = 0.
    """
    angles = sorted(float(a) for a in angles)
    for a in angles:
        if not 0 < a <= MAX_ANGLE + 1e-12:
            raise DomainError(f"angle {math.degrees(a)} deg outside (0, 10] deg")
    rows = []
    for a in angles:
        try:
            result = run_experiment(config, theta_s=a, freezing=freezing)
            rows.append(_row(result, freezing, fallback=False))
        except InfeasibleError:
            result = run_experiment(config, theta_s=a, freezing=False)
            rows.append(_row(result, True, fallback=True))
    return rows


def theory_overlay(angles, convention: str = "rms_1d", config: Optional[ExperimentConfig] = None):
    """Motional lifetime 1/(k_s(theta) v) for a speed convention, plot-ready."""
    config = config or ExperimentConfig()
    species, cloud = config.species_params(), config.cloud_params()
    v = thermal_speed(cloud.temperature, species.mass, convention)
    angles = np.asarray(angles, dtype=float)
    if np.any(angles <= 0):
        raise DomainError("angles must be positive")
    taus = np.array([motional_lifetime(spinwave_magnitude_small_angle(a, species.wavelength_write), v)
                     for a in angles])
    return {"convention": convention, "speed_m_per_s": v,
            "theta_deg": np.degrees(angles).tolist(), "tau_s": taus.tolist()}
