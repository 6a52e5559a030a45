"""
One storage experiment from a config: geometry -> Raman kicks -> Monte Carlo
efficiency curve -> g2 curve -> lifetime fits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import ExperimentConfig, resolve_threads
from .core import BeamGeometry, WaveVector3
from .curves import DecayCurve
from .decay import DecayEnvelope, composite_envelope
from .errors import FitError
from .fitting import FitResult, fit_decay
from .montecarlo import PulseSequence, SimulationSettings, run_sequence
from .photons import correlation_curve, g2_curve
from .raman import (FreezingConstraint, FreezingSolution, RamanPulse, pi_pulse_duration,
                    solve_freezing_geometry, transfer_probability)


@dataclass(frozen=True)
class ExperimentResult:
    theta_s: float
    freezing: bool
    efficiency: DecayCurve
    g2: DecayCurve
    efficiency_fit: Optional[FitResult]
    g2_fit: Optional[FitResult]
    predicted_tau: Optional[float]
    solution: Optional[FreezingSolution]
    fit_errors: tuple = ()


def raman_pulse(cfg: ExperimentConfig, delta_k: WaveVector3 = WaveVector3.zero()) -> RamanPulse:
    r = cfg.raman
    rabi = r.rabi_frequency_khz * 1e3
    duration = r.pulse_duration_us * 1e-6 if r.pulse_duration_us > 0 else pi_pulse_duration(rabi)
    return RamanPulse(rabi, r.two_photon_detuning_hz, duration, delta_k)


def transfer_per_pulse(cfg: ExperimentConfig) -> float:
    if cfg.raman.transfer_from_pulse:
        pulse = raman_pulse(cfg)
        return transfer_probability(pulse, pulse.duration)
    return cfg.raman.transfer_efficiency


def freezing_constraint(cfg: ExperimentConfig, theta_s: float) -> FreezingConstraint:
    r = cfg.raman
    return FreezingConstraint(
        plane_normal=tuple(r.plane_normal) if r.plane_normal else None,
        intersection_angle=theta_s if r.lock_intersection_angle else None,
    )


def build_sequence(cfg: ExperimentConfig, theta_s: float, freezing: bool):
    """PulseSequence and freezing solution (None when not freezing)."""
    species = cfg.species_params()
    geometry = BeamGeometry.standard(theta_s, cfg.geometry.mode_waist_writeout_um * 1e-6,
                                     cfg.geometry.mode_waist_control_um * 1e-6)
    k_s = geometry.k_spinwave(species.wavelength_write)
    if not freezing:
        return PulseSequence(k_s), None, geometry
    solution = solve_freezing_geometry(k_s, species.wavelength_raman,
                                       freezing_constraint(cfg, theta_s),
                                       cfg.raman.single_photon_detuning_mhz)
    # deliberate extra residual along k_s, on top of whatever the solver leaves
    kick = solution.kick + k_s * cfg.raman.residual_fraction
    scale = transfer_per_pulse(cfg) ** 2 * cfg.raman.mode_matching
    seq = PulseSequence(k_s, freeze_kick=kick, pulse_duration=raman_pulse(cfg).duration,
                        efficiency_scale=scale)
    return seq, solution, geometry


def settings_for(cfg: ExperimentConfig, geometry: BeamGeometry) -> SimulationSettings:
    sim = cfg.simulation
    gradient = tuple(cfg.magnetic.gradient_g_per_m) if cfg.toggles.magnetic else None
    return SimulationSettings(
        cloud=cfg.cloud_params(), species=cfg.species_params(), levels=cfg.level_scheme(),
        n_atoms=sim.n_atoms, n_trials=sim.n_trials, master_seed=sim.master_seed,
        mode_waist=geometry.mode_waist_writeout if cfg.toggles.expansion else None,
        mode_axis=geometry.dir_writeout, gravity=cfg.toggles.gravity,
        field_gradient=gradient, workers=resolve_threads(cfg),
    )


def predicted_envelope(cfg: ExperimentConfig, sequence: PulseSequence) -> DecayEnvelope:
    """Analytic expectation for the sequence, used to choose the probe grid."""
    cloud, species = cfg.cloud_params(), cfg.species_params()
    sigma_v = cloud.velocity_sigma(species)
    k_storage = sequence.k_s if sequence.freeze_kick is None else sequence.k_s + sequence.freeze_kick
    members = [DecayEnvelope.motional(k_storage.norm(), sigma_v)]
    if cfg.toggles.expansion:
        members.append(DecayEnvelope.expansion(cfg.geometry.mode_waist_writeout_um * 1e-6, sigma_v))
    grad = np.asarray(cfg.magnetic.gradient_g_per_m, dtype=float)
    if cfg.toggles.magnetic and np.any(grad):
        pair = "s" if sequence.freeze_kick is None else "s_prime"
        levels = cfg.level_scheme()
        coeff = abs(levels.differential_coefficient(pair))  # MHz/G
        g_hat = grad / np.linalg.norm(grad)
        sigma_along = float(np.linalg.norm(g_hat * np.asarray(cloud.sigma_r)))
        kind = "clock" if levels.is_clock_pair("g", pair) else "non_clock"
        members.append(DecayEnvelope.magnetic(coeff * float(np.linalg.norm(grad)), sigma_along, kind))
    return composite_envelope(members)


def probe_grid(cfg: ExperimentConfig, predicted_tau: Optional[float]) -> np.ndarray:
    sim = cfg.simulation
    if sim.probe_times_us:
        return np.asarray(sim.probe_times_us, dtype=float) * 1e-6
    t_max = sim.fallback_max_time_us * 1e-6 if predicted_tau is None else sim.probe_span * predicted_tau
    return np.linspace(0.0, t_max, sim.probe_count)


def run_experiment(cfg: ExperimentConfig, theta_s: Optional[float] = None,
                   freezing: Optional[bool] = None, fit: bool = True) -> ExperimentResult:
    theta_s = cfg.theta_s if theta_s is None else theta_s
    freezing = cfg.toggles.freezing if freezing is None else freezing
    sequence, solution, geometry = build_sequence(cfg, theta_s, freezing)
    predicted = predicted_envelope(cfg, sequence).tau
    times = probe_grid(cfg, predicted)
    eff = run_sequence(sequence, times, settings_for(cfg, geometry))
    meta = dict(eff.meta, theta_s_deg=math.degrees(theta_s), freezing=freezing)
    eff = DecayCurve(eff.times, eff.values, eff.sigmas, "efficiency", meta)
    g2 = correlation_curve(g2_curve(eff, cfg.detection_params()), "g2", meta)

    eff_fit = g2_fit = None
    errors = []
    if fit:
        try:
            eff_fit = fit_decay(eff, cfg.fit.model)
        except FitError as exc:
            errors.append(f"efficiency: {exc}")
        try:
            g2_fit = fit_decay(g2, cfg.fit.model)
        except FitError as exc:
            errors.append(f"g2: {exc}")
    return ExperimentResult(theta_s, freezing, eff, g2, eff_fit, g2_fit, predicted, solution,
                            tuple(errors))
