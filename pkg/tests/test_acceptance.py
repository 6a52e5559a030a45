"""Acceptance gate: each test checks one criterion at its stated tolerance.

A verdict line per criterion is printed in the "acceptance criteria"
section of the pytest summary.
"""

import math
import time

import numpy as np
import pytest

from dlczmem.cli import cmd_simulate, cmd_sweep
from dlczmem.config import ExperimentConfig
from dlczmem.core import BeamGeometry, CloudParams, SpeciesParams, WaveVector3
from dlczmem.experiment import build_sequence, run_experiment, settings_for
from dlczmem.fitting import log_log_slope
from dlczmem.montecarlo import (KickEvent, PulseSequence, SimulationSettings, apply_kick,
                                imprint_spinwave, run_sequence, sample_ensemble)
from dlczmem.photons import fidelity
from dlczmem.raman import optimal_single_photon_detuning, pi_pulse_duration

ANGLES_DEG = (1.25, 2.1, 3.0, 4.8)
BASE = ExperimentConfig()


def test_1_fidelity_formula(criterion):
    f1, f2 = fidelity(20.6), fidelity(5.0)
    ok = abs(f1 - 0.9306) <= 0.005 and f2 == 0.75
    criterion(1, "fidelity regression", ok, f"F(20.6)={f1:.5f}, F(5)={f2!r}")


def test_2_mc_matches_analytic(criterion):
    species, cloud = SpeciesParams(), CloudParams()
    k_s = BeamGeometry.standard(math.radians(2.1)).k_spinwave(species.wavelength_write)
    sigma_v = cloud.velocity_sigma(species)
    tau = 1.0 / (k_s.norm() * sigma_v)
    times = np.linspace(0.0, 2.0 * tau, 10)
    start = time.perf_counter()
    curve = run_sequence(PulseSequence(k_s), times, SimulationSettings(n_atoms=10_000, n_trials=32))
    elapsed = time.perf_counter() - start
    analytic = np.exp(-(k_s.norm() * sigma_v * times) ** 2)
    z = np.abs(curve.values - analytic) / np.where(curve.sigmas > 0, curve.sigmas, np.inf)
    exact_t0 = curve.values[0] == pytest.approx(analytic[0], abs=1e-12)
    ok = bool(np.all(z[1:] <= 3.0)) and exact_t0 and elapsed < 10.0
    criterion(2, "Monte Carlo vs analytic Gaussian", ok,
              f"max |dev|/SE = {z[1:].max():.2f} over 10 points, {elapsed:.1f} s")


def test_3_lifetime_scaling(criterion):
    cfg = BASE.override("toggles", expansion=False, magnetic=False)
    taus = []
    for a in ANGLES_DEG:
        taus.append(run_experiment(cfg, theta_s=math.radians(a), freezing=False).efficiency_fit.tau_1e)
    slope = log_log_slope(ANGLES_DEG, taus)
    ratio = taus[0] / taus[-1]
    ok = abs(slope + 1.0) <= 0.05 and abs(ratio / 3.84 - 1.0) <= 0.10
    criterion(3, "tau inversely proportional to angle", ok,
              f"slope={slope:.4f}, tau(1.25)/tau(4.8)={ratio:.3f}, "
              f"taus_us={[round(t * 1e6, 1) for t in taus]}")


def test_4_perfect_freezing(criterion):
    cfg = (BASE.override("toggles", expansion=False, magnetic=False)
               .override("raman", transfer_efficiency=1.0, mode_matching=1.0))
    etas, residuals = [], []
    for a in ANGLES_DEG:
        seq, sol, geo = build_sequence(cfg, math.radians(a), True)
        residuals.append(sol.residual.norm() / seq.k_s.norm())
        etas.append(float(run_sequence(seq, [500e-6], settings_for(cfg, geo)).values[0]))

    species, cloud = SpeciesParams(), CloudParams()
    k_s = BeamGeometry.standard(math.radians(2.1)).k_spinwave(species.wavelength_write)
    ens = imprint_spinwave(sample_ensemble(10_000, cloud, species, seed=1), k_s)
    apply_kick(ens, KickEvent(0.0, -k_s))
    bit_exact = bool(np.all(ens.phases == 0.0))

    ok = min(etas) >= 0.99 and max(residuals) < 1e-10 and bit_exact
    criterion(4, "perfect freezing", ok,
              f"min eta(500us)={min(etas):.5f}, max residual={max(residuals):.1e}, "
              f"zero phases bit-exact={bit_exact}")


def test_5_expansion_plateau(criterion):
    start = time.perf_counter()
    res = run_experiment(BASE, theta_s=math.radians(2.1), freezing=True)
    elapsed = time.perf_counter() - start
    tau = res.efficiency_fit.tau_1e
    ok = 1.53e-3 <= tau <= 2.07e-3 and elapsed < 60.0
    criterion(5, "expansion-limited frozen lifetime", ok,
              f"tau={tau * 1e3:.3f}({res.efficiency_fit.tau_err * 1e3:.3f}) ms, {elapsed:.1f} s")


def test_6_clock_pair_immunity(criterion):
    theta = math.radians(1.25)
    tau0 = run_experiment(BASE, theta_s=theta, freezing=False).efficiency_fit.tau_1e
    # Gaussian rates add in quadrature: halving needs a magnetic 1/e time tau0/sqrt(3)
    sigma_z = BASE.cloud.sigma_r_mm[2] * 1e-3
    coeff = abs(BASE.level_scheme().differential_coefficient("s")) * 1e6  # Hz/G
    grad = math.sqrt(3.0) / (2 * math.pi * sigma_z * tau0) / coeff
    mag = BASE.override("toggles", magnetic=True).override("magnetic", gradient_g_per_m=[0.0, 0.0, grad])

    tau_half = run_experiment(mag, theta_s=theta, freezing=False).efficiency_fit.tau_1e
    frozen_plain = run_experiment(BASE, theta_s=theta, freezing=True).efficiency_fit
    frozen_mag = run_experiment(mag, theta_s=theta, freezing=True).efficiency_fit
    change = abs(frozen_mag.tau_1e - frozen_plain.tau_1e)
    halved = abs(tau_half / tau0 - 0.5) <= 0.05
    ok = halved and change < frozen_mag.tau_err
    criterion(6, "clock pair immune to gradient", ok,
              f"G={grad:.3f} G/m, unfrozen {tau0 * 1e6:.1f}->{tau_half * 1e6:.1f} us, "
              f"frozen change {change * 1e6:.2f} us vs fit error {frozen_mag.tau_err * 1e6:.2f} us")


@pytest.mark.parametrize("r", [0.1, 0.3])
def test_7_residual_momentum(criterion, r):
    cfg = BASE.override("toggles", expansion=False).override("raman", residual_fraction=r)
    theta = math.radians(2.1)
    res = run_experiment(cfg, theta_s=theta, freezing=True)
    species, cloud = cfg.species_params(), cfg.cloud_params()
    k_s = BeamGeometry.standard(theta).k_spinwave(species.wavelength_write).norm()
    want = 1.0 / (r * k_s * cloud.velocity_sigma(species))
    got = res.efficiency_fit.tau_1e
    criterion(7, f"residual momentum r={r}", abs(got / want - 1.0) <= 0.10,
              f"tau={got * 1e6:.1f} us vs 1/(r k_s v)={want * 1e6:.1f} us")


def test_8_raman_timing(criterion):
    t_pi = pi_pulse_duration(230e3)
    split = BASE.species.hyperfine_splitting_excited_mhz
    best, step = optimal_single_photon_detuning(split)
    ok = (abs(t_pi - 2.174e-6) <= 0.0005e-6 and 1.9e-6 <= t_pi <= 2.3e-6
          and abs(best + split / 2) <= step)
    criterion(8, "Raman timing and detuning", ok,
              f"t_pi={t_pi * 1e6:.4f} us, best detuning={best:.3f} MHz (-S/2={-split / 2:.3f}, step {step:.3f})")


def test_9_g2_calibration(criterion):
    theta = math.radians(2.1)
    unfrozen = run_experiment(BASE, theta_s=theta, freezing=False)
    frozen = run_experiment(BASE, theta_s=theta, freezing=True)
    g_un = unfrozen.g2_fit.initial_value()[0]
    g_fr = frozen.g2_fit.initial_value()[0]
    ok = g_un >= 30.0 and 20.0 <= g_fr <= 25.0
    criterion(9, "g2(0) calibration band", ok,
              f"unfrozen g2(0)={g_un:.2f}, frozen g2(0)={g_fr:.2f} "
              f"(raw t=0: {unfrozen.g2.values[0]:.2f} / {frozen.g2.values[0]:.2f})")


def test_10_determinism(criterion, tmp_path):
    cfg = BASE.override("simulation", n_atoms=4000, n_trials=8)
    for run in ("a", "b"):
        cmd_simulate(cfg.override("toggles", freezing=True), tmp_path / run / "sim")
        cmd_sweep(cfg, list(ANGLES_DEG), tmp_path / run / "sweep")
    # a threaded rerun must not change a byte either
    cmd_simulate(cfg.override("toggles", freezing=True).override("simulation", threads=4),
                 tmp_path / "c" / "sim")
    files = ["sim/efficiency.csv", "sim/g2.csv", "sweep/sweep.csv", "sweep/theory.csv"]
    same = all((tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes() for f in files)
    threaded = all((tmp_path / "a" / f).read_bytes() == (tmp_path / "c" / f).read_bytes()
                   for f in files[:2])
    criterion(10, "byte-identical reruns", same and threaded,
              f"{len(files)} CSV files identical={same}, threaded rerun identical={threaded}")
