import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dlczmem.core import BeamGeometry, WaveVector3
from dlczmem.errors import DomainError, InfeasibleError
from dlczmem.raman import (FreezingConstraint, RamanPulse, coherence_to_scattering,
                           effective_rabi, fit_fringe_frequency, half_pi_pulse,
                           optimal_single_photon_detuning, pi_pulse_duration, pulse_to_kicks,
                           ramsey_fringe, solve_freezing_geometry, transfer_probability)

LW, LR = 780.241e-9, 794.979e-9
SPLIT = 816.656


def _k_s(theta_deg):
    return BeamGeometry.standard(math.radians(theta_deg)).k_spinwave(LW)


def test_pi_pulse_duration():
    assert pi_pulse_duration(230e3) == pytest.approx(2.1739e-6, rel=1e-4)
    with pytest.raises(DomainError):
        pi_pulse_duration(0.0)


def test_resonant_pi_pulse_transfers_everything():
    pulse = RamanPulse(230e3)
    assert transfer_probability(pulse, pulse.duration) == pytest.approx(1.0, abs=1e-15)
    assert transfer_probability(pulse, 0.0) == 0.0


@given(st.floats(1e3, 1e6), st.floats(-1e6, 1e6), st.floats(0, 1))
def test_transfer_bounded_by_lorentzian(rabi, delta, frac):
    pulse = RamanPulse(rabi, delta, 3.0 / rabi)
    p = transfer_probability(pulse, frac * pulse.duration)
    assert 0.0 <= p <= rabi ** 2 / (rabi ** 2 + delta ** 2) + 1e-12


@given(st.floats(1e3, 1e6), st.floats(0.0, 0.5))
def test_transfer_periodic_on_resonance(rabi, frac):
    # period 1/Omega in time
    pulse = RamanPulse(rabi, 0.0, 2.0 / rabi)
    t = frac / rabi
    assert transfer_probability(pulse, t) == pytest.approx(
        transfer_probability(pulse, t + 1.0 / rabi), abs=1e-9)


@pytest.mark.parametrize("theta", [1.25, 2.1, 3.0, 4.8, 10.0])
def test_unconstrained_solution_cancels_k_s(theta):
    k_s = _k_s(theta)
    sol = solve_freezing_geometry(k_s, LR)
    assert sol.residual.norm() < 1e-10 * k_s.norm()
    assert sol.residual_fraction < 1e-10


def test_plane_constraint_keeps_beams_in_plane():
    sol = solve_freezing_geometry(_k_s(2.1), LR, FreezingConstraint(plane_normal=(0, 1, 0)))
    assert abs(sol.pair.dir_plus[1]) < 1e-12 and abs(sol.pair.dir_minus[1]) < 1e-12
    # k_s lies in the x-z plane, so the projection loses nothing
    assert sol.residual_fraction < 1e-10


def test_out_of_plane_target_leaves_residual():
    k_s = WaveVector3(0.0, 2.0e5, 0.0)
    sol = solve_freezing_geometry(k_s, LR, FreezingConstraint(plane_normal=(0, 1, 0)))
    assert sol.residual_fraction == pytest.approx(1.0)


def test_locked_angle_sets_kick_magnitude():
    alpha = math.radians(5.0)
    sol = solve_freezing_geometry(_k_s(2.1), LR, FreezingConstraint(intersection_angle=alpha))
    K = 2 * math.pi / LR
    assert sol.kick.norm() == pytest.approx(2 * K * math.sin(alpha / 2), rel=1e-9)
    assert sol.pair.intersection_angle == pytest.approx(alpha, rel=1e-9)


def test_infeasible_kick():
    K = 2 * math.pi / LR
    with pytest.raises(InfeasibleError):
        solve_freezing_geometry(WaveVector3(0, 0, 2.01 * K), LR)


def test_solution_matches_writeout_and_write_beams():
    # exact freezing is k+ along write-out and k- along write (scaled by lambda)
    theta = math.radians(2.1)
    sol = solve_freezing_geometry(_k_s(2.1), LR)
    assert np.allclose(sol.pair.dir_plus, (math.sin(theta), 0, math.cos(theta)), atol=1e-3)


def test_optimal_detuning_is_half_splitting():
    best, step = optimal_single_photon_detuning(SPLIT)
    assert abs(best + SPLIT / 2) <= step
    grid = np.linspace(-SPLIT + 1, -1, 2001)
    ratio = coherence_to_scattering(grid, SPLIT)
    assert np.all(ratio <= coherence_to_scattering(-SPLIT / 2, SPLIT) + 1e-15)


def test_effective_rabi_two_paths():
    # constructive in the middle of the splitting with relative sign -1
    one_path = effective_rabi(1e6, 1e6, -400.0, 1e12)
    assert one_path == pytest.approx(1e12 / 2 / 400e6, rel=1e-6)
    with pytest.raises(DomainError):
        effective_rabi(1e6, 1e6, 0.0, 100.0)


def test_ramsey_fringe_endpoints():
    pulse = half_pi_pulse(230e3)
    assert ramsey_fringe(0.0, 500e-6, pulse) == pytest.approx(1.0, abs=1e-12)
    # half a cycle of free precession puts the population back (pulses nearly ideal)
    assert ramsey_fringe(1e3, 0.5e-3, pulse) < 1e-4


def test_fringe_frequency_recovered():
    pulse = half_pi_pulse(230e3)
    gaps = np.linspace(0, 4e-3, 161)
    pops = [ramsey_fringe(1234.0, g, pulse) for g in gaps]
    assert fit_fringe_frequency(gaps, pops) == pytest.approx(1234.0, rel=1e-4)


def test_pulse_to_kicks():
    pulse = RamanPulse(230e3, delta_k=WaveVector3(1.0, 0, 0), start_time=1e-6)
    ev, scale = pulse_to_kicks(pulse, "unfreeze")
    assert ev.time == pytest.approx(1e-6 + pulse.duration / 2)
    assert ev.delta_k == WaveVector3(-1.0, 0, 0)
    assert scale == pytest.approx(1.0)
    with pytest.raises(DomainError):
        pulse_to_kicks(pulse, "sideways")
