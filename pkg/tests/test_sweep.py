import math

import pytest

from dlczmem.core import spinwave_magnitude_small_angle, thermal_speed, SpeciesParams
from dlczmem.errors import DomainError
from dlczmem.experiment import build_sequence, predicted_envelope, run_experiment
from dlczmem.sweep import angle_sweep, theory_overlay


def test_theory_overlay_values():
    angles = [math.radians(a) for a in (1.25, 2.1)]
    rms = theory_overlay(angles, "rms_1d")
    sp = SpeciesParams()
    v = thermal_speed(13e-6, sp.mass)
    want = 1 / (spinwave_magnitude_small_angle(angles[1], sp.wavelength_write) * v)
    assert rms["tau_s"][1] == pytest.approx(want)
    mean2d = theory_overlay(angles, "mean_2d")
    assert rms["tau_s"][0] / mean2d["tau_s"][0] == pytest.approx(math.sqrt(math.pi / 2))
    with pytest.raises(DomainError):
        theory_overlay([0.0])


def test_sweep_rows_sorted_and_validated(fast_config):
    rows = angle_sweep([math.radians(3.0), math.radians(1.25)], False, fast_config)
    assert [r.theta_s for r in rows] == sorted(r.theta_s for r in rows)
    assert rows[0].tau_1e > rows[1].tau_1e
    with pytest.raises(DomainError):
        angle_sweep([math.radians(12.0)], False, fast_config)


def test_frozen_row_reports_residual(fast_config):
    rows = angle_sweep([math.radians(2.1)], True, fast_config)
    assert rows[0].freezing and not rows[0].fallback
    assert rows[0].residual_fraction < 1e-10


def test_predicted_envelope_frozen_is_expansion(fast_config):
    seq, _, _ = build_sequence(fast_config, math.radians(2.1), True)
    assert predicted_envelope(fast_config, seq).tau == pytest.approx(1.8046e-3, rel=1e-3)


def test_run_experiment_pipeline(fast_config):
    res = run_experiment(fast_config)
    assert len(res.efficiency) == 6 and len(res.g2) == 6
    assert res.efficiency_fit.identifiable
    assert res.g2.values[0] > res.g2.values[-1]
