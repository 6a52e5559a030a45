import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dlczmem.decay import (DecayEnvelope, composite_envelope, expansion_envelope,
                           expansion_lifetime, magnetic_envelope, magnetic_lifetime,
                           motional_envelope, motional_lifetime)
from dlczmem.errors import DomainError

SIGMA_V = 0.035266
K_S = 2.9514e5


def test_motional_lifetime_hand_value():
    # 1/(2.9514e5 * 0.035266) = 96.08 us
    assert motional_lifetime(K_S, SIGMA_V) == pytest.approx(96.08e-6, rel=1e-3)


def test_frozen_has_no_lifetime():
    assert motional_lifetime(0.0, SIGMA_V) is None
    assert np.all(motional_envelope([0.0, 1.0, 10.0], None) == 1.0)
    assert DecayEnvelope.motional(0.0, SIGMA_V).tau is None


@given(st.floats(1e3, 1e7), st.floats(1e-3, 1.0))
def test_envelope_at_tau_is_inverse_e(k, v):
    tau = motional_lifetime(k, v)
    assert motional_envelope(tau, tau) == pytest.approx(math.exp(-1.0), rel=1e-12)
    assert motional_envelope(0.0, tau) == 1.0


def test_expansion_lifetime():
    # w / (sqrt(2) sigma_v) with w = 90 um
    assert expansion_lifetime(90e-6, SIGMA_V) == pytest.approx(1.8046e-3, rel=1e-3)
    tau = expansion_lifetime(90e-6, SIGMA_V)
    assert expansion_envelope(tau, 90e-6, SIGMA_V) == pytest.approx(math.exp(-1))


def test_expansion_matches_exact_short_time():
    # exact mode-overlap result (1 + (s t / w)^2)^-2 agrees with the Gaussian to O(t^4)
    w, t = 90e-6, np.linspace(0, 2e-4, 5)
    exact = (1 + (SIGMA_V * t / w) ** 2) ** -2
    assert np.allclose(expansion_envelope(t, w, SIGMA_V), exact, atol=2e-4)


def test_magnetic_clock_is_flat():
    assert np.all(magnetic_envelope([0, 1e-3, 1.0], 5.0, 1e-3, "clock") == 1.0)
    tau = magnetic_lifetime(1.0, 1e-3)  # 1 MHz/m over 1 mm: 1/(2 pi 1e3) s
    assert tau == pytest.approx(1 / (2 * math.pi * 1e3))
    assert magnetic_envelope(tau, 1.0, 1e-3) == pytest.approx(math.exp(-1))
    assert magnetic_lifetime(0.0, 1e-3) is None
    with pytest.raises(DomainError):
        magnetic_envelope(0.0, 1.0, 1e-3, "other")


def test_composite_product_and_tau():
    a = DecayEnvelope.motional(K_S, SIGMA_V)
    b = DecayEnvelope.expansion(90e-6, SIGMA_V)
    c = composite_envelope([a, b])
    t = np.linspace(0, 3e-4, 7)
    assert np.allclose(c(t), a(t) * b(t))
    assert c(c.tau) == pytest.approx(math.exp(-1), rel=1e-12)
    assert composite_envelope([a]) is a
    with pytest.raises(DomainError):
        composite_envelope([])


@given(st.lists(st.floats(1e-6, 1e-2), min_size=1, max_size=5), st.floats(0, 1e-2))
def test_envelope_monotone_and_bounded(taus, t):
    env = composite_envelope([DecayEnvelope("motional_gaussian", {"tau": x}) for x in taus])
    v = float(env(t))
    assert 0.0 <= v <= 1.0
    assert float(env(t * 1.1 + 1e-9)) <= v
