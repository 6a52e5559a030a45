"""
Photon-counting observables of a DLCZ memory.

Leading-order emission model. Per write trial an excitation is created
with probability ``chi``; the write-out photon is detected with
``eta_wo``, the spin wave is retrieved with ``eta_retrieval0 * eta(t)``
and the read-out photon detected with ``eta_ro``. Backgrounds add to
each channel. The joint probability is the uncorrelated product of the
marginals plus the correlated pair term, which gives
``g2 = 1 + 1/chi`` without background and ``g2 -> 1`` once the retrieved
signal vanishes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .curves import DecayCurve
from .errors import DomainError

NONCLASSICAL_BOUND = 2.0


@dataclass(frozen=True)
class DetectionParams:
    """Excitation, detection and background probabilities per write trial.

    Defaults are a calibration point, not measured values: ``chi * eta_wo``
    reproduces a write-out probability of 0.38 %, and ``bg_ro`` puts the
    initial cross-correlation of an unmanipulated memory at 35.
    """

    chi: float = 0.01
    eta_wo: float = 0.38
    eta_ro: float = 0.3
    bg_wo: float = 0.0
    bg_ro: float = 2.91e-3
    eta_retrieval0: float = 0.5

    def __post_init__(self):
        for name in ("chi", "eta_wo", "eta_ro", "bg_wo", "bg_ro", "eta_retrieval0"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise DomainError(f"{name} = {value} outside [0, 1]")
        if self.chi > 0.1:
            warnings.warn(f"chi = {self.chi} is outside the low-excitation regime of the linear model",
                          stacklevel=2)


@dataclass(frozen=True)
class CorrelationPoint:
    time: float
    g2: float
    g2_err: float = 0.0


def g2_from_probs(p_wo: float, p_ro: float, p_joint: float) -> float:
    if not (p_wo > 0 and p_ro > 0):
        raise DomainError("marginal probabilities must be positive")
    if p_joint < 0:
        raise DomainError("joint probability must be non-negative")
    return p_joint / (p_wo * p_ro)


def is_nonclassical(g2: float) -> bool:
    return g2 > NONCLASSICAL_BOUND


def dlcz_probabilities(params: DetectionParams, eta_retrieval: float):
    """(p_wo, p_ro, p_joint) for a relative retrieval efficiency ``eta_retrieval``."""
    if not 0.0 <= eta_retrieval <= 1.0:
        raise DomainError(f"eta_retrieval = {eta_retrieval} outside [0, 1]")
    signal_wo = params.chi * params.eta_wo
    signal_ro = params.chi * params.eta_retrieval0 * eta_retrieval * params.eta_ro
    p_wo = signal_wo + params.bg_wo
    p_ro = signal_ro + params.bg_ro
    p_joint = p_wo * p_ro + params.eta_wo * params.eta_retrieval0 * eta_retrieval * params.eta_ro * params.chi
    return min(p_wo, 1.0), min(p_ro, 1.0), min(p_joint, 1.0)


def g2_of_efficiency(params: DetectionParams, eta_retrieval: float) -> float:
    return g2_from_probs(*dlcz_probabilities(params, eta_retrieval))


def _dg2_deta(params: DetectionParams, eta: float) -> float:
    # analytic derivative of 1 + A eta / ((chi eta_wo + bg_wo)(B eta + bg_ro))
    a = params.eta_wo * params.eta_retrieval0 * params.eta_ro * params.chi
    b = params.chi * params.eta_retrieval0 * params.eta_ro
    p_wo = params.chi * params.eta_wo + params.bg_wo
    return a * params.bg_ro / (p_wo * (b * eta + params.bg_ro) ** 2)


def g2_curve(envelope, params: DetectionParams, times=None):
    """g2 versus storage time for a normalised efficiency envelope.

    ``envelope`` is either a callable of time (needs ``times``) or a
    DecayCurve, whose sigmas are propagated to first order. Efficiencies
    are clipped to [0, 1] before use so Monte Carlo noise above 1 does
    not leave the model's domain.
    """
    if isinstance(envelope, DecayCurve):
        times, etas, sigmas = envelope.times, envelope.values, envelope.sigmas
    else:
        if times is None:
            raise DomainError("times are required for a callable envelope")
        times = np.asarray(times, dtype=float)
        etas = np.asarray(envelope(times), dtype=float)
        sigmas = np.zeros_like(etas)
    points = []
    for t, eta, sig in zip(times, etas, sigmas):
        eta_c = min(max(float(eta), 0.0), 1.0)
        g2 = g2_of_efficiency(params, eta_c)
        points.append(CorrelationPoint(float(t), g2, abs(_dg2_deta(params, eta_c)) * float(sig)))
    return points


def correlation_curve(points, label: str = "g2", meta=None) -> DecayCurve:
    return DecayCurve(times=np.array([p.time for p in points]),
                      values=np.array([p.g2 for p in points]),
                      sigmas=np.array([p.g2_err for p in points]),
                      label=label, meta=dict(meta or {}))


def visibility(g2):
    """Interference visibility of atom-photon entanglement estimated from g2."""
    g2 = np.asarray(g2, dtype=float)
    if np.any(g2 < 0):
        raise DomainError("g2 must be non-negative")
    v = (g2 - 1.0) / (g2 + 1.0)
    return float(v) if v.ndim == 0 else v


def fidelity(g2):
    """Entanglement fidelity (1 + 3V)/4 written directly in terms of g2."""
    g2 = np.asarray(g2, dtype=float)
    if np.any(g2 < 0):
        raise DomainError("g2 must be non-negative")
    f = (g2 - 0.5) / (g2 + 1.0)
    return float(f) if f.ndim == 0 else f


def poisson_g2_error(counts):
    """g2 and its 1-sigma error from raw counts ``(N_wo, N_ro, N_joint, N_trials)``.

    Independent Poisson errors propagated to first order. With no
    coincidences the error is that of a single count.
    """
    n_wo, n_ro, n_joint, n_trials = counts
    if min(n_wo, n_ro, n_joint) < 0:
        raise DomainError("counts must be non-negative")
    if n_trials <= 0:
        raise DomainError("N_trials must be positive")
    if n_wo == 0 or n_ro == 0:
        raise DomainError("g2 undefined without write-out and read-out counts")
    scale = n_trials / (n_wo * n_ro)
    g2 = n_joint * scale
    if n_joint == 0:
        return 0.0, scale
    rel = math.sqrt(1.0 / n_joint + 1.0 / n_wo + 1.0 / n_ro)
    return g2, g2 * rel
