"""Closed-form retrieval-efficiency envelopes and lifetime formulas.

All envelopes describe the *efficiency* (squared collective amplitude),
normalised to 1 at t = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError

KINDS = ("motional_gaussian", "expansion", "magnetic_gradient", "composite")


def motional_lifetime(k_s_mag: float, v: float) -> Optional[float]:
    """1/e lifetime 1/(|k_s| v) of a moving spin wave.

    Returns None for a spin wave with zero momentum: motional
    dephasing is frozen and there is no finite lifetime.
    """
    if not v > 0:
        raise DomainError(f"speed must be positive, got {v}")
    if k_s_mag < 0:
        raise DomainError(f"|k_s| must be non-negative, got {k_s_mag}")
    if k_s_mag == 0:
        return None
    return 1.0 / (k_s_mag * v)


def motional_envelope(t, tau: Optional[float]):
    """exp(-t^2/tau^2); flat when ``tau`` is None (frozen)."""
    t = np.asarray(t, dtype=float)
    if tau is None or math.isinf(tau):
        return np.ones_like(t)
    if not tau > 0:
        raise DomainError(f"tau must be positive, got {tau}")
    return np.exp(-(t / tau) ** 2)


def expansion_lifetime(waist: float, sigma_v: float) -> float:
    if not (waist > 0 and sigma_v > 0):
        raise DomainError("waist and sigma_v must be positive")
    return waist / (math.sqrt(2.0) * sigma_v)


def expansion_envelope(t, waist: float, sigma_v: float):
    """Loss of overlap with a Gaussian detection mode as atoms drift out of it."""
    return np.exp(-(np.asarray(t, dtype=float) / expansion_lifetime(waist, sigma_v)) ** 2)


def magnetic_lifetime(differential_shift_gradient: float, cloud_sigma: float) -> Optional[float]:
    """1/e time of the non-clock magnetic envelope; None when it never decays.

    ``differential_shift_gradient`` is in MHz/m.
    """
    if differential_shift_gradient < 0 or cloud_sigma < 0:
        raise DomainError("gradient and cloud_sigma must be non-negative")
    rate = 2.0 * math.pi * differential_shift_gradient * 1e6 * cloud_sigma
    return None if rate == 0 else 1.0 / rate


def magnetic_envelope(t, differential_shift_gradient: float, cloud_sigma: float,
                      pair: str = "non_clock"):
    """Dephasing from a linear field gradient across a stationary Gaussian cloud.

    A clock pair has no first-order differential shift and stays at 1.
    Otherwise the efficiency is exp(-(2 pi G sigma t)^2), G in Hz/m
    (the argument is given in MHz/m).
    """
    t = np.asarray(t, dtype=float)
    if pair == "clock":
        return np.ones_like(t)
    if pair != "non_clock":
        raise DomainError(f"pair must be 'clock' or 'non_clock', got {pair!r}")
    tau = magnetic_lifetime(differential_shift_gradient, cloud_sigma)
    return motional_envelope(t, tau)


@dataclass(frozen=True)
class DecayEnvelope:
    """A callable efficiency envelope of one kind (or a product of several).

    ``params`` holds kind-specific values; every pure kind is a Gaussian
    with 1/e time ``params['tau']`` (None means flat).
    """

    kind: str
    params: dict = field(default_factory=dict)
    members: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown envelope kind {self.kind!r}")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "composite":
            out = np.ones_like(t)
            for m in self.members:
                out = out * m(t)
            return out
        return motional_envelope(t, self.params.get("tau"))

    @property
    def tau(self) -> Optional[float]:
        """1/e lifetime. Exact for Gaussian members, which is all we build."""
        if self.kind != "composite":
            return self.params.get("tau")
        inv2 = 0.0
        for m in self.members:
            tau = m.tau
            if tau is not None:
                inv2 += tau ** -2
        return None if inv2 == 0 else inv2 ** -0.5

    @classmethod
    def motional(cls, k_s_mag: float, v: float) -> "DecayEnvelope":
        return cls("motional_gaussian", {"tau": motional_lifetime(k_s_mag, v),
                                         "k_s": k_s_mag, "v": v})

    @classmethod
    def expansion(cls, waist: float, sigma_v: float) -> "DecayEnvelope":
        return cls("expansion", {"tau": expansion_lifetime(waist, sigma_v),
                                 "waist": waist, "sigma_v": sigma_v})

    @classmethod
    def magnetic(cls, gradient: float, cloud_sigma: float, pair: str = "non_clock") -> "DecayEnvelope":
        tau = None if pair == "clock" else magnetic_lifetime(gradient, cloud_sigma)
        return cls("magnetic_gradient", {"tau": tau, "gradient": gradient,
                                         "cloud_sigma": cloud_sigma, "pair": pair})


def composite_envelope(envelopes) -> DecayEnvelope:
    envelopes = tuple(envelopes)
    if not envelopes:
        raise DomainError("composite envelope needs at least one member")
    if len(envelopes) == 1:
        return envelopes[0]
    return DecayEnvelope("composite", {}, envelopes)
