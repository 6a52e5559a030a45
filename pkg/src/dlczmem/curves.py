"""Sampled decay curves passed between the simulator, fitter and serializers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class DecayCurve:
    """(time, value, sigma) samples of efficiency or g2 versus storage time.

    Times are in seconds and strictly increasing; sigma >= 0.
    """

    times: np.ndarray
    values: np.ndarray
    sigmas: np.ndarray
    label: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        y = np.asarray(self.values, dtype=float)
        s = np.zeros_like(t) if self.sigmas is None else np.asarray(self.sigmas, dtype=float)
        if not (t.ndim == 1 and t.shape == y.shape == s.shape):
            raise DomainError("times, values and sigmas must be 1-D arrays of equal length")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise DomainError("times must be strictly increasing")
        if np.any(s < 0) or not np.all(np.isfinite(s)):
            raise DomainError("sigmas must be finite and non-negative")
        for name, arr in (("times", t), ("values", y), ("sigmas", s)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self):
        return self.times.size

    @property
    def samples(self):
        return list(zip(self.times.tolist(), self.values.tolist(), self.sigmas.tolist()))
