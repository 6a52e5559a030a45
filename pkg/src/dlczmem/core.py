"""
Physical constants, species data, geometry and wave-vector algebra.

Everything here is immutable after construction so it can be shared
read-only between Monte Carlo workers.

Units are SI unless a field name says otherwise (``*_mhz`` etc.).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import DomainError, GeometryError

UNIT_TOL = 1e-12
ANGLE_TOL = 1e-9


@dataclass(frozen=True)
class PhysicalConstants:
    k_B: float = 1.380649e-23  # J/K
    h: float = 6.62607015e-34  # J s
    mu_B_over_h: float = 1.39962449  # MHz/G
    amu: float = 1.66053906660e-27  # kg


CONSTANTS = PhysicalConstants()


# ---------------------------------------------------------------------------
# wave vectors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WaveVector3:
    """Three-component wave vector in rad/m.

    Supports componentwise addition, subtraction, negation and scaling,
    so phase-matching sums read like the physics (``k_w - k_wo``).
    """

    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise DomainError(f"wave vector component {name} is not finite: {value}")
            object.__setattr__(self, name, value)

    @classmethod
    def zero(cls) -> "WaveVector3":
        return cls(0.0, 0.0, 0.0)

    @classmethod
    def from_array(cls, a) -> "WaveVector3":
        a = np.asarray(a, dtype=float)
        if a.shape != (3,):
            raise DomainError(f"expected 3 components, got shape {a.shape}")
        return cls(a[0], a[1], a[2])

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def dot(self, other: "WaveVector3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def __add__(self, other: "WaveVector3") -> "WaveVector3":
        return WaveVector3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "WaveVector3") -> "WaveVector3":
        return WaveVector3(self.x - other.x, self.y - other.y, self.z - other.z)

    def __neg__(self) -> "WaveVector3":
        return WaveVector3(-self.x, -self.y, -self.z)

    def __mul__(self, scale: float) -> "WaveVector3":
        return WaveVector3(self.x * scale, self.y * scale, self.z * scale)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return self.x == 0.0 and self.y == 0.0 and self.z == 0.0


def unit(v) -> np.ndarray:
    """Normalise a 3-vector; raises GeometryError on a zero vector."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if v.shape != (3,) or n == 0.0 or not np.isfinite(n):
        raise GeometryError(f"cannot normalise direction {v!r}")
    return v / n


def _check_unit(direction) -> np.ndarray:
    d = np.asarray(direction, dtype=float)
    if d.shape != (3,):
        raise GeometryError(f"direction must have 3 components, got shape {d.shape}")
    if abs(np.linalg.norm(d) - 1.0) > UNIT_TOL:
        raise GeometryError(f"direction {d.tolist()} is not unit norm (|d| = {np.linalg.norm(d)!r})")
    return d


def wavevector_from_beam(direction, wavelength: float) -> WaveVector3:
    """Wave vector of a plane wave travelling along ``direction``."""
    d = _check_unit(direction)
    if not wavelength > 0:
        raise DomainError(f"wavelength must be positive, got {wavelength}")
    return WaveVector3.from_array(d * (2.0 * math.pi / wavelength))


def spinwave_wavevector(k_w: WaveVector3, k_wo: WaveVector3) -> WaveVector3:
    """Spin-wave momentum left in the ensemble: write minus write-out."""
    return k_w - k_wo


def spinwave_magnitude_small_angle(theta_s: float, wavelength: float) -> float:
    """|k_s| for equal-magnitude write and write-out beams separated by ``theta_s``."""
    if not 0.0 <= theta_s < math.pi / 4:
        raise DomainError(f"theta_s must lie in [0, pi/4), got {theta_s}")
    if not wavelength > 0:
        raise DomainError(f"wavelength must be positive, got {wavelength}")
    return 2.0 * (2.0 * math.pi / wavelength) * math.sin(theta_s / 2.0)


SPEED_CONVENTIONS = ("rms_1d", "mean_2d")


def thermal_speed(T: float, mass: float, convention: str = "rms_1d") -> float:
    """Characteristic thermal speed of a gas at temperature ``T``.

    ``rms_1d`` is the per-axis standard deviation sqrt(k_B T / m).
    ``mean_2d`` is sqrt(pi k_B T / 2 m), the mean magnitude of a
    two-component Gaussian velocity; it is larger by sqrt(pi/2).
    """
    if not T > 0:
        raise DomainError(f"temperature must be positive, got {T}")
    if not mass > 0:
        raise DomainError(f"mass must be positive, got {mass}")
    rms = math.sqrt(CONSTANTS.k_B * T / mass)
    if convention == "rms_1d":
        return rms
    if convention == "mean_2d":
        return math.sqrt(math.pi / 2.0) * rms
    raise DomainError(f"unknown speed convention {convention!r}; expected one of {SPEED_CONVENTIONS}")


# ---------------------------------------------------------------------------
# species and levels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpeciesParams:
    """Atomic species data. Defaults describe rubidium-87."""

    mass: float = 86.909180527 * CONSTANTS.amu
    wavelength_write: float = 780.241e-9  # D2
    wavelength_raman: float = 794.979e-9  # D1
    hyperfine_splitting_excited: float = 816.656  # D1 F'=1 to F'=2, MHz

    def __post_init__(self):
        if not self.mass > 0:
            raise DomainError(f"mass must be positive, got {self.mass}")
        for name in ("wavelength_write", "wavelength_raman"):
            lam = getattr(self, name)
            if not 100e-9 < lam < 10e-6:
                raise DomainError(f"{name} = {lam} m outside (100 nm, 10 um)")
        if not self.hyperfine_splitting_excited > 0:
            raise DomainError("hyperfine_splitting_excited must be positive")


State = tuple  # (F, m_F)


@dataclass(frozen=True)
class LevelScheme:
    """Named ground states used by the memory and their Lande g_F factors."""

    g: State = (1, -1)
    s: State = (2, -1)
    s_prime: State = (2, 1)
    e: State = (2, 0)  # excited F'=2; only its label matters here
    g_factors: Mapping[int, float] = field(default_factory=lambda: {1: -0.5, 2: 0.5})

    def __post_init__(self):
        for name in ("g", "s", "s_prime"):
            F, mF = getattr(self, name)
            if F not in self.g_factors:
                raise DomainError(f"state {name}={getattr(self, name)} has no g-factor")
            if abs(mF) > F:
                raise DomainError(f"|m_F| > F for state {name}")
        if tuple(self.s) == tuple(self.s_prime):
            raise DomainError("s and s' must differ")

    def state(self, label: str) -> State:
        try:
            return {"g": self.g, "s": self.s, "s_prime": self.s_prime}[label]
        except KeyError:
            raise DomainError(f"unknown state label {label!r}") from None

    def differential_coefficient(self, upper: str, lower: str = "g") -> float:
        """Differential first-order Zeeman shift per gauss (MHz/G) of ``upper`` relative to ``lower``."""
        return (zeeman_shift_first_order(self.state(upper), self.g_factors, 1.0)
                - zeeman_shift_first_order(self.state(lower), self.g_factors, 1.0))

    def is_clock_pair(self, a: str, b: str) -> bool:
        sa, sb = self.state(a), self.state(b)
        return self.g_factors[sa[0]] * sa[1] == self.g_factors[sb[0]] * sb[1]


def zeeman_shift_first_order(state: State, g_factors: Mapping[int, float], B: float) -> float:
    """Linear Zeeman shift g_F m_F (mu_B/h) B in MHz for a field B in gauss."""
    F, mF = state
    if F not in g_factors:
        raise DomainError(f"no g-factor for F={F}")
    if abs(mF) > F:
        raise DomainError(f"invalid state (F={F}, m_F={mF})")
    if not math.isfinite(B):
        raise DomainError(f"field must be finite, got {B}")
    return g_factors[F] * mF * CONSTANTS.mu_B_over_h * B


# ---------------------------------------------------------------------------
# cloud and beams
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CloudParams:
    temperature: float = 13e-6
    sigma_r: tuple = (1e-3, 1e-3, 1e-3)
    atom_count_model: float = 1e8

    def __post_init__(self):
        if not self.temperature > 0:
            raise DomainError(f"temperature must be positive, got {self.temperature}")
        sig = tuple(float(s) for s in self.sigma_r)
        if len(sig) != 3 or not all(s > 0 for s in sig):
            raise DomainError(f"sigma_r must be three positive lengths, got {self.sigma_r}")
        object.__setattr__(self, "sigma_r", sig)
        if not self.atom_count_model >= 2:
            raise DomainError("atom_count_model must be at least 2")

    def velocity_sigma(self, species: SpeciesParams) -> float:
        return thermal_speed(self.temperature, species.mass, "rms_1d")


def _angle_between(a: np.ndarray, b: np.ndarray) -> float:
    # atan2 form keeps precision at small angles
    return math.atan2(np.linalg.norm(np.cross(a, b)), float(np.dot(a, b)))


@dataclass(frozen=True)
class BeamGeometry:
    """Beam directions of the memory.

    Write beam along +z; write-out detected at ``theta_s`` in the x-z
    plane; read and read-out counter-propagate to write and write-out.
    The Raman directions are filled in by the freezing solver.
    """

    dir_write: tuple
    dir_writeout: tuple
    dir_read: tuple
    dir_readout: tuple
    dir_raman_plus: tuple
    dir_raman_minus: tuple
    theta_s: float
    mode_waist_writeout: float = 90e-6
    mode_waist_control: float = 200e-6

    def __post_init__(self):
        for name in ("dir_write", "dir_writeout", "dir_read", "dir_readout",
                     "dir_raman_plus", "dir_raman_minus"):
            d = _check_unit(getattr(self, name))
            object.__setattr__(self, name, tuple(float(c) for c in d))
        angle = _angle_between(np.array(self.dir_write), np.array(self.dir_writeout))
        if abs(angle - self.theta_s) > ANGLE_TOL:
            raise GeometryError(f"theta_s={self.theta_s} disagrees with beam angle {angle}")
        if not (self.mode_waist_writeout > 0 and self.mode_waist_control > 0):
            raise DomainError("waists must be positive")

    @classmethod
    def standard(cls, theta_s: float, mode_waist_writeout: float = 90e-6,
                 mode_waist_control: float = 200e-6) -> "BeamGeometry":
        if not 0.0 <= theta_s < math.pi / 4:
            raise GeometryError(f"theta_s must lie in [0, pi/4), got {theta_s}")
        w = (0.0, 0.0, 1.0)
        wo = (math.sin(theta_s), 0.0, math.cos(theta_s))
        return cls(dir_write=w, dir_writeout=wo,
                   dir_read=(0.0, 0.0, -1.0), dir_readout=(-wo[0], 0.0, -wo[2]),
                   dir_raman_plus=w, dir_raman_minus=w, theta_s=theta_s,
                   mode_waist_writeout=mode_waist_writeout,
                   mode_waist_control=mode_waist_control)

    def k_spinwave(self, wavelength: float) -> WaveVector3:
        return spinwave_wavevector(wavevector_from_beam(self.dir_write, wavelength),
                                   wavevector_from_beam(self.dir_writeout, wavelength))
