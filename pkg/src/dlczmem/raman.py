"""
Two-photon Raman control of the stored spin wave.

Rabi frequencies and detunings are in cycles (Hz) unless a name says MHz.
The kick of a Raman pair is ``k_plus - k_minus``; a pi pulse on the
s <-> s' transition adds it to the spin-wave momentum, and the second
pi pulse removes it again.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import curve_fit

from .core import WaveVector3, _check_unit, unit
from .errors import DomainError, InfeasibleError
from .montecarlo import KickEvent


@dataclass(frozen=True)
class RamanPulse:
    rabi_frequency: float
    two_photon_detuning: float = 0.0
    duration: Optional[float] = None  # None: resonant pi pulse
    delta_k: WaveVector3 = field(default_factory=WaveVector3.zero)
    start_time: float = 0.0

    def __post_init__(self):
        if not self.rabi_frequency > 0:
            raise DomainError(f"rabi_frequency must be positive, got {self.rabi_frequency}")
        if self.duration is None:
            object.__setattr__(self, "duration", pi_pulse_duration(self.rabi_frequency))
        if not self.duration >= 0:
            raise DomainError(f"duration must be >= 0, got {self.duration}")

    @property
    def center(self) -> float:
        return self.start_time + self.duration / 2.0


@dataclass(frozen=True)
class RamanBeamPair:
    dir_plus: tuple
    dir_minus: tuple
    wavelength: float
    single_photon_detuning: float = -408.328  # MHz from F'=2

    def __post_init__(self):
        for name in ("dir_plus", "dir_minus"):
            object.__setattr__(self, name, tuple(float(c) for c in _check_unit(getattr(self, name))))
        if not self.wavelength > 0:
            raise DomainError("wavelength must be positive")
        if not math.isfinite(self.single_photon_detuning):
            raise DomainError("single_photon_detuning must be finite")

    @property
    def intersection_angle(self) -> float:
        a, b = np.array(self.dir_plus), np.array(self.dir_minus)
        return math.atan2(np.linalg.norm(np.cross(a, b)), float(a @ b))


def kick_vector(pair: RamanBeamPair) -> WaveVector3:
    k = 2.0 * math.pi / pair.wavelength
    return WaveVector3.from_array(k * (np.array(pair.dir_plus) - np.array(pair.dir_minus)))


@dataclass(frozen=True)
class FreezingConstraint:
    """Practical limits on where the Raman beams can go.

    ``plane_normal``: both beams must lie in the plane with this normal.
    ``intersection_angle``: beam crossing angle fixed to this value (rad).
    ``preferred``: among degenerate solutions pick the one whose beam
    bisector leans towards this direction.
    """

    plane_normal: Optional[tuple] = None
    intersection_angle: Optional[float] = None
    preferred: tuple = (0.0, 0.0, 1.0)


@dataclass(frozen=True)
class FreezingSolution:
    pair: RamanBeamPair
    kick: WaveVector3
    residual: WaveVector3  # k_s + kick

    @property
    def residual_fraction(self) -> float:
        """|k_s + k_pi| / |k_s|; zero for a zero spin-wave momentum."""
        ks = (self.residual - self.kick).norm()
        return 0.0 if ks == 0 else self.residual.norm() / ks


def _perpendicular(q: np.ndarray, preferred: np.ndarray, normal: Optional[np.ndarray]) -> np.ndarray:
    """Unit vector orthogonal to q (and to normal, if given), leaning to ``preferred``."""
    if normal is not None:
        c = np.cross(normal, q) if q.any() else preferred - (preferred @ normal) * normal
    else:
        c = preferred - (preferred @ q) / (q @ q) * q if q.any() else preferred
    if np.linalg.norm(c) < 1e-12:
        # preferred is parallel to q: any orthogonal axis will do
        base = q if q.any() else preferred
        c = np.cross(base, np.eye(3)[np.argmin(np.abs(base))])
        if normal is not None:
            c = c - (c @ normal) * normal
    c = unit(c)
    return c if c @ preferred >= 0 else -c


def solve_freezing_geometry(k_s: WaveVector3, wavelength_raman: float,
                            constraint: Optional[FreezingConstraint] = None,
                            single_photon_detuning: float = -408.328) -> FreezingSolution:
    """Raman beam directions whose kick cancels ``k_s`` as well as allowed.

    Without constraints the kick equals ``-k_s`` exactly (up to rounding).
    A constraint plane projects the target into the plane; a fixed
    intersection angle fixes |kick| and only its direction is chosen.
    The residual ``k_s + kick`` is always reported.
    """
    constraint = constraint or FreezingConstraint()
    if not wavelength_raman > 0:
        raise DomainError("wavelength_raman must be positive")
    K = 2.0 * math.pi / wavelength_raman
    ks = k_s.as_array()
    if ks @ ks > (2.0 * K) ** 2:
        raise InfeasibleError(f"|k_s| = {k_s.norm():.6g} exceeds the maximal Raman kick {2 * K:.6g}")

    normal = None if constraint.plane_normal is None else unit(constraint.plane_normal)
    preferred = unit(constraint.preferred)

    # target difference d_plus - d_minus in units of K
    q = -ks / K
    if normal is not None:
        q = q - (q @ normal) * normal
    if constraint.intersection_angle is not None:
        alpha = constraint.intersection_angle
        if not 0 <= alpha <= math.pi:
            raise DomainError("intersection angle must lie in [0, pi]")
        mag = 2.0 * math.sin(alpha / 2.0)
        qn = np.linalg.norm(q)
        if qn == 0:
            if mag != 0:
                direction = _perpendicular(preferred, preferred, normal)
                q = mag * direction
        else:
            q = q * (mag / qn)

    qn = np.linalg.norm(q)
    c = _perpendicular(q, preferred, normal) * math.sqrt(max(0.0, 1.0 - qn * qn / 4.0))
    d_plus = c + q / 2.0
    d_minus = c - q / 2.0
    # renormalise away rounding so the pair passes the unit-norm check
    d_plus, d_minus = d_plus / np.linalg.norm(d_plus), d_minus / np.linalg.norm(d_minus)
    pair = RamanBeamPair(tuple(d_plus), tuple(d_minus), wavelength_raman, single_photon_detuning)
    kick = kick_vector(pair)
    return FreezingSolution(pair=pair, kick=kick, residual=k_s + kick)


# ---------------------------------------------------------------------------
# pulse physics
# ---------------------------------------------------------------------------

def pi_pulse_duration(rabi_frequency: float) -> float:
    """Resonant pi-pulse length 1/(2 Omega) for a Rabi frequency in Hz."""
    if not rabi_frequency > 0:
        raise DomainError("rabi_frequency must be positive")
    return 1.0 / (2.0 * rabi_frequency)


def transfer_probability(pulse: RamanPulse, t: float) -> float:
    """Population moved s -> s' after driving for time t (detuned Rabi formula)."""
    if not 0 <= t <= pulse.duration * (1 + 1e-12):
        raise DomainError(f"t={t} outside the pulse [0, {pulse.duration}]")
    om2 = pulse.rabi_frequency ** 2
    gen2 = om2 + pulse.two_photon_detuning ** 2
    return om2 / gen2 * math.sin(math.pi * math.sqrt(gen2) * t) ** 2


def effective_rabi(omega_plus: float, omega_minus: float, detuning1: float,
                   detuning2: float, relative_sign: int = -1) -> float:
    """Two-photon Rabi frequency through two excited levels.

    Single-photon Rabi frequencies are in Hz, detunings in MHz.
    ``relative_sign`` is the sign of the second path's coupling product.
    """
    if detuning1 == 0 or detuning2 == 0:
        raise DomainError("single-photon detuning must be non-zero (resonant intermediate level)")
    if relative_sign not in (-1, 1):
        raise DomainError("relative_sign must be +1 or -1")
    d1, d2 = detuning1 * 1e6, detuning2 * 1e6
    return omega_plus * omega_minus / 2.0 * abs(1.0 / d1 + relative_sign / d2)


def coherence_to_scattering(detuning1, splitting: float, relative_sign: int = -1):
    """Two-photon coupling per unit off-resonant scattering, in MHz.

    Both paths scatter in proportion to 1/Delta^2 while the coherent
    coupling goes as |1/Delta1 + s/Delta2|. Within the excited-state
    splitting the ratio peaks half way between the two levels.
    """
    d1 = np.asarray(detuning1, dtype=float)
    d2 = d1 + splitting
    if np.any(d1 == 0) or np.any(d2 == 0):
        raise DomainError("detuning coincides with an excited level")
    return np.abs(1.0 / d1 + relative_sign / d2) / (1.0 / d1 ** 2 + 1.0 / d2 ** 2)


def optimal_single_photon_detuning(splitting: float, n_grid: int = 20001,
                                   relative_sign: int = -1):
    """Scan detuning between the two excited levels; return (best, grid step)."""
    edge = splitting / n_grid
    grid = np.linspace(-splitting + edge, -edge, n_grid)
    ratio = coherence_to_scattering(grid, splitting, relative_sign)
    return float(grid[np.argmax(ratio)]), float(grid[1] - grid[0])


def _rotation(rabi: float, detuning: float, t: float) -> np.ndarray:
    """Propagator of a driven two-level system in the rotating frame."""
    gen = math.hypot(rabi, detuning)
    if gen == 0:
        return np.eye(2, dtype=complex)
    theta = math.pi * gen * t
    c, s = math.cos(theta), math.sin(theta)
    nx, nz = rabi / gen, -detuning / gen
    # exp(-i theta (nx sx + nz sz))
    return np.array([[c - 1j * s * nz, -1j * s * nx],
                     [-1j * s * nx, c + 1j * s * nz]])


def ramsey_fringe(two_photon_detuning: float, gap: float, pulse: RamanPulse) -> float:
    """Population in s' after two pulses separated by ``gap``.

    ``pulse`` should be a pi/2 pulse (duration 1/(4 Omega)). Detuning
    acts during both the pulses and the free evolution.
    """
    if gap < 0:
        raise DomainError("gap must be >= 0")
    u_pulse = _rotation(pulse.rabi_frequency, two_photon_detuning, pulse.duration)
    u_free = _rotation(0.0, two_photon_detuning, gap)
    psi = u_pulse @ u_free @ u_pulse @ np.array([1.0, 0.0], dtype=complex)
    return float(abs(psi[1]) ** 2)


def half_pi_pulse(rabi_frequency: float) -> RamanPulse:
    return RamanPulse(rabi_frequency, 0.0, 1.0 / (4.0 * rabi_frequency))


def pulse_to_kicks(pulse: RamanPulse, direction: str):
    """Idealise a pi pulse as an instantaneous kick at its centre.

    Returns ``(KickEvent, amplitude_scale)``; the scale is the transfer
    probability of the pulse and multiplies the retrieval efficiency
    (untransferred atoms are lost from the spin wave).
    """
    if direction == "freeze":
        dk = pulse.delta_k
    elif direction == "unfreeze":
        dk = -pulse.delta_k
    else:
        raise DomainError(f"direction must be 'freeze' or 'unfreeze', got {direction!r}")
    scale = transfer_probability(pulse, pulse.duration)
    return KickEvent(pulse.center, dk, direction), scale


def fit_fringe_frequency(gaps, populations) -> float:
    """Frequency (Hz) of a Ramsey fringe sampled on a uniform gap grid.

    Starts from the FFT peak and refines with a cosine least-squares fit.
    """
    gaps = np.asarray(gaps, dtype=float)
    pops = np.asarray(populations, dtype=float)
    if gaps.size < 5:
        raise DomainError("need at least 5 fringe samples")
    step = gaps[1] - gaps[0]
    if not np.allclose(np.diff(gaps), step):
        raise DomainError("fringe must be sampled on a uniform grid")
    n_fft = 16 * gaps.size
    spectrum = np.abs(np.fft.rfft(pops - pops.mean(), n_fft))
    freqs = np.fft.rfftfreq(n_fft, step)
    f0 = float(freqs[np.argmax(spectrum)])

    def fringe(t, offset, amp, f, phase):
        return offset + amp * np.cos(2 * np.pi * f * t + phase)

    p, _ = curve_fit(fringe, gaps, pops, p0=[pops.mean(), np.ptp(pops) / 2, f0, 0.0])
    return abs(float(p[2]))
