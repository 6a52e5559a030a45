"""
Monte Carlo model of a stored spin wave in a thermal atomic cloud.

Each atom carries a phase ledger. Writing imprints ``k_s . r_j(0)``,
every Raman kick adds ``dk . r_j(t_kick)`` at the atom's position at the
kick time, and retrieval is phase matched to the net wave vector
``k_net``, i.e. it subtracts ``k_net . r_j(t)``. What is left is the
motional phase, and the collective retrieval efficiency is the squared
modulus of the weighted phasor sum.

With a detection mode, each atom contributes with the product of the
mode amplitude at its creation position and at its retrieval position,
``exp(-rho(0)^2/w^2) exp(-rho(t)^2/w^2)``; atoms that drift out of the
mode stop contributing.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import CloudParams, LevelScheme, SpeciesParams, WaveVector3, unit
from .curves import DecayCurve
from .errors import DomainError, SequenceError

GRAVITY = np.array([0.0, -9.80665, 0.0])
THREADS_ENV = "DLCZMEM_THREADS"


def default_workers() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise DomainError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


@dataclass(frozen=True)
class KickEvent:
    time: float
    delta_k: WaveVector3
    label: str = ""

    def __post_init__(self):
        if not self.time >= 0:
            raise SequenceError(f"kick time must be >= 0, got {self.time}")


@dataclass
class AtomEnsemble:
    positions0: np.ndarray
    velocities: np.ndarray
    phases: np.ndarray
    mode_weights: np.ndarray
    rng_seed: int
    acceleration: np.ndarray = field(default_factory=lambda: np.zeros(3))
    k_net: WaveVector3 = field(default_factory=WaveVector3.zero)
    last_time: float = 0.0

    def __len__(self):
        return self.phases.size

    def positions_at(self, t: float) -> np.ndarray:
        r = self.positions0 + self.velocities * t
        if np.any(self.acceleration):
            r = r + 0.5 * self.acceleration * t * t
        return r


@dataclass(frozen=True)
class EfficiencySample:
    time: float
    efficiency: float
    std_error: float


def _dot(r: np.ndarray, k: WaveVector3) -> np.ndarray:
    # explicit elementwise form: identical rounding for k and -k, no BLAS reordering
    return r[:, 0] * k.x + r[:, 1] * k.y + r[:, 2] * k.z


def sample_ensemble(n: int, cloud: CloudParams, species: SpeciesParams, seed: int,
                    gravity: bool = False) -> AtomEnsemble:
    """Draw ``n`` atoms from a Gaussian cloud with Maxwell-Boltzmann velocities."""
    if n < 2:
        raise DomainError(f"need at least 2 atoms, got {n}")
    rng = np.random.default_rng(seed)
    positions = rng.standard_normal((n, 3)) * np.asarray(cloud.sigma_r)
    velocities = rng.standard_normal((n, 3)) * cloud.velocity_sigma(species)
    return AtomEnsemble(
        positions0=positions,
        velocities=velocities,
        phases=np.zeros(n),
        mode_weights=np.ones(n),
        rng_seed=int(seed),
        acceleration=GRAVITY.copy() if gravity else np.zeros(3),
    )


def imprint_spinwave(ensemble: AtomEnsemble, k_s: WaveVector3) -> AtomEnsemble:
    ensemble.phases += _dot(ensemble.positions0, k_s)
    ensemble.k_net = ensemble.k_net + k_s
    return ensemble


def apply_kick(ensemble: AtomEnsemble, event: KickEvent) -> AtomEnsemble:
    if event.time < ensemble.last_time:
        raise SequenceError(f"kick '{event.label}' at t={event.time} precedes previous event "
                            f"at t={ensemble.last_time}")
    ensemble.phases += _dot(ensemble.positions_at(event.time), event.delta_k)
    ensemble.k_net = ensemble.k_net + event.delta_k
    ensemble.last_time = event.time
    return ensemble


def mode_amplitude(r: np.ndarray, waist: float, axis) -> np.ndarray:
    """Gaussian field amplitude exp(-rho^2/w^2) of a mode through the origin."""
    a = unit(axis)
    along = r @ a
    rho2 = np.einsum("ij,ij->i", r, r) - along * along
    return np.exp(-np.maximum(rho2, 0.0) / (waist * waist))


def magnetic_phase(ensemble: AtomEnsemble, segments) -> np.ndarray:
    """Phase from a linear differential-shift gradient along ballistic paths.

    ``segments`` is an iterable of ``(t0, t1, grad)`` where ``grad`` is the
    differential frequency gradient (Hz/m, 3-vector) felt while the
    coherence sits in a given state pair between t0 and t1.
    """
    phase = np.zeros(len(ensemble))
    r0, v, a = ensemble.positions0, ensemble.velocities, ensemble.acceleration
    for t0, t1, grad in segments:
        g = np.asarray(grad, dtype=float)
        if t1 <= t0 or not np.any(g):
            continue
        integral = (r0 * (t1 - t0) + v * (t1 ** 2 - t0 ** 2) / 2.0
                    + a * (t1 ** 3 - t0 ** 3) / 6.0)
        phase += 2.0 * math.pi * (integral @ g)
    return phase


def _single_efficiency(ensemble: AtomEnsemble, t: float, mode_waist: Optional[float],
                       extra_phase: Optional[np.ndarray], mode_axis) -> float:
    if t < ensemble.last_time:
        raise SequenceError(f"probe at t={t} precedes last event at t={ensemble.last_time}")
    r_t = ensemble.positions_at(t)
    phi = ensemble.phases - _dot(r_t, ensemble.k_net)
    if extra_phase is not None:
        phi = phi + extra_phase
    if mode_waist is None:
        w_t = ensemble.mode_weights
        norm = ensemble.mode_weights.sum()
    else:
        u0 = mode_amplitude(ensemble.positions0, mode_waist, mode_axis)
        w_t = ensemble.mode_weights * u0 * mode_amplitude(r_t, mode_waist, mode_axis)
        norm = (ensemble.mode_weights * u0 * u0).sum()
    if norm <= 0:
        return 0.0
    re = np.sum(w_t * np.cos(phi))
    im = np.sum(w_t * np.sin(phi))
    return float((re * re + im * im) / (norm * norm))


def retrieval_efficiency(ensembles, t: float, mode_waist: Optional[float] = None,
                         state_pair_magnetic_phase=None,
                         mode_axis=(0.0, 0.0, 1.0)) -> EfficiencySample:
    """Relative retrieval efficiency at probe time ``t``.

    ``ensembles`` is one AtomEnsemble or a sequence of independent trials;
    the standard error is the trial-to-trial spread (zero for one trial).
    ``state_pair_magnetic_phase`` is None, a per-atom phase array (single
    ensemble) or a callable mapping an ensemble to that array.
    """
    if isinstance(ensembles, AtomEnsemble):
        ensembles = [ensembles]
    values = []
    for ens in ensembles:
        extra = state_pair_magnetic_phase
        if callable(extra):
            extra = extra(ens)
        values.append(_single_efficiency(ens, t, mode_waist, extra, mode_axis))
    return _aggregate(t, np.array(values))


def _aggregate(t: float, values: np.ndarray, scale: float = 1.0) -> EfficiencySample:
    mean = float(values.mean()) * scale
    if values.size > 1:
        se = float(values.std(ddof=1) / math.sqrt(values.size)) * scale
    else:
        se = 0.0
    return EfficiencySample(time=t, efficiency=mean, std_error=se)


# ---------------------------------------------------------------------------
# sequences
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PulseSequence:
    """Timeline of one storage experiment.

    ``kicks`` are applied at fixed times. ``freeze_kick`` (if set) is the
    Raman kick applied right after the write pulse and undone right
    before readout: the first pulse is centred at ``pulse_duration/2``
    and the second at ``T - pulse_duration/2`` for storage time ``T``.
    Between them the coherence sits in the s' (clock) pair.
    ``efficiency_scale`` multiplies the retrieved efficiency (pulse losses).
    """

    k_s: WaveVector3
    kicks: tuple = ()
    freeze_kick: Optional[WaveVector3] = None
    pulse_duration: float = 0.0
    efficiency_scale: float = 1.0

    def __post_init__(self):
        times = [k.time for k in self.kicks]
        if any(b < a for a, b in zip(times, times[1:])):
            raise SequenceError("fixed kicks must be time ordered")
        if self.pulse_duration < 0:
            raise SequenceError("pulse_duration must be >= 0")
        if not 0 <= self.efficiency_scale <= 1:
            raise SequenceError("efficiency_scale must lie in [0, 1]")

    def freeze_window(self, probe_time: float):
        """(freeze time, unfreeze time) for a probe, or None without freezing."""
        if self.freeze_kick is None:
            return None
        half = self.pulse_duration / 2.0
        if probe_time >= self.pulse_duration:
            return half, probe_time - half
        return probe_time / 2.0, probe_time / 2.0

    def events_for(self, probe_time: float) -> list:
        events = [k for k in self.kicks if k.time <= probe_time]
        if len(events) != len(self.kicks):
            raise SequenceError(f"probe at t={probe_time} precedes a fixed kick")
        window = self.freeze_window(probe_time)
        if window is not None:
            t_on, t_off = window
            events.append(KickEvent(t_on, self.freeze_kick, "freeze"))
            events.append(KickEvent(t_off, -self.freeze_kick, "unfreeze"))
            events.sort(key=lambda e: e.time)
        return events

    def pair_segments(self, probe_time: float):
        """(t0, t1, pair) intervals: 's' for g-s storage, 's_prime' while frozen."""
        window = self.freeze_window(probe_time)
        if window is None:
            return [(0.0, probe_time, "s")]
        t_on, t_off = window
        return [(0.0, t_on, "s"), (t_on, t_off, "s_prime"), (t_off, probe_time, "s")]


@dataclass(frozen=True)
class SimulationSettings:
    cloud: CloudParams = field(default_factory=CloudParams)
    species: SpeciesParams = field(default_factory=SpeciesParams)
    levels: LevelScheme = field(default_factory=LevelScheme)
    n_atoms: int = 20000
    n_trials: int = 32
    master_seed: int = 20160101
    mode_waist: Optional[float] = None
    mode_axis: tuple = (0.0, 0.0, 1.0)
    gravity: bool = False
    field_gradient: Optional[tuple] = None  # G/m
    workers: int = 1

    def __post_init__(self):
        if self.n_atoms < 2:
            raise DomainError("n_atoms must be >= 2")
        if self.n_trials < 1:
            raise DomainError("n_trials must be >= 1")
        if self.workers < 1:
            raise DomainError("workers must be >= 1")


def trial_seed(master_seed: int, probe_index: int, trial_index: int) -> int:
    """Counter-based seed for one (probe, trial) cell, independent of run order."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(probe_index, trial_index))
    return int(ss.generate_state(1, np.uint64)[0])


def _segment_gradients(sequence: PulseSequence, settings: SimulationSettings, probe_time: float):
    grad = np.asarray(settings.field_gradient, dtype=float)
    out = []
    for t0, t1, pair in sequence.pair_segments(probe_time):
        coeff_hz_per_gauss = settings.levels.differential_coefficient(pair) * 1e6
        out.append((t0, t1, coeff_hz_per_gauss * grad))
    return out


def _run_trial(sequence: PulseSequence, settings: SimulationSettings, probe_time: float,
               seed: int) -> float:
    ens = sample_ensemble(settings.n_atoms, settings.cloud, settings.species, seed,
                          gravity=settings.gravity)
    imprint_spinwave(ens, sequence.k_s)
    for event in sequence.events_for(probe_time):
        apply_kick(ens, event)
    extra = None
    if settings.field_gradient is not None and np.any(settings.field_gradient):
        extra = magnetic_phase(ens, _segment_gradients(sequence, settings, probe_time))
    return _single_efficiency(ens, probe_time, settings.mode_waist, extra, settings.mode_axis)


def run_sequence(sequence: PulseSequence, probe_times: Sequence[float],
                 settings: SimulationSettings, label: str = "efficiency") -> DecayCurve:
    """Simulate the efficiency at each probe time with fresh ensembles per trial.

    Trials are independent; with ``settings.workers > 1`` they run in a
    thread pool and are reduced in trial order, so the output does not
    depend on the worker count.
    """
    probe_times = [float(t) for t in probe_times]
    if not probe_times:
        raise SequenceError("no probe times given")
    if any(t < 0 for t in probe_times):
        raise SequenceError("probe times must be non-negative")

    samples = []
    pool = ThreadPoolExecutor(settings.workers) if settings.workers > 1 else None
    try:
        for p, t in enumerate(probe_times):
            seeds = [trial_seed(settings.master_seed, p, i) for i in range(settings.n_trials)]
            if pool is None:
                values = [_run_trial(sequence, settings, t, s) for s in seeds]
            else:
                values = list(pool.map(lambda s, t=t: _run_trial(sequence, settings, t, s), seeds))
            samples.append(_aggregate(t, np.array(values), sequence.efficiency_scale))
    finally:
        if pool is not None:
            pool.shutdown()

    return DecayCurve(
        times=np.array([s.time for s in samples]),
        values=np.array([s.efficiency for s in samples]),
        sigmas=np.array([s.std_error for s in samples]),
        label=label,
        meta={"master_seed": settings.master_seed, "n_atoms": settings.n_atoms,
              "n_trials": settings.n_trials},
    )
