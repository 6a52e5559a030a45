"""
Experiment configuration: TOML file -> validated, fully resolved settings.

Every key has a default mirroring the reference apparatus (13 uK cloud,
2.1 deg detection angle, 90 um detection waist, 230 kHz Raman Rabi
frequency, 0.38 % write-out probability), so an empty file is a valid
configuration. Unknown sections or keys are rejected.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .core import CloudParams, LevelScheme, SpeciesParams, CONSTANTS
from .errors import ConfigError, DlczError
from .fitting import MODELS
from .montecarlo import default_workers
from .photons import DetectionParams

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class SpeciesSection:
    mass_amu: float = 86.909180527
    wavelength_write_nm: float = 780.241
    wavelength_raman_nm: float = 794.979
    hyperfine_splitting_excited_mhz: float = 816.656


@dataclass(frozen=True)
class LevelsSection:
    g: list = field(default_factory=lambda: [1, -1])
    s: list = field(default_factory=lambda: [2, -1])
    s_prime: list = field(default_factory=lambda: [2, 1])
    g_factor_f1: float = -0.5
    g_factor_f2: float = 0.5


@dataclass(frozen=True)
class CloudSection:
    temperature_uk: float = 13.0
    sigma_r_mm: list = field(default_factory=lambda: [1.0, 1.0, 1.0])
    atom_count_model: float = 1e8


@dataclass(frozen=True)
class GeometrySection:
    theta_s_deg: float = 2.1
    mode_waist_writeout_um: float = 90.0
    mode_waist_control_um: float = 200.0


@dataclass(frozen=True)
class RamanSection:
    rabi_frequency_khz: float = 230.0
    two_photon_detuning_hz: float = 0.0
    single_photon_detuning_mhz: float = -408.328
    pulse_duration_us: float = 0.0  # 0: resonant pi pulse from the Rabi frequency
    transfer_efficiency: float = 0.95
    transfer_from_pulse: bool = False
    mode_matching: float = 0.6
    plane_normal: list = field(default_factory=lambda: [0.0, 1.0, 0.0])
    lock_intersection_angle: bool = False
    residual_fraction: float = 0.0


@dataclass(frozen=True)
class DetectionSection:
    chi: float = 0.01
    eta_wo: float = 0.38
    eta_ro: float = 0.3
    bg_wo: float = 0.0
    bg_ro: float = 2.91e-3
    eta_retrieval0: float = 0.5


@dataclass(frozen=True)
class MagneticSection:
    gradient_g_per_m: list = field(default_factory=lambda: [0.0, 0.0, 0.0])
    bias_g: float = 1.5


@dataclass(frozen=True)
class SimulationSection:
    n_atoms: int = 20000
    n_trials: int = 32
    master_seed: int = 20160101
    probe_count: int = 12
    probe_span: float = 2.0  # in units of the predicted lifetime
    probe_times_us: list = field(default_factory=list)
    fallback_max_time_us: float = 2000.0
    threads: int = 0  # 0: DLCZMEM_THREADS or 1


@dataclass(frozen=True)
class TogglesSection:
    freezing: bool = False
    magnetic: bool = False
    expansion: bool = True
    gravity: bool = False


@dataclass(frozen=True)
class FitSection:
    model: str = "gaussian_decay"


SECTIONS = {
    "species": SpeciesSection,
    "levels": LevelsSection,
    "cloud": CloudSection,
    "geometry": GeometrySection,
    "raman": RamanSection,
    "detection": DetectionSection,
    "magnetic": MagneticSection,
    "simulation": SimulationSection,
    "toggles": TogglesSection,
    "fit": FitSection,
}


@dataclass(frozen=True)
class ExperimentConfig:
    species: SpeciesSection = field(default_factory=SpeciesSection)
    levels: LevelsSection = field(default_factory=LevelsSection)
    cloud: CloudSection = field(default_factory=CloudSection)
    geometry: GeometrySection = field(default_factory=GeometrySection)
    raman: RamanSection = field(default_factory=RamanSection)
    detection: DetectionSection = field(default_factory=DetectionSection)
    magnetic: MagneticSection = field(default_factory=MagneticSection)
    simulation: SimulationSection = field(default_factory=SimulationSection)
    toggles: TogglesSection = field(default_factory=TogglesSection)
    fit: FitSection = field(default_factory=FitSection)

    def __post_init__(self):
        validate(self)

    # -- derived domain objects ------------------------------------------------

    def species_params(self) -> SpeciesParams:
        s = self.species
        return SpeciesParams(mass=s.mass_amu * CONSTANTS.amu,
                             wavelength_write=s.wavelength_write_nm * 1e-9,
                             wavelength_raman=s.wavelength_raman_nm * 1e-9,
                             hyperfine_splitting_excited=s.hyperfine_splitting_excited_mhz)

    def cloud_params(self) -> CloudParams:
        c = self.cloud
        return CloudParams(temperature=c.temperature_uk * 1e-6,
                           sigma_r=tuple(x * 1e-3 for x in c.sigma_r_mm),
                           atom_count_model=c.atom_count_model)

    def level_scheme(self) -> LevelScheme:
        lv = self.levels
        return LevelScheme(g=tuple(lv.g), s=tuple(lv.s), s_prime=tuple(lv.s_prime),
                           g_factors={1: lv.g_factor_f1, 2: lv.g_factor_f2})

    def detection_params(self) -> DetectionParams:
        return DetectionParams(**dataclasses.asdict(self.detection))

    @property
    def theta_s(self) -> float:
        return math.radians(self.geometry.theta_s_deg)

    # -- serialisation -----------------------------------------------------------

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def override(self, section: str, **values) -> "ExperimentConfig":
        """Copy with some keys of one section replaced (flag > file > default)."""
        current = getattr(self, section)
        unknown = set(values) - {f.name for f in fields(current)}
        if unknown:
            raise ConfigError(f"unknown key(s) {sorted(unknown)} in section [{section}]")
        return dataclasses.replace(self, **{section: dataclasses.replace(current, **values)})


def _fail(where: str, message: str):
    raise ConfigError(f"{where}: {message}")


def _check_type(where: str, default, value):
    if isinstance(default, bool):
        if not isinstance(value, bool):
            _fail(where, f"expected true/false, got {value!r}")
    elif isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            _fail(where, f"expected an integer, got {value!r}")
    elif isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            _fail(where, f"expected a number, got {value!r}")
        return float(value)
    elif isinstance(default, str):
        if not isinstance(value, str):
            _fail(where, f"expected a string, got {value!r}")
    elif isinstance(default, list):
        if not isinstance(value, list) or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            _fail(where, f"expected a list of numbers, got {value!r}")
        return list(value)
    return value


def from_dict(data: dict) -> ExperimentConfig:
    sections = {}
    for name, body in data.items():
        if name not in SECTIONS:
            raise ConfigError(f"unknown section [{name}]; expected one of {sorted(SECTIONS)}")
        if not isinstance(body, dict):
            raise ConfigError(f"[{name}] must be a table")
        cls = SECTIONS[name]
        defaults = cls()
        known = {f.name for f in fields(cls)}
        values = {}
        for key, value in body.items():
            if key not in known:
                raise ConfigError(f"unknown key '{key}' in section [{name}]")
            values[key] = _check_type(f"{name}.{key}", getattr(defaults, key), value)
        sections[name] = cls(**values)
    return ExperimentConfig(**sections)


def load_config(path=None) -> ExperimentConfig:
    """Read and validate a TOML config; ``None`` gives all defaults."""
    if path is None:
        return ExperimentConfig()
    text = Path(path).read_text()
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: parse error: {exc}") from None
    return from_dict(data)


def _require(ok: bool, where: str, constraint: str, value):
    if not ok:
        _fail(where, f"{constraint} (got {value!r})")


def validate(cfg: ExperimentConfig) -> None:
    g = cfg.geometry
    _require(0 < g.theta_s_deg < 45, "geometry.theta_s_deg", "must lie in (0, 45)", g.theta_s_deg)
    _require(g.mode_waist_writeout_um > 0, "geometry.mode_waist_writeout_um", "must be > 0",
             g.mode_waist_writeout_um)
    _require(g.mode_waist_control_um > 0, "geometry.mode_waist_control_um", "must be > 0",
             g.mode_waist_control_um)

    r = cfg.raman
    _require(r.rabi_frequency_khz > 0, "raman.rabi_frequency_khz", "must be > 0", r.rabi_frequency_khz)
    _require(r.pulse_duration_us >= 0, "raman.pulse_duration_us", "must be >= 0", r.pulse_duration_us)
    _require(0 < r.transfer_efficiency <= 1, "raman.transfer_efficiency", "must lie in (0, 1]",
             r.transfer_efficiency)
    _require(0 < r.mode_matching <= 1, "raman.mode_matching", "must lie in (0, 1]", r.mode_matching)
    _require(0 <= r.residual_fraction <= 1, "raman.residual_fraction", "must lie in [0, 1]",
             r.residual_fraction)
    _require(len(r.plane_normal) in (0, 3), "raman.plane_normal", "must be [] or three numbers",
             r.plane_normal)

    m = cfg.magnetic
    _require(len(m.gradient_g_per_m) == 3, "magnetic.gradient_g_per_m", "must be three numbers",
             m.gradient_g_per_m)

    s = cfg.simulation
    _require(s.n_atoms >= 2, "simulation.n_atoms", "must be >= 2", s.n_atoms)
    _require(s.n_trials >= 2, "simulation.n_trials", "must be >= 2", s.n_trials)
    _require(s.probe_count >= 5, "simulation.probe_count", "must be >= 5 (fit needs 5 points)",
             s.probe_count)
    _require(s.probe_span > 0, "simulation.probe_span", "must be > 0", s.probe_span)
    _require(s.fallback_max_time_us > 0, "simulation.fallback_max_time_us", "must be > 0",
             s.fallback_max_time_us)
    _require(s.threads >= 0, "simulation.threads", "must be >= 0", s.threads)
    _require(0 <= s.master_seed < 2 ** 63, "simulation.master_seed", "must lie in [0, 2^63)",
             s.master_seed)
    pt = s.probe_times_us
    _require(all(t >= 0 for t in pt) and all(b > a for a, b in zip(pt, pt[1:])),
             "simulation.probe_times_us", "must be non-negative and strictly increasing", pt)

    _require(cfg.fit.model in MODELS, "fit.model", f"must be one of {MODELS}", cfg.fit.model)
    for name, lst in (("levels.g", cfg.levels.g), ("levels.s", cfg.levels.s),
                      ("levels.s_prime", cfg.levels.s_prime)):
        _require(len(lst) == 2, name, "must be [F, m_F]", lst)

    # domain-object invariants, reported against the config section
    for section, build in (("species", cfg.species_params), ("cloud", cfg.cloud_params),
                           ("levels", cfg.level_scheme), ("detection", cfg.detection_params)):
        try:
            build()
        except DlczError as exc:
            raise ConfigError(f"[{section}] {exc}") from None


def resolve_threads(cfg: ExperimentConfig) -> int:
    return cfg.simulation.threads or default_workers()
