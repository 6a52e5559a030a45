"""
Command-line entry point.

    dlczmem simulate  -c cfg.toml -o outdir [--freezing/--no-freezing] ...
    dlczmem sweep     -c cfg.toml -o outdir --angles 1.25,2.1,3.0,4.8
    dlczmem fit       curve.csv [--model exponential_decay] [-o fit.json]
    dlczmem geometry  -c cfg.toml [--theta-deg 2.1]
    dlczmem ramsey    -c cfg.toml -o fringe.csv [--detuning-hz 1000]

Exit codes: 0 success, 2 configuration/validation error, 3 runtime
error (fit, schema, sequence), 4 file-system error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import SCHEMA_VERSION, ExperimentConfig, load_config
from .decay import motional_lifetime
from .errors import ConfigError, DlczError, DomainError
from .experiment import build_sequence, raman_pulse, run_experiment
from .fitting import MODELS, fit_decay, format_lifetime
from .raman import fit_fringe_frequency, half_pi_pulse, ramsey_fringe
from .serialize import (curve_from_csv, curve_to_csv, dump_json, sweep_to_csv, theory_to_csv,
                        _write_rows, _num)
from .sweep import angle_sweep, theory_overlay

log = logging.getLogger("dlczmem")

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME, EXIT_IO = 0, 2, 3, 4
DEFAULT_ANGLES_DEG = (1.25, 2.1, 3.0, 4.8)


def _header(cfg: ExperimentConfig, command: str) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": command,
            "config_hash": cfg.config_hash(), "master_seed": cfg.simulation.master_seed,
            "config": cfg.to_dict()}


def _solution_dict(solution):
    if solution is None:
        return None
    return {"dir_plus": list(solution.pair.dir_plus), "dir_minus": list(solution.pair.dir_minus),
            "intersection_angle_deg": math.degrees(solution.pair.intersection_angle),
            "kick_rad_per_m": solution.kick.as_array().tolist(),
            "residual_rad_per_m": solution.residual.as_array().tolist(),
            "residual_fraction": solution.residual_fraction}


def cmd_simulate(cfg: ExperimentConfig, out_dir) -> dict:
    """Simulate one storage curve; write efficiency.csv, g2.csv and simulate.json.

    The sidecar fits are computed from the CSV files as written, so
    ``cmd_fit`` on either file reproduces them exactly.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = run_experiment(cfg, fit=False)
    paths = {"efficiency": out / "efficiency.csv", "g2": out / "g2.csv"}
    curve_to_csv(result.efficiency, paths["efficiency"])
    curve_to_csv(result.g2, paths["g2"])

    fits, errors = {}, []
    for name, path in paths.items():
        try:
            fits[name] = fit_decay(curve_from_csv(path), cfg.fit.model).to_dict()
        except DlczError as exc:
            fits[name] = None
            errors.append(f"{name}: {exc}")

    sidecar = _header(cfg, "simulate")
    sidecar.update({
        "theta_s_deg": math.degrees(result.theta_s), "freezing": result.freezing,
        "predicted_tau_s": result.predicted_tau, "freezing_solution": _solution_dict(result.solution),
        "fits": fits, "fit_errors": errors,
        "files": {k: p.name for k, p in paths.items()},
    })
    dump_json(sidecar, out / "simulate.json")
    return sidecar


def cmd_sweep(cfg: ExperimentConfig, angles_deg, out_dir, states=(False, True)) -> list:
    if len(angles_deg) < 2:
        raise DomainError("a sweep needs at least two angles")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    angles = [math.radians(a) for a in angles_deg]
    rows = []
    for freezing in states:
        rows.extend(angle_sweep(angles, freezing, cfg))
    sweep_to_csv(rows, out / "sweep.csv")
    rms = theory_overlay(angles, "rms_1d", cfg)
    mean2d = theory_overlay(angles, "mean_2d", cfg)
    theory_to_csv(rms, mean2d, out / "theory.csv")
    sidecar = _header(cfg, "sweep")
    sidecar.update({"angles_deg": list(angles_deg), "freezing_states": list(states),
                    "theory": {"rms_1d": rms, "mean_2d": mean2d},
                    "rows": [{"theta_deg": math.degrees(r.theta_s), "freezing": r.freezing,
                              "tau_s": r.tau_1e, "tau_err_s": r.tau_err, "g2_0": r.g2_initial,
                              "g2_err": r.g2_err, "residual_fraction": r.residual_fraction,
                              "fallback": r.fallback} for r in rows]})
    dump_json(sidecar, out / "sweep.json")
    return rows


def cmd_fit(csv_path, model: str = "gaussian_decay", out_path=None) -> dict:
    curve = curve_from_csv(csv_path)
    report = fit_decay(curve, model).to_dict()
    report["schema_version"] = SCHEMA_VERSION
    report["input"] = Path(csv_path).name
    if report["tau_1e_s"] is not None:
        report["lifetime"] = format_lifetime(report["tau_1e_s"], report["tau_err_s"])
    out_path = Path(out_path) if out_path else Path(csv_path).with_suffix(".fit.json")
    dump_json(report, out_path)
    return report


def cmd_geometry(cfg: ExperimentConfig) -> dict:
    seq, solution, geometry = build_sequence(cfg, cfg.theta_s, freezing=True)
    sigma_v = cfg.cloud_params().velocity_sigma(cfg.species_params())
    residual = (seq.k_s + seq.freeze_kick).norm()
    tau = motional_lifetime(residual, sigma_v)
    report = _header(cfg, "geometry")
    report.update({"theta_s_deg": cfg.geometry.theta_s_deg,
                   "k_s_rad_per_m": seq.k_s.as_array().tolist(), "k_s_norm": seq.k_s.norm(),
                   "solution": _solution_dict(solution),
                   "residual_lifetime_s": tau,
                   "pulse_duration_s": seq.pulse_duration, "efficiency_scale": seq.efficiency_scale})
    return report


def cmd_ramsey(cfg: ExperimentConfig, detuning_hz: float, max_gap_us: float, points: int, out_path) -> dict:
    rabi = raman_pulse(cfg).rabi_frequency
    pulse = half_pi_pulse(rabi)
    gaps = np.linspace(0.0, max_gap_us * 1e-6, points)
    pops = np.array([ramsey_fringe(detuning_hz, g, pulse) for g in gaps])
    _write_rows(out_path, ("gap_us", "population"),
                [(_num(g * 1e6, ".6g"), _num(p)) for g, p in zip(gaps, pops)])
    return {"detuning_hz": detuning_hz, "fitted_frequency_hz": fit_fringe_frequency(gaps, pops),
            "half_pi_duration_s": pulse.duration, "points": points}


# ---------------------------------------------------------------------------

def _parse_angles(text: str):
    try:
        return [float(a) for a in text.split(",") if a.strip()]
    except ValueError:
        raise ConfigError(f"--angles must be comma-separated numbers, got {text!r}") from None


def _apply_flags(cfg: ExperimentConfig, args) -> ExperimentConfig:
    sim = {}
    for flag, key in (("seed", "master_seed"), ("trials", "n_trials"), ("atoms", "n_atoms"),
                      ("threads", "threads")):
        value = getattr(args, flag, None)
        if value is not None:
            sim[key] = value
    if sim:
        cfg = cfg.override("simulation", **sim)
    if getattr(args, "theta_deg", None) is not None:
        cfg = cfg.override("geometry", theta_s_deg=args.theta_deg)
    if getattr(args, "freezing", None) is not None:
        cfg = cfg.override("toggles", freezing=args.freezing)
    if getattr(args, "model", None) is not None:
        cfg = cfg.override("fit", model=args.model)
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dlczmem", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, output=True):
        p.add_argument("-c", "--config", help="TOML config file (defaults if omitted)")
        if output:
            p.add_argument("-o", "--out", required=True, help="output directory")
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--atoms", type=int)
        p.add_argument("--threads", type=int, help="worker threads (env DLCZMEM_THREADS)")
        p.add_argument("--theta-deg", type=float)
        p.add_argument("--model", choices=MODELS)

    p = sub.add_parser("simulate", help="simulate one decay curve")
    common(p)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--freezing", dest="freezing", action="store_true", default=None)
    group.add_argument("--no-freezing", dest="freezing", action="store_false")

    p = sub.add_parser("sweep", help="lifetime versus detection angle")
    common(p)
    p.add_argument("--angles", default=",".join(str(a) for a in DEFAULT_ANGLES_DEG),
                   help="comma-separated angles in degrees")
    p.add_argument("--states", choices=("both", "on", "off"), default="both",
                   help="freezing states to run")

    p = sub.add_parser("fit", help="fit a curve CSV")
    p.add_argument("input")
    p.add_argument("--model", choices=MODELS, default="gaussian_decay")
    p.add_argument("-o", "--out", help="output JSON (default: <input>.fit.json)")

    p = sub.add_parser("geometry", help="freezing geometry report")
    common(p, output=False)
    p.add_argument("-o", "--out", help="write the report as JSON")

    p = sub.add_parser("ramsey", help="Ramsey fringe calibration scan")
    common(p, output=False)
    p.add_argument("-o", "--out", required=True, help="output CSV")
    p.add_argument("--detuning-hz", type=float, default=1000.0)
    p.add_argument("--max-gap-us", type=float, default=2000.0)
    p.add_argument("--points", type=int, default=201)
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "fit":
            report = cmd_fit(args.input, args.model, args.out)
            print(json.dumps(report, indent=2, sort_keys=True))
            return EXIT_OK
        cfg = _apply_flags(load_config(args.config), args)
        if args.command == "simulate":
            sidecar = cmd_simulate(cfg, args.out)
            fit = sidecar["fits"].get("efficiency")
            if fit and fit["tau_1e_s"] is not None:
                print(f"efficiency lifetime: {format_lifetime(fit['tau_1e_s'], fit['tau_err_s'])}")
            print(f"wrote {args.out}")
        elif args.command == "sweep":
            states = {"both": (False, True), "on": (True,), "off": (False,)}[args.states]
            rows = cmd_sweep(cfg, _parse_angles(args.angles), args.out, states)
            for r in rows:
                tau = "-" if r.tau_1e is None else format_lifetime(r.tau_1e, r.tau_err)
                print(f"{math.degrees(r.theta_s):6.3g} deg  freezing={'on ' if r.freezing else 'off'}  "
                      f"tau={tau}  g2(0)={r.g2_initial:.3g}")
        elif args.command == "geometry":
            report = cmd_geometry(cfg)
            if args.out:
                dump_json(report, args.out)
            report.pop("config")
            print(json.dumps(report, indent=2, sort_keys=True))
        elif args.command == "ramsey":
            report = cmd_ramsey(cfg, args.detuning_hz, args.max_gap_us, args.points, args.out)
            print(json.dumps(report, indent=2, sort_keys=True))
        return EXIT_OK
    except (ConfigError, DomainError) as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DlczError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(run())
