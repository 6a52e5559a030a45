"""CSV and JSON writers/readers for curves, fits and sweep tables.

Times are written in microseconds with 6 significant digits; values and
sigmas with 10. Files are byte-for-byte reproducible for a fixed input.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .curves import DecayCurve
from .errors import SchemaError

CURVE_COLUMNS = ("time_us", "value", "sigma")
SWEEP_COLUMNS = ("theta_deg", "freezing", "tau_us", "tau_err_us", "g2_0", "g2_err")
THEORY_COLUMNS = ("theta_deg", "tau_rms_1d_us", "tau_mean_2d_us")


def _num(x, fmt=".10g") -> str:
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return ""
    return format(float(x), fmt)


def _write_rows(path, header, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    Path(path).write_text(buf.getvalue())


def curve_to_csv(curve: DecayCurve, path) -> None:
    rows = [(_num(t * 1e6, ".6g"), _num(v), _num(s)) for t, v, s in curve.samples]
    _write_rows(path, CURVE_COLUMNS, rows)


def curve_from_csv(path, label: str = "") -> DecayCurve:
    text = Path(path).read_text()
    reader = csv.DictReader(io.StringIO(text))
    header = reader.fieldnames or []
    for col in CURVE_COLUMNS:
        if col not in header:
            raise SchemaError(f"{path}: missing column '{col}' (header: {header})")
    columns = {c: [] for c in CURVE_COLUMNS}
    for lineno, row in enumerate(reader, start=2):
        for col in CURVE_COLUMNS:
            raw = row.get(col)
            try:
                columns[col].append(float(raw))
            except (TypeError, ValueError):
                raise SchemaError(f"{path}: column '{col}' line {lineno}: not a number: {raw!r}") from None
    try:
        return DecayCurve(np.array(columns["time_us"]) * 1e-6, np.array(columns["value"]),
                          np.array(columns["sigma"]), label or Path(path).stem)
    except ValueError as exc:
        raise SchemaError(f"{path}: {exc}") from None


def sweep_to_csv(rows, path) -> None:
    out = []
    for r in rows:
        out.append((_num(math.degrees(r.theta_s), ".6g"), "on" if r.freezing else "off",
                    _num(None if r.tau_1e is None else r.tau_1e * 1e6),
                    _num(None if r.tau_err is None else r.tau_err * 1e6),
                    _num(r.g2_initial), _num(r.g2_err)))
    _write_rows(path, SWEEP_COLUMNS, out)


def theory_to_csv(rms: dict, mean2d: dict, path) -> None:
    rows = [(_num(th, ".6g"), _num(a * 1e6), _num(b * 1e6))
            for th, a, b in zip(rms["theta_deg"], rms["tau_s"], mean2d["tau_s"])]
    _write_rows(path, THEORY_COLUMNS, rows)


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")
