"""CSV and JSON writers for sweep results.

CSV: abscissa column first, then one column per series label, missing
points left empty, plus a ``<name>.meta.json`` sidecar. JSON: top-level
keys ``experiment``, ``version``, ``sweep``, ``series``. Numbers carry 12
significant digits so repeated runs are byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from . import __version__
from .observables import CurveSeries

FORMATS = ("csv", "json")
JSON_KEYS = ("experiment", "version", "sweep", "series")


def fmt(v: float) -> str:
    return "" if np.isnan(v) else f"{v:.12g}"


def _round(v):
    if v is None:
        return None
    return float(f"{v:.12g}")


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return _round(float(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def csv_text(series: list[CurveSeries]) -> str:
    x = series[0].x
    for s in series[1:]:
        if len(s.x) != len(x) or np.any(s.x != x):
            raise ValueError("all series in one CSV must share the abscissa")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([series[0].x_name] + [s.label for s in series])
    for i, xv in enumerate(x):
        w.writerow([fmt(xv)] + [fmt(s.y[i]) for s in series])
    return buf.getvalue()


def json_document(name: str, sweep: dict, series: list[CurveSeries]) -> dict:
    return _clean({
        "experiment": name,
        "version": __version__,
        "sweep": sweep,
        "series": [s.to_dict() for s in series],
    })


def write_results(name: str, sweep: dict, series: list[CurveSeries], out_dir: Path,
                  fmt_name: str = "csv", filename: str | None = None) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(filename).stem if filename else name
    if fmt_name == "json":
        path = out_dir / f"{stem}.json"
        path.write_text(json.dumps(json_document(name, sweep, series), indent=1) + "\n")
        return [path]
    if fmt_name != "csv":
        raise ValueError(f"unknown output format {fmt_name!r}")
    path = out_dir / f"{stem}.csv"
    path.write_text(csv_text(series))
    meta = _clean({
        "experiment": name,
        "version": __version__,
        "sweep": sweep,
        "series_meta": [{"label": s.label, **s.meta} for s in series],
    })
    side = out_dir / f"{stem}.meta.json"
    side.write_text(json.dumps(meta, indent=1) + "\n")
    return [path, side]
