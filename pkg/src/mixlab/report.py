"""Report assembly and canonical serialization.

A report is a single JSON document: config echo, per-check records in fixed
id order, optional pipeline result, versions, and deterministic work
counters. Serialization is canonical (sorted keys, fixed indentation,
shortest-round-trip floats, no NaN/Inf), so a config plus seed reproduces
the file byte for byte regardless of worker count; wall-clock timing is
never written into the report (the command line prints it to stderr).
"""

from __future__ import annotations

import csv
import dataclasses
import json
import platform

import numpy as np
import scipy

from . import __version__
from ._kernels import BACKEND

__all__ = ["build_report", "extract_series", "render_report", "write_report",
           "write_series_csv"]


def _sanitize(obj):
    """Make a tree JSON-safe and deterministic: numpy scalars to Python
    scalars, arrays to lists, non-finite floats to strings, dict keys to
    strings."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _sanitize(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if f != f:
            return "nan"
        if f in (float("inf"), float("-inf")):
            return "inf" if f > 0 else "-inf"
        return f
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__} into a report")


def build_report(config: dict, checks=(), pipeline=None) -> dict:
    """Assemble the report tree. ``checks`` are CheckReports (already in
    suite order), ``pipeline`` an optional PipelineResult."""
    checks = list(checks)
    work_units = 0
    for rep in checks:
        det = rep.details if isinstance(rep.details, dict) else {}
        work_units += int(det.get("replicas", 0)) * (int(det.get("horizon", 0)) + 1)
    report = {
        "config": _sanitize(config),
        "checks": [_sanitize(rep) for rep in checks],
        "pipeline": _sanitize(pipeline) if pipeline is not None else None,
        "summary": {
            "n_pass": sum(1 for r in checks if r.verdict == "pass"),
            "n_fail": sum(1 for r in checks if r.verdict == "fail"),
            "n_indeterminate": sum(1 for r in checks
                                   if r.verdict == "indeterminate"),
        },
        "timing": {
            "policy": ("deterministic work counters only; wall-clock goes "
                       "to stderr so reports stay byte-reproducible"),
            "replica_steps": work_units,
        },
        "versions": {
            "mixlab": __version__,
            "backend": BACKEND,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
    }
    return report


def render_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_report(report: dict, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_report(report))


def extract_series(report: dict, series_id: str) -> dict:
    """Find a named series in check reports (suite order) or the pipeline
    result. Raises KeyError with the available ids when absent."""
    available = []
    for rep in report.get("checks", []):
        series = rep.get("series") or {}
        if series_id in series:
            return series[series_id]
        available.extend(series.keys())
    pipe = report.get("pipeline")
    if pipe:
        series = pipe.get("series") or {}
        if series_id in series:
            return series[series_id]
        available.extend(series.keys())
    raise KeyError(
        f"series {series_id!r} not in report; available: "
        f"{', '.join(sorted(set(available))) or '(none)'}"
    )


def write_series_csv(report: dict, series_id: str, path) -> None:
    series = extract_series(report, series_id)
    columns = series["columns"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in series["rows"]:
            writer.writerow(row)
