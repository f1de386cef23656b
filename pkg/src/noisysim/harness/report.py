"""CSV and JSON reports, byte-stable for identical inputs."""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

from ..compiler.metrics import FIELDS, RunMetrics


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "nan" if math.isnan(value) else repr(value)
    if isinstance(value, dict):
        return json.dumps(value, sort_keys=True, separators=(",", ":"))
    return str(value)


def csv_text(metrics: list[RunMetrics]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIELDS)
    for m in sorted(metrics, key=lambda m: m.run_id):
        w.writerow([_cell(getattr(m, f)) for f in FIELDS])
    return buf.getvalue()


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def json_text(aggregate: dict) -> str:
    return json.dumps(_clean(aggregate), sort_keys=True, indent=2) + "\n"


def emit_report(metrics: list[RunMetrics], aggregate: dict, fmt: str, path: str | Path) -> Path:
    """Write ``<path>.csv`` (one row per run) or ``<path>.json`` (aggregate)."""
    path = Path(path)
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown report format {fmt!r}")
    target = path.with_suffix("." + fmt)
    target.parent.mkdir(parents=True, exist_ok=True)
    text = csv_text(metrics) if fmt == "csv" else json_text(aggregate)
    with open(target, "w", newline="") as fh:
        fh.write(text)
    return target
