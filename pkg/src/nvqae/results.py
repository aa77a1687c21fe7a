"""Result files: RFC-4180 CSV (times in microseconds) and JSON mirrors."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path


def _clean(value):
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def write_json(path: Path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")
    return path


def write_csv(path: Path, rows: list[dict], fieldnames: list[str] | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fieldnames = fieldnames or (list(rows[0]) if rows else [])
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\r\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(row.get(k)) for k in fieldnames})
    return path


def _fmt(value):
    value = _clean(value)
    if isinstance(value, float):
        return repr(value)
    return "" if value is None else value


def trace_rows(trace) -> list[dict]:
    rows = []
    for r in trace.records:
        rows.append({
            "iteration": r.iteration,
            "b1_volts": r.params["b1_volts"],
            "b2_volts": r.params["b2_volts"],
            "cost": r.cost,
            "grad_b1": r.gradients.get("b1_volts"),
            "grad_b2": r.gradients.get("b2_volts"),
            "delta_p_b1": r.delta_p.get("b1_volts"),
            "delta_p_b2": r.delta_p.get("b2_volts"),
            "probe_b1": r.probe_steps.get("b1_volts"),
            "probe_b2": r.probe_steps.get("b2_volts"),
            "queries": r.queries,
        })
    return rows


def read_csv(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
