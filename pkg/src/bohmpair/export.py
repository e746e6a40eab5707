"""CSV and JSON writers for records, patterns and run summaries.

Floats are written with ``repr`` (shortest round-trip form) so identical
runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .patterns import Pattern

SCHEMA_VERSION = "1.0"

RECORD_COLUMNS = ["trajectory_id", "status", "y0_initial", "y1_final", "y2_final"]
PATTERN_COLUMNS = ["bin_left", "bin_right", "count", "normalized_density"]


def _num(x):
    return repr(float(x))


def write_records_csv(path, records):
    from .guidance import TrajectoryStatus

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RECORD_COLUMNS)
        y0 = records.y0_initial
        for k in range(len(records)):
            writer.writerow([
                int(records.trajectory_id[k]),
                TrajectoryStatus(int(records.status[k])).label,
                _num(y0[k]), _num(records.y1_final[k]), _num(records.y2_final[k]),
            ])


def write_pattern_csv(path, pattern: Pattern):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PATTERN_COLUMNS)
        if pattern.total_weight == 0:
            return
        dens = pattern.normalized_density
        e = pattern.bin_edges
        for k in range(pattern.counts.size):
            writer.writerow([_num(e[k]), _num(e[k + 1]), _num(pattern.counts[k]), _num(dens[k])])


def read_pattern_csv(path) -> Pattern:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path} holds no bins")
    left = [float(r["bin_left"]) for r in rows]
    edges = np.array(left + [float(rows[-1]["bin_right"])])
    return Pattern(edges, np.array([float(r["count"]) for r in rows]))


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def pattern_payload(pattern: Pattern, metadata: dict | None = None) -> dict:
    has = pattern.total_weight > 0
    return {
        "schema_version": SCHEMA_VERSION,
        "bin_left": pattern.bin_edges[:-1] if has else [],
        "bin_right": pattern.bin_edges[1:] if has else [],
        "count": pattern.counts if has else [],
        "normalized_density": pattern.normalized_density if has else [],
        "metadata": {**pattern.meta, **(metadata or {})},
    }


def write_json(path, payload):
    Path(path).write_text(json.dumps(jsonable(payload), indent=2, sort_keys=True) + "\n")


_FINDING = {
    "type": "object",
    "required": ["name", "condition", "value", "satisfied"],
    "properties": {
        "name": {"type": "string"},
        "condition": {"type": "string"},
        "value": {"type": ["number", "null"]},
        "satisfied": {"type": "boolean"},
    },
}
_DIVERGENCE = {
    "type": "object",
    "required": ["ks", "tv", "chi2", "chi2_dof", "chi2_pvalue"],
    "properties": {k: {"type": ["number", "null"]} for k in ("ks", "tv", "chi2", "chi2_pvalue")}
    | {"chi2_dof": {"type": "integer"}},
}
_CHECK = {
    "type": "object",
    "required": ["value", "threshold", "passed"],
    "properties": {"value": {"type": ["number", "null"]},
                   "threshold": {"type": ["number", "null"]},
                   "passed": {"type": "boolean"}},
}

SUMMARY_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "package_version", "command", "scenario", "seed",
                 "parameters", "kinematics", "regime", "oracles", "checks", "files"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "package_version": {"type": "string"},
        "command": {"enum": ["simulate", "predict", "compare", "validate", "oracles"]},
        "scenario": {"enum": ["fig1", "fig2", "fig3", "custom"]},
        "seed": {"type": "integer", "minimum": 0},
        "n": {"type": ["integer", "null"]},
        "tol": {"type": "number"},
        "selective": {"type": "boolean"},
        "sqm_selective_reading": {"type": "string"},
        "parameters": {"type": "object"},
        "kinematics": {"type": "object",
                       "required": ["u_x", "u_y", "E_x", "t_D", "tau"]},
        "regime": {"type": "array", "items": _FINDING},
        "oracles": {"type": "array", "items": {
            "type": "object", "required": ["name", "value", "units", "inputs"]}},
        "abort_stats": {"type": ["object", "null"]},
        "divergence": {"type": "object", "additionalProperties": _DIVERGENCE},
        "checks": {"type": "object", "additionalProperties": _CHECK},
        "gap": {"type": ["object", "null"]},
        "files": {"type": "object", "additionalProperties": {"type": "string"}},
    },
}
