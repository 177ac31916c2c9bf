"""Run reports (JSON) and data tables (CSV)."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

STATUS_PASS = "pass"
STATUS_FAIL = "fail"
STATUS_NA = "n/a"
STATUS_ERROR = "error"


def _plain(obj):
    """JSON-safe copy: numpy scalars and arrays to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if obj is None or isinstance(obj, (int, str)):
        return obj
    return repr(obj)


def summary_stats(residuals: dict) -> dict:
    out = {}
    for name, vals in residuals.items():
        a = np.asarray([v for v in vals if v is not None], dtype=float)
        a = a[np.isfinite(a)]
        if a.size:
            out[name] = {"min": float(a.min()), "max": float(a.max()), "mean": float(a.mean()), "count": int(a.size)}
        else:
            out[name] = {"min": None, "max": None, "mean": None, "count": 0}
    return out


@dataclass(eq=False)
class RunReport:
    experiment: str
    theorem: str
    model: str
    status: str
    verdicts: list
    summary: dict
    wall_time: float
    config: dict
    message: str = ""
    code: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        if self.status in (STATUS_PASS, STATUS_NA):
            return 0
        if self.code in ("config_error", "model_error"):
            return 2
        return 1

    def as_dict(self) -> dict:
        return _plain({
            "experiment": self.experiment,
            "theorem": self.theorem,
            "model": self.model,
            "status": self.status,
            "verdicts": [v.as_dict() for v in self.verdicts],
            "summary": self.summary,
            "wall_time": self.wall_time,
            "config": self.config,
            "message": self.message,
            "code": self.code,
            "extra": self.extra,
        })


def format_value(x) -> str:
    if isinstance(x, str):
        return x
    return "%.17g" % float(x)


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_value(x) for x in row])


def write_json(path, data):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(_plain(data), fh, indent=2, sort_keys=True)
        fh.write("\n")


def theorem_table(reports, theorem_ids):
    """One row per theorem id that appears in ``reports``: (theorem, status, runs, passed, failed, n/a)."""
    rows = []
    for tid in theorem_ids:
        rel = [r for r in reports if r.theorem == tid]
        if not rel:
            continue
        failed = sum(r.status in (STATUS_FAIL, STATUS_ERROR) for r in rel)
        passed = sum(r.status == STATUS_PASS for r in rel)
        na = sum(r.status == STATUS_NA for r in rel)
        status = STATUS_FAIL if failed else (STATUS_PASS if passed else STATUS_NA)
        rows.append((tid, status, len(rel), passed, failed, na))
    return rows
