"""Machine-readable command reports."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


def _clean(value):
    """JSON-safe copy: numpy scalars/arrays to Python, non-finite floats to None."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return _clean(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, Path):
        return str(value)
    return value


@dataclass
class Check:
    name: str
    expected: object
    actual: object
    tolerance: float | None
    passed: bool

    @classmethod
    def close(cls, name, expected, actual, tol):
        """|actual - expected| <= tol, elementwise."""
        e, a = np.asarray(expected, float), np.asarray(actual, float)
        ok = bool(e.shape == a.shape and np.all(np.isfinite(a)) and np.all(np.abs(a - e) <= tol))
        return cls(name, expected, actual, tol, ok)

    @classmethod
    def below(cls, name, actual, tol):
        a = float(actual)
        return cls(name, 0.0, a, tol, bool(math.isfinite(a) and abs(a) < tol))

    @classmethod
    def above(cls, name, actual, bound):
        a = float(actual)
        return cls(name, f"> {bound}", a, bound, bool(math.isfinite(a) and a > bound))

    @classmethod
    def equal(cls, name, expected, actual):
        return cls(name, expected, actual, None, expected == actual)

    def to_dict(self):
        return _clean({"name": self.name, "expected": self.expected, "actual": self.actual,
                       "tolerance": self.tolerance, "pass": self.passed})


@dataclass
class Report:
    command: str
    params: dict
    checks: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    result: dict = field(default_factory=dict)

    @property
    def overall(self):
        return all(c.passed for c in self.checks)

    def add(self, check):
        self.checks.append(check)
        return check

    def to_dict(self):
        return _clean({
            "command": self.command,
            "params": self.params,
            "checks": [c.to_dict() for c in self.checks],
            "tables": self.tables,
            "result": self.result,
            "overall": "pass" if self.overall else "fail",
        })

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n"

    def write(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json(), encoding="utf-8")
        return path


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path
