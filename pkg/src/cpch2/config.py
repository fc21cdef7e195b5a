"""Run configuration: defaults, then a JSON config file, then command-line flags."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

OUT_ENV = "CPCH2_OUT_DIR"

DEFAULT_TOLERANCES = {
    "spread": 1e-5,  # per-node principal curvature spread
    "spectrum": 1e-5,  # measured curvatures against the family formulas
    "classify": 1e-3,  # relation residuals for measured data
    "analytic": 1e-10,  # relation residuals for exact data (scan)
    "det_D": 1e-10,
    "trace_C": 1e-9,
    "det_C": 1e-9,
    "eig_C": 1e-8,
    "f3_prime": 1e-12,
    "jacobi": 1e-8,  # ODE against closed-form Jacobi fields
    "roots": 1e-9,  # quadratic-system residual of reported roots
    "ruled": 1e-4,
    "codazzi": 1e-3,
}

DEFAULT_GRID = {
    "verify": 3,  # nodes along the first parameter; the other two axes use 2
    "scan": 99,
    "jacobi": 20,  # lambda3 values in the D/C identity sweep
    "jacobi_cases": 50,  # random Jacobi ODE cases
}


class ConfigError(ValueError):
    """Invalid configuration; the CLI maps it to a usage error."""


@dataclass(frozen=True)
class RunConfig:
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    grid: dict = field(default_factory=lambda: dict(DEFAULT_GRID))
    out: Path | None = None
    seed: int = 0
    ode_tol: float = 1e-12

    def __post_init__(self):
        for k, v in self.tolerances.items():
            if k not in DEFAULT_TOLERANCES:
                raise ConfigError(f"unknown tolerance {k!r}")
            if not (isinstance(v, (int, float)) and v > 0):
                raise ConfigError(f"tolerance {k} must be positive, got {v!r}")
        for k, v in self.grid.items():
            if k not in DEFAULT_GRID:
                raise ConfigError(f"unknown grid entry {k!r}")
            if not (isinstance(v, int) and v >= 2):
                raise ConfigError(f"grid size {k} must be an integer >= 2, got {v!r}")
        if not self.ode_tol > 0:
            raise ConfigError("ode_tol must be positive")

    def tol(self, name):
        return float(self.tolerances[name])

    def merged(self, tolerances=None, grid=None, **kw):
        tols = dict(self.tolerances)
        tols.update(tolerances or {})
        grids = dict(self.grid)
        grids.update(grid or {})
        return replace(self, tolerances=tols, grid=grids, **kw)

    @classmethod
    def from_file(cls, path, base=None):
        base = base or cls()
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(raw) - {"tolerances", "grid", "out", "seed", "ode_tol"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kw = {}
        if "out" in raw:
            kw["out"] = Path(raw["out"])
        if "seed" in raw:
            kw["seed"] = int(raw["seed"])
        if "ode_tol" in raw:
            kw["ode_tol"] = float(raw["ode_tol"])
        return base.merged(raw.get("tolerances"), raw.get("grid"), **kw)


def default_out_dir():
    value = os.environ.get(OUT_ENV)
    return Path(value) if value else None


def parse_tol(item):
    name, sep, value = item.partition("=")
    if not sep:
        raise ConfigError(f"--tol expects NAME=VALUE, got {item!r}")
    try:
        return name.strip(), float(value)
    except ValueError as exc:
        raise ConfigError(f"bad tolerance value in {item!r}") from exc
