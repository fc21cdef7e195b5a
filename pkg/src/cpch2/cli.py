"""Command-line driver: verification suites, scans and classification with JSON reports.

Exit codes: 0 all checks pass / data classified, 1 a check failed / Unclassified,
2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable

import numpy as np

from . import ambient as amb
from . import classifier as cl
from . import hypersurfaces as hs
from . import jacobi as jc
from .config import ConfigError, RunConfig, default_out_dir, parse_tol
from .errors import DomainError, NotApplicable, NumericError
from .report import Check, Report, write_csv

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# -- families ----------------------------------------------------------------------------


@dataclass(frozen=True)
class FamilySpec:
    build: Callable
    spectrum: Callable  # r -> sorted oracle curvatures
    tag: cl.Family
    default_radius: float | None
    hopf: bool


def _sphere_spec(r):
    a = 0.5 / np.tanh(r / 2)
    return sorted([a, a, 1 / np.tanh(r)])


def _tube_ch1_spec(r):
    a = 0.5 * np.tanh(r / 2)
    return sorted([a, a, 1 / np.tanh(r)])


def _tube_rh2_spec(r):
    return sorted([np.tanh(r), 0.5 * np.tanh(r / 2), 0.5 / np.tanh(r / 2)])


def _equidistant_spec(r):
    return sorted(cl.family_triple(0.5 * np.tanh(r / 2)).lam)


FAMILIES = {
    "sphere": FamilySpec(hs.geodesic_sphere, _sphere_spec, cl.Family.GeodesicSphere, 1.0, True),
    "horosphere": FamilySpec(lambda r: hs.horosphere(), lambda r: [0.5, 0.5, 1.0], cl.Family.Horosphere, None, True),
    "tube-ch1": FamilySpec(lambda r: hs.tube("CH1", r), _tube_ch1_spec, cl.Family.TubeCH1, 1.0, True),
    "tube-rh2": FamilySpec(lambda r: hs.tube("RH2", r), _tube_rh2_spec, cl.Family.TubeRH2, 1.0, True),
    "w3": FamilySpec(lambda r: hs.ruled_W3(), lambda r: [-0.5, 0.0, 0.5], cl.Family.RuledW3, None, False),
    "w3-equidistant": FamilySpec(
        lambda r: jc.displace_patch(hs.ruled_W3(), r), _equidistant_spec, cl.Family.WEquidistant,
        float(jc.radius_for_lambda3(0.2)), False,
    ),
}


def build_family(name, radius=None, counts=None):
    """Patch for a named family, with the grid counts replaced when given."""
    spec = FAMILIES.get(name)
    if spec is None:
        raise UsageError(f"unknown family {name!r}; choose from {', '.join(FAMILIES)}")
    if spec.default_radius is None:
        if radius is not None:
            raise UsageError(f"family {name} takes no radius")
        r = None
    else:
        r = spec.default_radius if radius is None else float(radius)
        if name == "w3-equidistant":
            if r == 0 or not np.isfinite(r):
                raise UsageError("w3-equidistant needs a nonzero finite radius")
        elif not r > 0:
            raise UsageError(f"{name} needs a positive radius")
    if name == "w3-equidistant":
        base = hs.ruled_W3()
        if counts is not None:
            base = replace(base, grid=base.grid.with_counts(counts))
        return jc.displace_patch(base, r), r, spec
    patch = spec.build(r)
    if counts is not None:
        patch = replace(patch, grid=patch.grid.with_counts(counts))
    return patch, r, spec


# -- commands -------------------------------------------------------------------------------


def _principal_table(data):
    return [{"u": d.at, "lambda": d.lambdas, "b": d.b} for d in data]


def cmd_verify(family, radius, config: RunConfig) -> Report:
    n = config.grid["verify"]
    patch, r, spec = build_family(family, radius, (n, 2, 2))
    rep = Report("verify", {"family": family, "radius": r, "grid": [n, 2, 2]})
    data, _ = hs.measure(patch)
    lam = np.array([d.lambdas for d in data])
    rep.add(Check.below("nodes_spread", hs.spread(data), config.tol("spread")))
    rep.add(Check.close("spectrum", spec.spectrum(r), lam.mean(axis=0), config.tol("spectrum")))
    rep.add(Check.below("unit_b", max(abs(d.b @ d.b - 1) for d in data), 1e-9))
    rep.add(Check.equal("hopf", spec.hopf, all(hs.is_hopf(d) for d in data)))
    g = data[0].g()
    rep.result["g"] = g
    rep.result["mean_curvature"] = float(lam.sum(axis=1).mean())

    results = [cl.classify(d, tol=config.tol("classify")) for d in data]
    tags = sorted({res.family.value for res in results})
    rep.add(Check.equal("classification", [spec.tag.value], tags))
    if r is not None:
        params = [res.parameter for res in results]
        got = float(np.mean([p for p in params if p is not None])) if all(p is not None for p in params) else np.nan
        rep.add(Check.close("radius", r, got, config.tol("classify")))
    rep.result["classification"] = results[0].to_dict()

    if family == "w3":
        rep.add(Check.below("mean_curvature", rep.result["mean_curvature"], 1e-4))
    if g == 3:
        lemma = cl.check_lemma_contractions(patch, patch.grid.center)
        rep.add(Check.below("codazzi_mixed", lemma.mixed, config.tol("codazzi")))
        rep.add(Check.below("codazzi_diagonal", lemma.diagonal, config.tol("codazzi")))
        rep.result["measured_x"] = lemma.x
        if not spec.hopf:
            res = max(hs.ruled_form_residual(d) for d in data)
            if family == "w3":
                rep.add(Check.below("ruled_form", res, config.tol("ruled")))
            else:
                rep.add(Check.above("ruled_form_absent", res, 1e-2))
    rep.tables["principal"] = _principal_table(data)
    if config.out is not None:
        hs.export_csv(_ensure(config.out) / f"verify_{family}.csv", data)
    return rep


SCAN_COLUMNS = ["lambda3", "lambda1", "lambda2", "b1sq", "b2sq", "x1", "x2", "x3"]


def scan_rows(lo, hi, n):
    rows = []
    for l3 in np.linspace(lo, hi, n):
        t = cl.family_triple(l3)
        b1sq, b2sq = cl.b_from_lambda(l3)
        b = np.sqrt([b1sq, b2sq, 0.0])
        x = cl.x_from_b(t, b)
        rep = cl.residual_report(t, b)
        rows.append(([float(l3), t.lam[0], t.lam[1], b1sq, b2sq, *x], rep))
    return rows


def cmd_scan(lo, hi, n, config: RunConfig) -> Report:
    if not (-0.5 < lo <= hi < 0.5):
        raise UsageError("scan interval must lie inside (-1/2, 1/2)")
    if n < 2:
        raise UsageError("scan needs at least two values")
    rows = scan_rows(lo, hi, n)
    keys = sorted(rows[0][1])
    worst = {k: max(abs(r[1][k]) for r in rows) for k in keys}
    rep = Report("scan", {"lambda3": [lo, hi], "n": n})
    rep.add(Check.below("max_residual", max(worst.values()), config.tol("analytic")))
    for vals, res in rows:
        if vals[0] == 0.0:
            rep.add(Check.close("lambda3_zero_row", [0, -0.5, 0.5, 0.5, 0.5, 0.25, -0.25, 0], vals, 1e-12))
    rep.result["max_residuals"] = worst
    rep.tables["rows"] = [dict(zip(SCAN_COLUMNS, v), **r) for v, r in rows]
    if config.out is not None:
        write_csv(_ensure(config.out) / "scan.csv", SCAN_COLUMNS + keys,
                  [v + [r[k] for k in keys] for v, r in rows])
    return rep


def jacobi_grid(n):
    """n values of lambda3 in [-0.49, 0.49]: n + 1 even steps with the one nearest 0 dropped."""
    vals = np.linspace(-0.49, 0.49, n + 1)
    return np.sort(vals[np.argsort(np.abs(vals), kind="stable")[1:]])


def random_jacobi_cases(n, seed):
    """Random (point, normal, frame, curvatures, t) tuples for the ODE comparison."""
    rng = np.random.default_rng(seed)
    cases = []
    while len(cases) < n:
        x = rng.normal(size=4)
        x *= 0.6 * rng.random() / np.linalg.norm(x)
        xi = rng.normal(size=4)
        xi /= amb.norm(x, xi)
        b = rng.normal(size=3)
        b /= np.linalg.norm(b)
        U = jc.synthetic_frame(x, xi, b)
        k = len(cases) % 3
        lam = rng.uniform(-1.0, 1.0)
        cases.append((x, xi, U[k], b[k], lam, 2 * rng.random()))
    return cases


def jacobi_ode_errors(n, seed, rtol):
    errs = []
    for x, xi, v, beta, lam, t in random_jacobi_cases(n, seed):
        try:
            sol = jc.jacobi_integrate(jc.JacobiInput(x, xi, v, lam * v), t, rtol)
        except DomainError:
            continue
        ref = jc.closed_form_field(lam, beta, sol)
        errs.append(float(amb.norm(sol.point, sol.zeta - ref)))
    return errs


_DC_TOLS = {"det_D": "det_D", "det_Dprime": "det_D", "det_D_derivative": "det_D",
            "trace_C": "trace_C", "det_C": "det_C", "eig_C": "eig_C", "f3_prime": "f3_prime"}


def cmd_jacobi_check(config: RunConfig, lambda3=None) -> Report:
    rep = Report("jacobi-check", {"lambda3": lambda3, "ode_tol": config.ode_tol, "seed": config.seed,
                                  "cases": config.grid["jacobi_cases"]})
    errs = jacobi_ode_errors(config.grid["jacobi_cases"], config.seed, config.ode_tol)
    rep.add(Check.below("ode_vs_closed_form", max(errs), config.tol("jacobi")))
    rep.result["ode_max_error"] = max(errs)
    values = [lambda3] if lambda3 is not None else list(jacobi_grid(config.grid["jacobi"]))
    table = []
    for l3 in values:
        try:
            frame = jc.DisplacementFrame.from_lambda3(l3)
        except DomainError as exc:
            raise UsageError(str(exc)) from exc
        res = jc.verify_DC_identities(frame)
        table.append({"lambda3": float(l3), "r": frame.r, **res})
    for key, tol_name in _DC_TOLS.items():
        rep.add(Check.below(key, max(row[key] for row in table), config.tol(tol_name)))
    rep.tables["identities"] = table
    if lambda3 is not None:
        frame = jc.DisplacementFrame.from_lambda3(lambda3)
        m = jc.build_D(frame, frame.r)
        rep.result.update({"r": frame.r, "det_D": float(np.linalg.det(m.D)), "D": m.D,
                           "Dprime": m.Dprime, "C": m.C, "frame": {"lambda": frame.lambdas, "b": frame.b}})
    return rep


def cmd_solve_system(config: RunConfig, lambda3=None, lambdas=None) -> Report:
    if (lambda3 is None) == (lambdas is None):
        raise UsageError("solve-system needs exactly one of --lambda3 or --lambdas")
    try:
        t = cl.family_triple(lambda3) if lambdas is None else cl.CurvatureTriple(tuple(lambdas))
        system = cl.build_system(t)
    except DomainError as exc:
        raise UsageError(str(exc)) from exc
    sol = cl.solve_system(system, seed=config.seed)
    other = cl.solve_system(system, seed=config.seed + 1)
    rep = Report("solve-system", {"lambda": t.lam, "seed": config.seed, "starts": sol.starts})
    rep.add(Check.below("root_count_over_8", max(0, len(sol.roots) - 8), 0.5))
    rep.add(Check.below("max_eq7_residual", max((r.residual for r in sol.roots), default=0.0), config.tol("roots")))
    same = len(sol.roots) == len(other.roots) and all(
        np.abs(np.asarray(a.x) - np.asarray(b.x)).max() < 1e-9 for a, b in zip(sol.roots, other.roots))
    rep.add(Check.equal("seed_independent", True, bool(same)))
    if lambda3 is not None and abs(lambda3) < 0.5:
        b = np.sqrt(list(cl.b_from_lambda(lambda3)) + [0.0])
        x = cl.x_from_b(t, b)
        rep.add(Check.equal("contains_family_root", True, sol.contains(x, 1e-9)))
        rep.result["family_root"] = x
    rep.result["roots"] = [{"x": r.x, "residual": r.residual, "hits": r.hits} for r in sol.roots]
    rep.result["solver"] = {"converged": sol.converged, "iterations": sol.iterations,
                            "dedup_radius": sol.dedup_radius, **sol.diagnostics}
    return rep


def load_principal(path):
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return hs.PrincipalData.from_dict(raw)
    except (OSError, json.JSONDecodeError, ValueError, TypeError) as exc:
        raise UsageError(f"cannot read principal data from {path}: {exc}") from exc


def cmd_classify(path, config: RunConfig) -> Report:
    data = load_principal(path)
    res = cl.classify(data, tol=config.tol("classify"))
    rep = Report("classify", {"input": str(path), "tolerance": config.tol("classify")})
    rep.add(Check.equal("classified", True, res.family is not cl.Family.Unclassified))
    rep.result = res.to_dict()
    return rep


# -- argument handling --------------------------------------------------------------------------


def _ensure(path):
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE",
                        help="override a named tolerance (repeatable)")
    common.add_argument("--grid", type=int, help="grid size for the command")
    common.add_argument("--seed", type=int, help="seed for random cases and multistart")
    common.add_argument("--out", type=Path, help="directory for the JSON report and CSV tables")
    common.add_argument("--config", type=Path, help="JSON config file (flags take precedence)")

    p = argparse.ArgumentParser(prog="cpch2", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", parents=[common], help="construct, measure and classify a family")
    v.add_argument("--family", required=True, choices=sorted(FAMILIES))
    v.add_argument("--radius", type=float)
    s = sub.add_parser("scan", parents=[common], help="relation residuals along the non-Hopf family")
    s.add_argument("--lambda3", type=float, nargs=2, metavar=("MIN", "MAX"), default=(-0.49, 0.49))
    j = sub.add_parser("jacobi-check", parents=[common], help="Jacobi ODE and D/C identities")
    j.add_argument("--lambda3", type=float)
    j.add_argument("--ode-tol", type=float)
    q = sub.add_parser("solve-system", parents=[common], help="real roots of the quadratic system")
    q.add_argument("--lambda3", type=float)
    q.add_argument("--lambdas", type=float, nargs=3)
    c = sub.add_parser("classify", parents=[common], help="classify principal data from a JSON file")
    c.add_argument("input", type=Path)
    return p


_GRID_KEY = {"verify": "verify", "scan": "scan", "jacobi-check": "jacobi"}


def resolve_config(args) -> RunConfig:
    cfg = RunConfig(out=default_out_dir())
    if args.config is not None:
        cfg = RunConfig.from_file(args.config, cfg)
    tols = dict(parse_tol(t) for t in args.tol)
    grid = {}
    if args.grid is not None:
        key = _GRID_KEY.get(args.command)
        if key is None:
            raise ConfigError(f"--grid does not apply to {args.command}")
        grid[key] = args.grid
    kw = {}
    if args.seed is not None:
        kw["seed"] = args.seed
    if args.out is not None:
        kw["out"] = args.out
    if getattr(args, "ode_tol", None) is not None:
        kw["ode_tol"] = args.ode_tol
    return cfg.merged(tols, grid, **kw)


def run(args, config):
    if args.command == "verify":
        return cmd_verify(args.family, args.radius, config)
    if args.command == "scan":
        return cmd_scan(args.lambda3[0], args.lambda3[1], config.grid["scan"], config)
    if args.command == "jacobi-check":
        return cmd_jacobi_check(config, args.lambda3)
    if args.command == "solve-system":
        return cmd_solve_system(config, args.lambda3, args.lambdas)
    return cmd_classify(args.input, config)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve_config(args)
        report = run(args, config)
    except (UsageError, ConfigError) as exc:
        print(f"cpch2 {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, NotApplicable) as exc:
        print(f"cpch2 {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"cpch2 {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    text = report.to_json()
    sys.stdout.write(text)
    if config.out is not None:
        report.write(_ensure(config.out) / f"{args.command}.json")
    return EXIT_OK if report.overall else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
