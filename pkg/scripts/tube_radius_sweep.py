"""Sweep the radius of the tube around a totally real totally geodesic RH2 and watch the
number of distinct principal curvatures drop from three to two at r = ln(2 + sqrt 3).

    python3 scripts/tube_radius_sweep.py --radii 0.6 2.0 15
"""
import argparse

import numpy as np
from scipy.optimize import brentq

from cpch2 import hypersurfaces as hs
from cpch2.report import write_csv


def closed_form(r):
    return np.sort([np.tanh(r), 0.5 * np.tanh(r / 2), 0.5 / np.tanh(r / 2)])


def coincidence_radius():
    # tanh r meets coth(r/2)/2 exactly once on (0, inf)
    return brentq(lambda r: np.tanh(r) - 0.5 / np.tanh(r / 2), 0.1, 5.0, xtol=1e-15)


def sweep(radii):
    rows = []
    for r in radii:
        patch = hs.tube("RH2", r)
        (d,), _ = hs.measure(patch, np.array([patch.grid.center]))
        err = np.abs(np.sort(d.lambdas) - closed_form(r)).max()
        rows.append((r, *np.sort(d.lambdas), d.g(), err))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--radii", nargs=3, type=float, default=[0.6, 2.0, 15], metavar=("LO", "HI", "N"))
    ap.add_argument("--csv")
    args = ap.parse_args(argv)
    lo, hi, n = args.radii
    rc = coincidence_radius()
    radii = np.sort(np.append(np.linspace(lo, hi, int(n)), rc))
    rows = sweep(radii)
    print(f"coincidence radius {rc:.12f}, ln(2+sqrt3) = {np.log(2 + np.sqrt(3)):.12f}")
    print(f"{'r':>8} {'l1':>10} {'l2':>10} {'l3':>10} {'g':>2} {'err':>9}")
    for r, a, b, c, g, err in rows:
        mark = "  <- critical" if abs(r - rc) < 1e-12 else ""
        print(f"{r:8.4f} {a:10.6f} {b:10.6f} {c:10.6f} {g:2d} {err:9.1e}{mark}")
    if args.csv:
        write_csv(args.csv, ["r", "lambda1", "lambda2", "lambda3", "g", "err"], rows)


if __name__ == "__main__":
    main()
