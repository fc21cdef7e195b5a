"""Displace the ruled minimal hypersurface W3 by signed distances r and compare the
measured principal data with the closed-form one-parameter family.

    python3 scripts/equidistant_scan.py --radii -1.2 1.2 13 --csv out/equidistant.csv
"""
import argparse

import numpy as np

from cpch2 import classifier as cl
from cpch2 import hypersurfaces as hs
from cpch2.jacobi import displace_patch
from cpch2.report import write_csv


def scan(radii):
    w3 = hs.ruled_W3()
    center = np.array([w3.grid.center])
    rows = []
    for r in radii:
        if abs(r) < 1e-12:
            continue
        (d,), _ = hs.measure(displace_patch(w3, r), center)
        l3 = 0.5 * np.tanh(r / 2)
        b_sq = np.sort(cl.b_from_lambda(l3))
        res = cl.classify(d)
        mid = np.sort(d.lambdas)[1]
        rows.append((r, mid, l3, abs(mid - l3), np.abs(np.sort(d.b**2)[1:] - b_sq).max(), res.family.value,
                     res.parameter if res.parameter is not None else np.nan))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--radii", nargs=3, type=float, default=[-1.2, 1.2, 13], metavar=("LO", "HI", "N"))
    ap.add_argument("--csv")
    args = ap.parse_args(argv)
    lo, hi, n = args.radii
    rows = scan(np.linspace(lo, hi, int(n)))
    print(f"{'r':>8} {'lambda3':>10} {'tanh(r/2)/2':>12} {'err':>9} {'b2 err':>9}  family (param)")
    for r, mid, l3, err, berr, fam, par in rows:
        print(f"{r:8.4f} {mid:10.6f} {l3:12.6f} {err:9.1e} {berr:9.1e}  {fam} ({par:.6f})")
    if args.csv:
        write_csv(args.csv, ["r", "lambda3_measured", "lambda3_closed", "err", "b_sq_err", "family", "parameter"],
                  rows)


if __name__ == "__main__":
    main()
