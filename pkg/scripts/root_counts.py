"""Count real roots of the quadratic system along the one-parameter family and check
them against the Bezout bound and the predicted family root.

    python3 scripts/root_counts.py --n 41 --seeds 0 1 2
"""
import argparse

import numpy as np

from cpch2 import classifier as cl


def survey(grid, seeds):
    rows = []
    for l3 in grid:
        t = cl.family_triple(l3)
        b = np.sqrt(list(cl.b_from_lambda(l3)) + [0.0])
        system = cl.build_system(t)
        sets = [cl.solve_system(system, seed=s) for s in seeds]
        counts = {len(s.roots) for s in sets}
        far = np.abs(sets[0].as_array()).max()
        rows.append((l3, sorted(counts), sets[0].contains(cl.x_from_b(t, b), 1e-9), far, cl.root_bound(system)))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=41)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    args = ap.parse_args(argv)
    grid = np.linspace(-0.49, 0.49, args.n)
    print(f"{'lambda3':>8} {'roots':>8} {'family':>7} {'max|x|':>8} {'bound':>8}")
    for l3, counts, hit, far, bound in survey(grid, args.seeds):
        print(f"{l3:8.4f} {','.join(map(str, counts)):>8} {str(hit):>7} {far:8.3f} {bound:8.2f}")


if __name__ == "__main__":
    main()
