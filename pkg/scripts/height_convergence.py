"""Canonical heights and functional-equation residuals against truncation depth."""
import argparse
import csv
import sys

import mpmath

from surfdyn import presets
from surfdyn.heights import functional_equation_residual
from surfdyn.orbits import orbit
from surfdyn.surfaces import find_points


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--family", choices=("wehler", "triple"), default="wehler")
    ap.add_argument("--height-bound", type=float, default=3.0)
    ap.add_argument("--points", type=int, default=5)
    ap.add_argument("--max-depth", type=int, default=4)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    S = presets.surface(args.family)
    pts = find_points(S, args.height_bound)
    pts = pts[:: max(1, len(pts) // args.points)][: args.points]
    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(fh)
    w.writerow(["point", "depth", "h_plus", "h_minus", "h_D", "error_bound", "residual", "bound"])
    for p in pts:
        rec = orbit(S, p, -args.max_depth - 1, args.max_depth + 1)
        for d in range(1, args.max_depth + 1):
            fe = functional_equation_residual(S, p, d, record=rec)
            c = fe.center
            w.writerow([repr(p), d] + [mpmath.nstr(v, 17) for v in
                                       (c.h_plus, c.h_minus, c.h_D, c.error_bound, fe.residual, fe.bound)])
    if fh is not sys.stdout:
        fh.close()


if __name__ == "__main__":
    main()
