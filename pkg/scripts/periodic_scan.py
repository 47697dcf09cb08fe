"""Periodic-point scan at several height bounds, with the max periodic height per bound."""
import argparse
import time

from surfdyn import presets
from surfdyn.dynamics import periodic_scan


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--family", choices=("wehler", "triple"), default="wehler")
    ap.add_argument("--bounds", type=float, nargs="+", default=[2.0, 4.0, 6.0])
    ap.add_argument("--max-period", type=int, default=12)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    S = presets.surface(args.family)
    print("bound,points,periodic,unresolved,max_periodic_height,seconds")
    for B in args.bounds:
        t0 = time.perf_counter()
        res = periodic_scan(S, B, args.max_period, threads=args.threads)
        print(f"{B},{res.points_checked},{len(res.hits)},{len(res.indeterminate)},"
              f"{res.max_periodic_height},{time.perf_counter() - t0:.1f}")


if __name__ == "__main__":
    main()
