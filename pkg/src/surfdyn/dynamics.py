"""Orbits, periodic points and orbit-counting statistics."""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import mpmath

from .errors import (DegenerateFiber, Indeterminate, InsufficientOrbit, InvalidPoint,
                     NotOnSurface, PeriodicCenter)
from .heights import (DEFAULT_PRECISION, CanonicalHeightResult, canonical_at, height_model)
from .orbits import OrbitEntry, OrbitRecord, ample_height, extend, orbit
from .surfaces import Surface, SurfacePoint, _normalize_mod, apply_map, find_points

__all__ = ["OrbitEntry", "OrbitRecord", "orbit", "extend", "ample_height", "detect_periodic",
           "count_orbit", "sigma_count", "counting_report", "CountingReport", "periodic_scan",
           "ScanResult", "orbit_invariant"]

# primes for the reduction filter; large enough that a random orbit mod p
# essentially never closes up within a dozen steps
FILTER_PRIMES = (10007, 10009, 10037, 10039, 10061)
DEFAULT_LOG_T_GRID = tuple(range(4, 13))


def _coords(pt: SurfacePoint):
    return tuple(f.coords for f in pt.factors)


def _period_mod(surface: Surface, pt: SurfacePoint, p: int, N: int) -> int | None:
    """Least r <= N with f^r(x) = x mod p, or None.  Raises on bad reduction."""
    start = tuple(_normalize_mod(f, p) for f in _coords(pt))
    cur = start
    for r in range(1, N + 1):
        cur = apply_map(surface, cur, "forward", mod=p)
        if cur == start:
            return r
    return None


def detect_periodic(surface: Surface, pt: SurfacePoint, max_period: int,
                    primes=FILTER_PRIMES, bit_cap: int = 1 << 22) -> int | None:
    """Smallest p <= max_period with f^p(pt) = pt, else None.

    A rational period must be a multiple of the period of the reduction mod
    any prime of good reduction along the orbit, so a reduction that does not
    return within ``max_period`` steps rules periodicity out.  Otherwise the
    orbit is iterated exactly; if coordinates outgrow ``bit_cap`` bits or a
    fiber degenerates first, the answer is :class:`Indeterminate`.
    """
    if max_period < 1:
        raise ValueError("max_period must be >= 1")
    if not surface.on_surface(pt):
        raise NotOnSurface(f"{pt!r} is not on the surface")
    step = 1
    for p in primes:
        try:
            r = _period_mod(surface, pt, p, max_period)
        except (DegenerateFiber, InvalidPoint):
            continue
        if r is None:
            return None
        step = math.lcm(step, r) if step else r
        if step > max_period:
            return None
    start = _coords(pt)
    cur = start
    for n in range(1, max_period + 1):
        try:
            cur = apply_map(surface, cur, "forward")
        except DegenerateFiber as exc:
            raise Indeterminate(f"degenerate fiber at step {n} before the period was resolved") from exc
        if cur == start:
            return n
        if max(int(c).bit_length() for f in cur for c in f) > bit_cap:
            raise Indeterminate(f"coordinates exceed {bit_cap} bits at step {n}")
    return None


# ---------------------------------------------------------------------------
# counting
# ---------------------------------------------------------------------------

def _leg_covers(record: OrbitRecord, T: float, direction: str) -> bool:
    if record.period is not None:
        return True
    leg = record.forward() if direction == "forward" else record.backward()
    return leg[-1].h_H > T


def count_orbit(record: OrbitRecord, T: float, forward_only: bool = False) -> int:
    """#{z in the orbit (or forward orbit) with h_H(z) <= T}, exact.

    Requires the last computed point on each counted leg to exceed T.
    """
    legs = ("forward",) if forward_only else ("forward", "backward")
    for d in legs:
        if not _leg_covers(record, T, d):
            raise InsufficientOrbit(f"{d} leg ends at height <= {T}; extend the orbit")
    pts = record.forward() if forward_only or record.period is not None else record.entries
    return sum(1 for e in pts if e.h_H <= T)


def sigma_count(h_plus, h_minus, lam, T) -> int:
    """#{n in Z : lam^n h_plus + lam^-n h_minus <= T} for h_plus, h_minus > 0."""
    if h_plus <= 0 or h_minus <= 0:
        raise ValueError("canonical heights must be positive")
    g = lambda n: lam ** n * h_plus + lam ** (-n) * h_minus
    # g is convex in n with its minimum near n*
    n0 = int(mpmath.nint(mpmath.log(h_minus / h_plus) / (2 * mpmath.log(lam))))
    count = 0
    n = n0
    while g(n) <= T:
        count += 1
        n += 1
    n = n0 - 1
    while g(n) <= T:
        count += 1
        n -= 1
    return count


def orbit_invariant(res: CanonicalHeightResult, lam) -> tuple:
    """(log(h_+ h_-)/log lam, first-order propagated error)."""
    if res.h_plus <= 0 or res.h_minus <= 0:
        raise ValueError("orbit invariant needs both canonical heights positive; increase depth")
    L = mpmath.log(lam)
    val = mpmath.log(res.h_plus * res.h_minus) / L
    err = (res.error_plus / res.h_plus + res.error_minus / res.h_minus) / L
    return val, err


@dataclass
class CountingReport:
    rows: list
    canonical: CanonicalHeightResult
    invariant: object
    invariant_error: object
    slope_ratio: float | None       # (N+(T) / log T) * log lam at the largest grid T
    window_width: float | None
    window_limit: float
    forward_only: bool
    record: OrbitRecord = field(repr=False)

    @property
    def bracket_ok(self) -> bool:
        return all(r["pass"] is not False for r in self.rows)

    def columns(self) -> list:
        if self.forward_only:
            return ["T", "N_plus", "predicted_N_plus"]
        return ["T", "N", "N_plus", "Sigma", "predicted_N", "bracket_lo", "bracket_hi", "pass"]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = self.columns()
        w.writerow(cols)
        for r in self.rows:
            w.writerow([_fmt(r[c]) for c in cols])
        return buf.getvalue()

    def to_json(self) -> dict:
        cols = self.columns()
        return {"center": self.record.center.to_json(),
                "canonical": self.canonical.to_json(),
                "orbit_invariant": _fmt(self.invariant),
                "orbit_invariant_error": _fmt(self.invariant_error),
                "slope_ratio": _fmt(self.slope_ratio),
                "window_width": _fmt(self.window_width),
                "window_limit": _fmt(self.window_limit),
                "bracket_ok": self.bracket_ok,
                "orbit_range": list(self.record.truncated_at),
                "rows": [{c: _fmt(r[c]) for c in cols} for r in self.rows]}


def _fmt(x):
    if x is None or isinstance(x, (bool, int, str)):
        return x
    return f"{float(x):.17g}"


def counting_report(surface: Surface, pt: SurfacePoint, depth: int = 5,
                    log_t_grid=DEFAULT_LOG_T_GRID, forward_only: bool = False,
                    precision: int = DEFAULT_PRECISION, record: OrbitRecord | None = None,
                    max_depth: int = 8) -> CountingReport:
    """Counts N(T), N+(T) and Sigma(T) on a grid T = e^k, with the Sigma bracket test."""
    if record is None:
        record = orbit(surface, pt, -depth, depth)
    else:
        extend(surface, record, -depth, depth)
    if record.period is not None:
        raise PeriodicCenter(f"center is periodic with period {record.period}")
    t_max = math.exp(max(log_t_grid))
    lo, hi = record.truncated_at
    while hi < max_depth and not record.leg_blocked("forward") and record.entries[-1].h_H <= t_max:
        hi += 1
        extend(surface, record, lo, hi)
    while (not forward_only and -lo < max_depth and not record.leg_blocked("backward")
           and record.entries[0].h_H <= t_max):
        lo -= 1
        extend(surface, record, lo, hi)
    res = canonical_at(surface, record, 0, depth, precision)
    if res.zero_plus or res.zero_minus:
        raise PeriodicCenter("canonical heights vanish within the error bound")
    model = height_model(surface.family)
    rows = []
    with mpmath.workprec(precision):
        lam = model.lam.to_mpf(precision)
        L = mpmath.log(lam)
        inv, inv_err = orbit_invariant(res, lam)
        top = 1 + math.log(4) / float(L)
        devs = []
        for k in log_t_grid:
            T = mpmath.e ** k
            Tf = float(T)
            row = {"T": Tf}
            row["N_plus"] = count_orbit(record, Tf, forward_only=True)
            row["predicted_N_plus"] = (k - mpmath.log(res.h_plus)) / L
            if not forward_only:
                row["N"] = count_orbit(record, Tf)
                row["Sigma"] = sigma_count(res.h_plus, res.h_minus, lam, T)
                row["predicted_N"] = 2 * k / L - inv
                devs.append(row["N"] - float(row["predicted_N"]))
                if T * T >= 4 * res.h_plus * res.h_minus:
                    centre = mpmath.log(T * T / (4 * res.h_plus * res.h_minus)) / L
                    row["bracket_lo"] = centre - 1 - inv_err
                    row["bracket_hi"] = centre + top + inv_err
                    row["pass"] = bool(row["bracket_lo"] <= row["Sigma"] <= row["bracket_hi"])
                else:
                    row["bracket_lo"] = row["bracket_hi"] = None
                    row["pass"] = None
            rows.append(row)
        kmax = max(log_t_grid)
        nplus = rows[-1]["N_plus"]
        slope = float(nplus / mpmath.mpf(kmax) * L)
        width = (max(devs) - min(devs)) if devs else None
        limit = 2 + 2 * math.log(4) / float(L) + 2 * float(inv_err)
    return CountingReport(rows, res, inv, inv_err, slope, width, limit, forward_only, record)


# ---------------------------------------------------------------------------
# periodic scan
# ---------------------------------------------------------------------------

@dataclass
class ScanResult:
    height_bound: float
    max_period: int
    points_checked: int
    hits: list                 # dicts: point, period, h_D, error_bound, verified
    indeterminate: list        # points whose status could not be resolved
    max_periodic_height: float | None

    def to_json(self) -> dict:
        return {"height_bound": self.height_bound, "max_period": self.max_period,
                "points_checked": self.points_checked,
                "hits": [{"point": h["point"].to_json(), "period": h["period"],
                          "h_H": _fmt(h["h_H"]), "h_D": _fmt(h["h_D"]),
                          "error_bound": _fmt(h["error_bound"]), "verified": h["verified"]}
                         for h in self.hits],
                "indeterminate": [p.to_json() for p in self.indeterminate],
                "max_periodic_height": _fmt(self.max_periodic_height)}


def verify_period(surface: Surface, pt: SurfacePoint, period: int) -> bool:
    cur = _coords(pt)
    for _ in range(period):
        cur = apply_map(surface, cur, "forward")
    return cur == _coords(pt)


def _classify(surface, pt, N):
    try:
        return detect_periodic(surface, pt, N)
    except Indeterminate:
        return "indeterminate"


def periodic_scan(surface: Surface, height_bound: float, max_period: int, threads: int = 1,
                  depth: int = 5, precision: int = DEFAULT_PRECISION,
                  points: list | None = None) -> ScanResult:
    """Find points of base height <= B and test each for period <= N."""
    if max_period < 1 or height_bound < 0:
        raise ValueError("need max_period >= 1 and height_bound >= 0")
    pts = points if points is not None else find_points(surface, height_bound, threads=threads)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            verdicts = list(ex.map(lambda p: _classify(surface, p, max_period), pts))
    else:
        verdicts = [_classify(surface, p, max_period) for p in pts]
    hits, indet = [], []
    for p, v in zip(pts, verdicts):
        if v == "indeterminate":
            indet.append(p)
        elif v is not None:
            rec = orbit(surface, p, 0, v)
            res = canonical_at(surface, rec, 0, max(depth, v), precision)
            hits.append({"point": p, "period": v, "h_H": ample_height(p),
                         "h_D": res.h_D, "error_bound": res.error_bound,
                         "verified": verify_period(surface, p, v)})
    mph = max((h["h_H"] for h in hits), default=None)
    return ScanResult(height_bound, max_period, len(pts), hits, indet, mph)
