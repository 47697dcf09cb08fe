"""Two-sided orbit segments of the surface automorphism."""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DegenerateFiber, InvalidPoint, NotOnSurface
from .exact_arith import ProjPoint, coord_bits, naive_height
from .surfaces import Surface, SurfacePoint, apply_map


@dataclass(frozen=True)
class OrbitEntry:
    n: int
    point: SurfacePoint
    h_H: float          # height for H = sum of the hyperplane pullbacks
    coord_bits: int


def ample_height(pt: SurfacePoint) -> float:
    return sum(naive_height(f) for f in pt.factors)


def _entry(n, factors) -> OrbitEntry:
    pt = SurfacePoint(tuple(ProjPoint(tuple(f)) for f in factors))
    return OrbitEntry(n, pt, ample_height(pt), max(coord_bits(f) for f in pt.factors))


@dataclass
class OrbitRecord:
    """f^n(center) for n in [n_min, n_max], sorted by n.

    ``period`` is set when the forward leg returned to the center; the record
    then holds one full cycle.  ``degenerate_hit`` records where a leg stopped
    early: {"direction", "step", "axis"}.
    """

    center: SurfacePoint
    entries: list = field(default_factory=list)
    degenerate_hit: list = field(default_factory=list)
    period: int | None = None

    @property
    def truncated_at(self) -> tuple[int, int]:
        return self.entries[0].n, self.entries[-1].n

    def index(self, n: int) -> int:
        lo = self.entries[0].n
        if not lo <= n <= self.entries[-1].n:
            raise KeyError(n)
        return n - lo

    def at(self, n: int) -> OrbitEntry:
        if self.period is not None:
            n %= self.period
        return self.entries[self.index(n)]

    def has(self, n: int) -> bool:
        if self.period is not None:
            return True
        return bool(self.entries) and self.entries[0].n <= n <= self.entries[-1].n

    def forward(self):
        return [e for e in self.entries if e.n >= 0]

    def backward(self):
        return [e for e in self.entries if e.n <= 0][::-1]

    def leg_blocked(self, direction: str) -> bool:
        return any(h["direction"] == direction for h in self.degenerate_hit)

    def to_json(self) -> dict:
        return {"center": self.center.to_json(),
                "n_min": self.truncated_at[0], "n_max": self.truncated_at[1],
                "period": self.period, "degenerate_hit": self.degenerate_hit,
                "entries": [{"n": e.n, "h_H": e.h_H, "coord_bits": e.coord_bits}
                            for e in self.entries]}


def _coords(pt):
    return tuple(f.coords for f in pt.factors)


def extend(surface: Surface, record: OrbitRecord, n_min: int, n_max: int) -> OrbitRecord:
    """Grow ``record`` in place to cover [n_min, n_max] where possible."""
    if record.period is not None:
        return record
    lo, hi = record.truncated_at
    if n_max > hi and not record.leg_blocked("forward"):
        factors = _coords(record.entries[-1].point)
        for n in range(hi + 1, n_max + 1):
            try:
                factors = apply_map(surface, factors, "forward")
            except DegenerateFiber as exc:
                record.degenerate_hit.append({"direction": "forward", "step": n, "axis": exc.axis})
                break
            if factors == _coords(record.center):
                record.period = n
                # keep exactly one cycle: drop the backward leg, it repeats
                record.entries = [e for e in record.entries if e.n >= 0]
                return record
            record.entries.append(_entry(n, factors))
    lo, hi = record.truncated_at
    if n_min < lo and not record.leg_blocked("backward"):
        factors = _coords(record.entries[0].point)
        for n in range(lo - 1, n_min - 1, -1):
            try:
                factors = apply_map(surface, factors, "backward")
            except DegenerateFiber as exc:
                record.degenerate_hit.append({"direction": "backward", "step": n, "axis": exc.axis})
                break
            if factors == _coords(record.center):
                record.period = -n
                record.entries = [e for e in record.entries if e.n >= 0][: -n]
                return record
            record.entries.insert(0, _entry(n, factors))
    return record


def orbit(surface: Surface, pt: SurfacePoint, n_min: int, n_max: int,
          check: bool = True) -> OrbitRecord:
    """Iterate f and f^-1 from ``pt``; legs stop early on a degenerate fiber."""
    if n_min > 0 or n_max < 0:
        raise ValueError("need n_min <= 0 <= n_max")
    if check:
        surface.check_point(pt)
        if not surface.on_surface(pt):
            raise NotOnSurface(f"{pt!r} is not on the surface")
    rec = OrbitRecord(pt, [_entry(0, _coords(pt))])
    return extend(surface, rec, n_min, n_max)
