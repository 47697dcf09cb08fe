"""Automorphisms of P^1 over Q: classification, periodic points and orbit growth."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .errors import NotInvertible, PeriodicCenter, PeriodicMap
from .exact_arith import ProjPoint, QuadNum, naive_height, normalize, normalize_int, squarefree_decompose


class MobiusType(str, Enum):
    I_periodic = "I_periodic"
    II_two_fixed = "II_two_fixed"
    III_parabolic = "III_parabolic"


@dataclass(frozen=True)
class MobiusMap:
    """z -> (p z + q) / (r z + s) acting on (x : y), stored primitive."""

    F: tuple

    def __post_init__(self):
        (p, q), (r, s) = self.F
        ents = [int(v) for v in (p, q, r, s)]
        if ents[0] * ents[3] - ents[1] * ents[2] == 0:
            raise NotInvertible("det F = 0")
        g = math.gcd(*ents)
        lead = next(v for v in ents if v)
        g = -g if lead < 0 else g
        ents = [v // g for v in ents]
        object.__setattr__(self, "F", ((ents[0], ents[1]), (ents[2], ents[3])))

    @classmethod
    def of(cls, F) -> "MobiusMap":
        return F if isinstance(F, MobiusMap) else cls(tuple(tuple(r) for r in F))

    @property
    def trace(self) -> int:
        return self.F[0][0] + self.F[1][1]

    @property
    def det(self) -> int:
        (p, q), (r, s) = self.F
        return p * s - q * r

    def is_scalar(self) -> bool:
        (p, q), (r, s) = self.F
        return q == 0 and r == 0 and p == s

    def apply(self, pt) -> ProjPoint:
        x, y = pt.coords if isinstance(pt, ProjPoint) else pt
        (p, q), (r, s) = self.F
        return ProjPoint(normalize_int((p * x + q * y, r * x + s * y)))

    def inverse(self) -> "MobiusMap":
        (p, q), (r, s) = self.F
        return MobiusMap(((s, -q), (-r, p)))

    def compose(self, other: "MobiusMap") -> "MobiusMap":
        """self o other."""
        A, B = self.F, other.F
        return MobiusMap(tuple(tuple(sum(A[i][k] * B[k][j] for k in range(2)) for j in range(2))
                               for i in range(2)))

    def power(self, n: int) -> "MobiusMap":
        base = self if n >= 0 else self.inverse()
        out = MobiusMap(((1, 0), (0, 1)))
        for _ in range(abs(n)):
            out = out.compose(base)
        return out

    def to_json(self):
        return [list(r) for r in self.F]


def classify(F) -> MobiusType:
    """Type from the conjugation invariant t = tr^2/det - 2 = alpha/beta + beta/alpha."""
    m = MobiusMap.of(F)
    if m.is_scalar():
        return MobiusType.I_periodic
    tr, det = m.trace, m.det
    if tr * tr == 4 * det:
        return MobiusType.III_parabolic
    t = Fraction(tr * tr, det) - 2
    # alpha/beta is a root of z^2 - t z + 1; it is a root of unity iff t is
    # 2 cos(2 pi k/n) and rational, i.e. t in {-2, -1, 0, 1, 2}
    if t in (-2, -1, 0, 1, 2):
        return MobiusType.I_periodic
    return MobiusType.II_two_fixed


def order(F, max_order: int = 12) -> int | None:
    """Least n <= max_order with F^n scalar, i.e. f^n = id on P^1."""
    m = MobiusMap.of(F)
    cur = m
    for n in range(1, max_order + 1):
        if cur.is_scalar():
            return n
        cur = cur.compose(m)
    return None


def fixed_points(F) -> list | None:
    """Fixed points of F on P^1; None when F is the identity.

    Rational points are ProjPoints.  Irrational ones come as a pair
    (QuadNum z, 1) meaning (z : 1); the two are Galois conjugate.
    """
    m = MobiusMap.of(F)
    if m.is_scalar():
        return None
    (p, q), (r, s) = m.F
    # r z^2 + (s - p) z - q = 0 in the chart (z : 1); (1 : 0) is fixed iff r = 0
    if r == 0:
        out = [normalize((1, 0))]
        if p != s:
            out.append(normalize((Fraction(q, s - p), 1)))
        return out
    a, b, c = r, s - p, -q
    disc = b * b - 4 * a * c
    if disc == 0:
        return [normalize((Fraction(-b, 2 * a), 1))]
    sq = math.isqrt(disc) if disc > 0 else -1
    if sq >= 0 and sq * sq == disc:
        roots = sorted({Fraction(-b + sq, 2 * a), Fraction(-b - sq, 2 * a)})
        return [normalize((z, 1)) for z in roots]
    k, d = squarefree_decompose(disc)
    roots = [QuadNum(Fraction(-b, 2 * a), Fraction(sgn * k, 2 * a), d) for sgn in (1, -1)]
    return [(z, 1) for z in roots]


def is_periodic_point(F, x: ProjPoint) -> bool:
    """Type I: every point.  Types II and III: exactly the fixed points."""
    m = MobiusMap.of(F)
    if classify(m) is MobiusType.I_periodic:
        return True
    return m.apply(x) == x


def p1_orbit(F, x: ProjPoint, T: float, patience: int = 16) -> list:
    """Orbit points with heights, both legs, until ``patience`` consecutive heights exceed T.

    Returns a list of (n, point, height) sorted by n.
    """
    m = MobiusMap.of(F)
    x = normalize(x.coords if isinstance(x, ProjPoint) else x)
    out = [(0, x, naive_height(x))]
    for sign, g in ((1, m), (-1, m.inverse())):
        cur, above, n = x, 0, 0
        while above < patience:
            n += 1
            cur = g.apply(cur)
            h = naive_height(cur)
            out.append((sign * n, cur, h))
            above = above + 1 if h > T else 0
    out.sort(key=lambda e: e[0])
    return out


def p1_count(F, x, T: float, patience: int = 16) -> int:
    """N(T) = #{y in the orbit of x with h(y) <= T}, for non-periodic x."""
    x = x if isinstance(x, ProjPoint) else normalize(x)
    if is_periodic_point(F, x):
        raise PeriodicCenter("x is periodic; its orbit is finite")
    if T < 0:
        return 0
    return sum(1 for _, _, h in p1_orbit(F, x, T, patience) if h <= T)


def p1_counts(F, x, T_grid, patience: int = 16) -> list:
    """N(T) for every T in the grid from one orbit computation."""
    x = x if isinstance(x, ProjPoint) else normalize(x)
    if is_periodic_point(F, x):
        raise PeriodicCenter("x is periodic; its orbit is finite")
    grid = list(T_grid)
    orb = p1_orbit(F, x, max(grid), patience)
    hs = [h for _, _, h in orb]
    return [sum(1 for h in hs if h <= T) if T >= 0 else 0 for T in grid]


@dataclass(frozen=True)
class RegimeFit:
    regime: str
    residual_linear: float
    residual_exponential: float
    counts: tuple
    grid: tuple
    slope_linear: float
    slope_exponential: float


def _fit(X, N):
    A = np.column_stack([X, np.ones_like(X)])
    coef, *_ = np.linalg.lstsq(A, N, rcond=None)
    r = N - A @ coef
    return float(np.linalg.norm(r) / np.linalg.norm(N)), float(coef[0])


def growth_regime(F, x, T_grid=(4, 5, 6, 7, 8), patience: int = 16) -> RegimeFit:
    """Fit N(T) as affine in T and affine in exp(T); report the better fit."""
    m = MobiusMap.of(F)
    if classify(m) is MobiusType.I_periodic:
        raise PeriodicMap("type I maps have only finite orbits")
    grid = tuple(float(t) for t in T_grid)
    counts = p1_counts(m, x, grid, patience)
    N = np.array(counts, dtype=float)
    T = np.array(grid)
    rl, sl = _fit(T, N)
    re, se = _fit(np.exp(T), N)
    return RegimeFit("linear" if rl <= re else "exponential", rl, re, tuple(counts), grid, sl, se)
