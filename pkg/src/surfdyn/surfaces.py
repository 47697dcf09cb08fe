"""Wehler K3 surfaces in P2 x P2 and (2,2,2) surfaces in (P1)^3.

Both families are double covers of a product of projective spaces, so each
projection has a covering involution.  Over a base point the fiber is the zero
set of a binary quadratic; the involution sends one root to the other using
only the symmetric functions of the roots (Vieta), which keeps everything over
Q.  Coordinates are renormalized after every swap: coordinate growth along
orbits is the dominant cost.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import gmpy2
import numpy as np
from gmpy2 import mpz

from .errors import DegenerateFiber, DegenerateLine, InvalidPoint, NotOnSurface
from .exact_arith import ProjPoint, naive_height, normalize, normalize_int

# ordered degree-2 monomials
MONO_P2 = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))
MONO_P1 = ((0, 0), (0, 1), (1, 1))


def _monos(x, basis):
    return [x[i] * x[j] for i, j in basis]


def _check_int_array(arr, shape, name):
    a = np.asarray(arr, dtype=object)
    if a.shape != shape:
        raise ValueError(f"{name} must have shape {shape}, got {a.shape}")
    out = np.vectorize(int, otypes=[object])(a)
    if not any(v != 0 for v in out.flat):
        raise ValueError(f"{name} must not be identically zero")
    return out


@dataclass(frozen=True)
class SurfacePoint:
    factors: tuple

    def to_json(self) -> list:
        return [p.to_json() for p in self.factors]

    @classmethod
    def from_json(cls, obj) -> "SurfacePoint":
        return cls(tuple(ProjPoint.from_json(f) for f in obj))

    @classmethod
    def of(cls, *coords) -> "SurfacePoint":
        return cls(tuple(normalize(list(c)) for c in coords))

    def __repr__(self):
        return "SurfacePoint(" + ", ".join(map(repr, self.factors)) + ")"


def _other_root(A, B, C, s0, t0, mod=None):
    """Second root (s1:t1) of A s^2 + B s t + C t^2 given the root (s0:t0)."""
    if s0 != 0 and t0 != 0:
        s1, t1 = C * t0, A * s0
    elif t0 == 0:
        s1, t1 = -C, B
    else:
        s1, t1 = -B, A
    if mod is not None:
        s1, t1 = s1 % mod, t1 % mod
    if s1 == 0 and t1 == 0:
        raise DegenerateFiber("residual quadratic vanishes identically")
    return s1, t1


def _normalize_mod(coords, p):
    cs = [c % p for c in coords]
    lead = next((c for c in cs if c), None)
    if lead is None:
        raise InvalidPoint("point reduces to zero")
    inv = pow(lead, -1, p)
    return tuple(c * inv % p for c in cs)


def _kernel_basis(ell, mod=None):
    """Deterministic basis (v, w, j1, j2, k) of {y : ell . y = 0} in P2."""
    nz = [i for i in range(3) if (ell[i] % mod if mod else ell[i]) != 0]
    if not nz:
        raise DegenerateLine("linear form vanishes identically on the fiber")
    k = nz[-1]
    j1, j2 = [j for j in range(3) if j != k]
    v = [0, 0, 0]
    w = [0, 0, 0]
    v[j1], v[k] = ell[k], -ell[j1]
    w[j2], w[k] = ell[k], -ell[j2]
    return v, w, j1, j2, k


class Surface:
    """Common interface of the two families."""

    family: str
    factor_dims: tuple
    n_involutions: int

    def check_point(self, pt: SurfacePoint):
        if len(pt.factors) != len(self.factor_dims):
            raise InvalidPoint(f"expected {len(self.factor_dims)} factors")
        for f, n in zip(pt.factors, self.factor_dims):
            if len(f.coords) != n + 1:
                raise InvalidPoint(f"factor of length {len(f.coords)}, expected {n + 1}")
            if all(c == 0 for c in f.coords):
                raise InvalidPoint("zero factor vector")

    def on_surface(self, pt: SurfacePoint) -> bool:
        self.check_point(pt)
        return all(v == 0 for v in self.forms(pt.factors))

    # implemented by subclasses
    def forms(self, factors) -> tuple:
        raise NotImplementedError

    def swap(self, factors, axis, mod=None) -> tuple:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


class WehlerSurface(Surface):
    """Intersection of a (1,1) form L and a (2,2) form Q in P2 x P2.

    ``L[i][j]`` is the coefficient of x_i y_j; ``Q[a][b]`` multiplies the a-th
    and b-th entries of ``MONO_P2`` in x and y respectively.
    """

    family = "wehler"
    factor_dims = (2, 2)
    n_involutions = 2

    def __init__(self, L, Q):
        self.L = _check_int_array(L, (3, 3), "L")
        self.Q = _check_int_array(Q, (6, 6), "Q")
        self._Lm = [[mpz(v) for v in row] for row in self.L]
        self._Qm = [[mpz(v) for v in row] for row in self.Q]

    def __eq__(self, other):
        return (isinstance(other, WehlerSurface)
                and (self.L == other.L).all() and (self.Q == other.Q).all())

    def __hash__(self):
        return hash((self.family, tuple(self.L.flat), tuple(self.Q.flat)))

    def forms(self, factors):
        x, y = factors[0].coords, factors[1].coords
        lval = sum(self._Lm[i][j] * x[i] * y[j] for i in range(3) for j in range(3))
        mx, my = _monos(x, MONO_P2), _monos(y, MONO_P2)
        qval = sum(self._Qm[a][b] * mx[a] * my[b] for a in range(6) for b in range(6))
        return lval, qval

    def fiber_forms(self, base, axis, mod=None):
        """(ell, c) cutting out the fiber of the projection that ``axis`` fixes.

        axis 1 fixes x and varies y; axis 2 fixes y and varies x.  ``ell`` is
        the linear form and ``c`` the conic coefficients over ``MONO_P2``.
        """
        mb = _monos(base, MONO_P2)
        if axis == 1:
            ell = [sum(self._Lm[i][j] * base[i] for i in range(3)) for j in range(3)]
            c = [sum(self._Qm[a][b] * mb[a] for a in range(6)) for b in range(6)]
        else:
            ell = [sum(self._Lm[i][j] * base[j] for j in range(3)) for i in range(3)]
            c = [sum(self._Qm[a][b] * mb[b] for b in range(6)) for a in range(6)]
        if mod is not None:
            ell = [v % mod for v in ell]
            c = [v % mod for v in c]
        return ell, c

    @staticmethod
    def _conic(c, y):
        m = _monos(y, MONO_P2)
        return sum(ci * mi for ci, mi in zip(c, m))

    def fiber_quadratic(self, ell, c, mod=None):
        """Kernel basis and the restricted binary quadratic (A, B, C)."""
        v, w, j1, j2, k = _kernel_basis(ell, mod)
        A = self._conic(c, v)
        C = self._conic(c, w)
        B = self._conic(c, [vi + wi for vi, wi in zip(v, w)]) - A - C
        if mod is not None:
            A, B, C = A % mod, B % mod, C % mod
        return (v, w, j1, j2), (A, B, C)

    def swap(self, factors, axis, mod=None):
        if axis not in (1, 2):
            raise ValueError("Wehler axis must be 1 or 2")
        fixed = factors[0] if axis == 1 else factors[1]
        moving = factors[1] if axis == 1 else factors[0]
        ell, c = self.fiber_forms(fixed, axis, mod)
        (v, w, j1, j2), (A, B, C) = self.fiber_quadratic(ell, c, mod)
        try:
            s1, t1 = _other_root(A, B, C, moving[j1], moving[j2], mod)
        except DegenerateFiber as exc:
            raise DegenerateFiber(str(exc), axis=axis) from None
        new = [s1 * vi + t1 * wi for vi, wi in zip(v, w)]
        new = _normalize_mod(new, mod) if mod is not None else normalize_int(new)
        return (fixed, new) if axis == 1 else (new, fixed)

    def to_json(self) -> dict:
        return {"family": "wehler",
                "L": [[str(v) for v in row] for row in self.L],
                "Q": [[str(v) for v in row] for row in self.Q]}

    # -- rational point search ------------------------------------------------
    def disc_invariant(self, x, mod=None):
        """-ell^T adj(2S) ell for the fiber over x; a square iff the fiber is rational.

        The restricted quadratic of the fiber has discriminant ell_k^2 times
        this value, independent of the kernel basis.
        """
        ell, c = self.fiber_forms(x, 1, mod)
        S = [[0] * 3 for _ in range(3)]
        for (i, j), ci in zip(MONO_P2, c):
            if i == j:
                S[i][i] = 2 * ci
            else:
                S[i][j] = S[j][i] = ci
        adj = [[S[(j + 1) % 3][(i + 1) % 3] * S[(j + 2) % 3][(i + 2) % 3]
                - S[(j + 1) % 3][(i + 2) % 3] * S[(j + 2) % 3][(i + 1) % 3]
                for j in range(3)] for i in range(3)]
        g = -sum(ell[i] * adj[i][j] * ell[j] for i in range(3) for j in range(3))
        return g % mod if mod is not None else g

    def fiber_points(self, x):
        """All rational points of the fiber over the base point x of the first factor."""
        x = normalize(list(x)).coords
        try:
            ell, c = self.fiber_forms(x, 1)
            (v, w, _, _), (A, B, C) = self.fiber_quadratic(ell, c)
        except DegenerateLine:
            return []
        if A == 0 and B == 0 and C == 0:
            return []
        disc = B * B - 4 * A * C
        if disc < 0 or not gmpy2.is_square(disc):
            return []
        r = gmpy2.isqrt(disc)
        if A != 0:
            roots = [(-B + r, 2 * A), (-B - r, 2 * A)]
        else:
            roots = [(1, 0), (-C, B)]
        out = []
        for s, t in roots:
            y = [s * vi + t * wi for vi, wi in zip(v, w)]
            if all(yi == 0 for yi in y):
                continue
            pt = SurfacePoint((ProjPoint(x), ProjPoint(normalize_int(y))))
            if pt not in out:
                out.append(pt)
        return out


class TripleSurface(Surface):
    """(2,2,2) hypersurface in P1 x P1 x P1.

    ``C[a][b][c]`` multiplies the a, b, c-th entries of ``MONO_P1`` in the three
    factors.  Involution k varies factor k and fixes the other two.
    """

    family = "triple"
    factor_dims = (1, 1, 1)
    n_involutions = 3

    def __init__(self, C):
        self.C = _check_int_array(C, (3, 3, 3), "C")
        self._Cm = [[[mpz(v) for v in row] for row in plane] for plane in self.C]

    def __eq__(self, other):
        return isinstance(other, TripleSurface) and (self.C == other.C).all()

    def __hash__(self):
        return hash((self.family, tuple(self.C.flat)))

    def forms(self, factors):
        m = [_monos(f.coords, MONO_P1) for f in factors]
        val = sum(self._Cm[a][b][c] * m[0][a] * m[1][b] * m[2][c]
                  for a in range(3) for b in range(3) for c in range(3))
        return (val,)

    def residual(self, factors, axis, mod=None):
        """Coefficients (A, B, C) of the form as a binary quadratic in factor ``axis``."""
        k = axis - 1
        others = [i for i in range(3) if i != k]
        m = {i: _monos(factors[i], MONO_P1) for i in others}
        coeffs = []
        for e in range(3):
            acc = 0
            for p, q in itertools.product(range(3), repeat=2):
                idx = [0, 0, 0]
                idx[k], idx[others[0]], idx[others[1]] = e, p, q
                acc += self._Cm[idx[0]][idx[1]][idx[2]] * m[others[0]][p] * m[others[1]][q]
            coeffs.append(acc % mod if mod is not None else acc)
        return tuple(coeffs)

    def swap(self, factors, axis, mod=None):
        if axis not in (1, 2, 3):
            raise ValueError("Triple axis must be 1, 2 or 3")
        A, B, C = self.residual(factors, axis, mod)
        s0, t0 = factors[axis - 1]
        try:
            s1, t1 = _other_root(A, B, C, s0, t0, mod)
        except DegenerateFiber as exc:
            raise DegenerateFiber(str(exc), axis=axis) from None
        new = _normalize_mod((s1, t1), mod) if mod is not None else normalize_int((s1, t1))
        out = list(factors)
        out[axis - 1] = new
        return tuple(out)

    def to_json(self) -> dict:
        return {"family": "triple",
                "C": [[[str(v) for v in row] for row in plane] for plane in self.C]}

    def disc_invariant(self, base, mod=None):
        u, v = base
        A, B, C = self.residual((u, v, (1, 0)), 3, mod)
        g = B * B - 4 * A * C
        return g % mod if mod is not None else g

    def fiber_points(self, base):
        u, v = (normalize(list(b)).coords for b in base)
        A, B, C = self.residual((u, v, (1, 0)), 3)
        if A == 0 and B == 0 and C == 0:
            return []
        disc = B * B - 4 * A * C
        if disc < 0 or not gmpy2.is_square(disc):
            return []
        r = gmpy2.isqrt(disc)
        roots = [(-B + r, 2 * A), (-B - r, 2 * A)] if A != 0 else [(1, 0), (-C, B)]
        out = []
        for s, t in roots:
            pt = SurfacePoint((ProjPoint(u), ProjPoint(v), ProjPoint(normalize_int((s, t)))))
            if pt not in out:
                out.append(pt)
        return out


def surface_from_json(obj) -> Surface:
    fam = obj.get("family")
    if fam == "wehler":
        return WehlerSurface([[int(v) for v in row] for row in obj["L"]],
                             [[int(v) for v in row] for row in obj["Q"]])
    if fam == "triple":
        return TripleSurface([[[int(v) for v in row] for row in plane] for plane in obj["C"]])
    raise ValueError(f"unknown surface family {fam!r}")


# ---------------------------------------------------------------------------
# involutions and the automorphism
# ---------------------------------------------------------------------------

def on_surface(spec: Surface, pt: SurfacePoint) -> bool:
    return spec.on_surface(pt)


def _coords(pt: SurfacePoint):
    return tuple(f.coords for f in pt.factors)


def _wrap(factors) -> SurfacePoint:
    return SurfacePoint(tuple(ProjPoint(tuple(f)) for f in factors))


def involution(spec: Surface, pt: SurfacePoint, axis: int, check: bool = True) -> SurfacePoint:
    """The other point of the fiber through ``pt`` swapped by involution ``axis`` (1-based)."""
    if check and not spec.on_surface(pt):
        raise NotOnSurface(f"{pt!r} is not on the surface")
    return _wrap(spec.swap(_coords(pt), axis))


def axis_order(spec: Surface, direction: str = "forward") -> tuple:
    """Order in which the involutions are applied to a point.

    forward: f = sigma_n o ... o sigma_1, so sigma_1 acts first.
    """
    order = tuple(range(1, spec.n_involutions + 1))
    if direction == "forward":
        return order
    if direction == "backward":
        return order[::-1]
    raise ValueError("direction must be 'forward' or 'backward'")


def apply_map(spec: Surface, factors, direction="forward", mod=None):
    """One step of f (or f^-1) on raw coordinate tuples; no membership check."""
    for axis in axis_order(spec, direction):
        factors = spec.swap(factors, axis, mod)
    return factors


def automorphism(spec: Surface, pt: SurfacePoint, direction: str = "forward",
                 check: bool = True) -> SurfacePoint:
    if check and not spec.on_surface(pt):
        raise NotOnSurface(f"{pt!r} is not on the surface")
    return _wrap(apply_map(spec, _coords(pt), direction))


# ---------------------------------------------------------------------------
# rational points
# ---------------------------------------------------------------------------

_SIEVE_PRIMES = (7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)
_SIEVE_PRIMES_P1 = (5, 7, 11, 13, 17, 19, 23)


def height_bound_to_max(B: float) -> int:
    """Largest integer m with log m <= B (m = 1 for B = 0)."""
    if B < 0:
        raise ValueError("height bound must be nonnegative")
    m = int(math.floor(math.exp(B)))
    while math.log(m + 1) <= B:
        m += 1
    while m > 1 and math.log(m) > B:
        m -= 1
    return max(m, 1)


def _square_table(p):
    t = np.zeros(p, dtype=bool)
    t[(np.arange(p) ** 2) % p] = True
    return t


def _p1_points(M):
    """Normalized primitive points of P1 with max |coord| <= M."""
    pts = [(1, 0)] if M >= 1 else []
    for a in range(0, M + 1):
        for b in range(-M, M + 1):
            if a == 0:
                if b == 1:
                    pts.append((0, 1))
                continue
            if math.gcd(a, b) == 1 and (a, b) != (1, 0):
                pts.append((a, b))
    return sorted(set(pts), key=lambda q: (max(abs(q[0]), abs(q[1])), q))


def _wehler_tables(spec: WehlerSurface):
    L = [[int(v) for v in row] for row in spec.L]
    Q = [[int(v) for v in row] for row in spec.Q]
    tables = []
    for p in _SIEVE_PRIMES:
        g = np.indices((p, p, p), dtype=np.int64).reshape(3, -1)
        x = [g[0], g[1], g[2]]
        mx = [x[i] * x[j] % p for i, j in MONO_P2]
        ell = [sum(L[i][j] * x[i] for i in range(3)) % p for j in range(3)]
        c = [sum(Q[a][b] * mx[a] for a in range(6)) % p for b in range(6)]
        S = [[None] * 3 for _ in range(3)]
        for (i, j), ci in zip(MONO_P2, c):
            if i == j:
                S[i][i] = 2 * ci % p
            else:
                S[i][j] = S[j][i] = ci
        val = np.zeros_like(g[0])
        for i in range(3):
            for j in range(3):
                adj = (S[(j + 1) % 3][(i + 1) % 3] * S[(j + 2) % 3][(i + 2) % 3]
                       - S[(j + 1) % 3][(i + 2) % 3] * S[(j + 2) % 3][(i + 1) % 3]) % p
                val = (val - ell[i] * adj % p * ell[j]) % p
        tables.append((p, _square_table(p)[val].reshape(p, p, p)))
    return tables


def _wehler_slice(spec, tables, x0, M):
    r = np.arange(-M, M + 1, dtype=np.int64)
    X1, X2 = np.meshgrid(r, r, indexing="ij")
    if x0 > 0:
        keep = np.gcd(np.gcd(X1, X2), x0) == 1
    else:
        keep = ((X1 > 0) & (np.gcd(X1, X2) == 1)) | ((X1 == 0) & (X2 == 1))
    for p, tab in tables:
        if not keep.any():
            break
        keep &= tab[x0 % p][np.ix_(r % p, r % p)]
    out = []
    for i, j in zip(*np.nonzero(keep)):
        x = (x0, int(r[i]), int(r[j]))
        g = spec.disc_invariant(x)
        if g >= 0 and gmpy2.is_square(g):
            out.extend(spec.fiber_points(x))
    return out


def _triple_candidates(spec, M):
    P = _p1_points(M)
    arr = np.array(P, dtype=np.int64)
    C = [[[int(v) for v in row] for row in plane] for plane in spec.C]
    keep = np.ones((len(P), len(P)), dtype=bool)
    for p in _SIEVE_PRIMES_P1:
        g = np.indices((p, p, p, p), dtype=np.int64).reshape(4, -1)
        mu = [g[0] * g[0] % p, g[0] * g[1] % p, g[1] * g[1] % p]
        mv = [g[2] * g[2] % p, g[2] * g[3] % p, g[3] * g[3] % p]
        coef = [sum(C[a][b][e] * mu[a] * mv[b] for a in range(3) for b in range(3)) % p
                for e in range(3)]
        val = (coef[1] * coef[1] - 4 * coef[0] * coef[2]) % p
        tab = _square_table(p)[val].reshape(p, p, p, p)
        m = arr % p
        keep &= tab[m[:, 0][:, None], m[:, 1][:, None], m[:, 0][None, :], m[:, 1][None, :]]
    return P, keep


def find_points(spec: Surface, height_bound: float, limit: int | None = None,
                threads: int = 1) -> list:
    """Rational points whose base point has naive height <= ``height_bound``.

    The base is the first factor (Wehler) or the first two factors (Triple).
    Base points are sieved by requiring the fiber discriminant to be a square
    modulo a handful of small primes before the exact test.  Degenerate fibers
    are skipped.  Points are returned ordered by base height, then
    lexicographically, deduplicated.
    """
    M = height_bound_to_max(height_bound)
    found: list = []
    if isinstance(spec, WehlerSurface):
        tables = _wehler_tables(spec)
        x0s = list(range(0, M + 1))
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as ex:
                chunks = list(ex.map(lambda a: _wehler_slice(spec, tables, a, M), x0s))
        else:
            chunks = [_wehler_slice(spec, tables, a, M) for a in x0s]
        for ch in chunks:
            found.extend(ch)
    elif isinstance(spec, TripleSurface):
        P, keep = _triple_candidates(spec, M)
        for i, j in zip(*np.nonzero(keep)):
            base = (P[i], P[j])
            g = spec.disc_invariant(base)
            if g >= 0 and gmpy2.is_square(g):
                found.extend(spec.fiber_points(base))
    else:
        raise TypeError("unknown surface type")

    def key(pt):
        base = pt.factors[:-1] if isinstance(spec, TripleSurface) else pt.factors[:1]
        hb = max(max(abs(int(c)) for c in f.coords) for f in base)
        return (hb, [[int(c) for c in f.coords] for f in pt.factors])

    uniq = {}
    for pt in found:
        if all(v == 0 for v in spec.forms(pt.factors)):
            uniq.setdefault(pt, None)
    out = sorted(uniq, key=key)
    return out[:limit] if limit is not None else out


def base_height(spec: Surface, pt: SurfacePoint) -> float:
    base = pt.factors[:1] if isinstance(spec, WehlerSurface) else pt.factors[:2]
    return max(naive_height(f) for f in base)
