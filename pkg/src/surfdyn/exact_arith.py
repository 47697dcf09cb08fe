"""Exact rational / real-quadratic arithmetic, projective points and naive heights."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence

import gmpy2
import mpmath
from gmpy2 import mpz

from .errors import FieldMismatch, InvalidPoint, NotHyperbolic

BigRat = Fraction

_LOG2 = math.log(2.0)


def squarefree_decompose(n: int) -> tuple[int, int]:
    """Return (s, d) with n = s**2 * d and d square-free (sign kept in d)."""
    if n == 0:
        raise ValueError("zero has no square-free part")
    sign = -1 if n < 0 else 1
    n = abs(n)
    s, d = 1, 1
    p = 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        s *= p ** (e // 2)
        if e % 2:
            d *= p
        p += 1 if p == 2 else 2
    d *= n
    return s, sign * d


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, type(mpz(0)))):
        return Fraction(int(x))
    raise TypeError(f"cannot use {type(x).__name__} as an exact rational")


@dataclass(frozen=True)
class QuadNum:
    """Exact a + b*sqrt(d) with a, b rational and d a square-free integer != 0, 1.

    Elements with different ``d`` never mix: combining them raises
    :class:`FieldMismatch`.  Plain ints and Fractions coerce into any field.
    Negative ``d`` is accepted (imaginary quadratic fixed points of Mobius
    maps); ordering and float conversion need d > 0.
    """

    a: Fraction
    b: Fraction
    d: int

    def __post_init__(self):
        object.__setattr__(self, "a", _as_fraction(self.a))
        object.__setattr__(self, "b", _as_fraction(self.b))
        d = int(self.d)
        if d in (0, 1):
            raise ValueError("d must be a square-free integer other than 0 and 1")
        object.__setattr__(self, "d", d)

    @classmethod
    def rational(cls, q, d: int) -> "QuadNum":
        return cls(_as_fraction(q), Fraction(0), d)

    @classmethod
    def sqrt(cls, d: int) -> "QuadNum":
        return cls(Fraction(0), Fraction(1), d)

    # -- coercion -----------------------------------------------------------
    def _coerce(self, other) -> "QuadNum":
        if isinstance(other, QuadNum):
            if other.d != self.d:
                raise FieldMismatch(f"Q(sqrt {self.d}) vs Q(sqrt {other.d})")
            return other
        try:
            return QuadNum(_as_fraction(other), Fraction(0), self.d)
        except TypeError:
            return NotImplemented

    # -- field operations -----------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadNum(self.a + o.a, self.b + o.b, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadNum(-self.a, -self.b, self.d)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadNum(self.a - o.a, self.b - o.b, self.d)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadNum(self.a * o.a + self.b * o.b * self.d,
                       self.a * o.b + self.b * o.a, self.d)

    __rmul__ = __mul__

    def conjugate(self) -> "QuadNum":
        return QuadNum(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        return self.a * self.a - self.d * self.b * self.b

    def trace(self) -> Fraction:
        return 2 * self.a

    def inverse(self) -> "QuadNum":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("QuadNum division by zero")
        return QuadNum(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = QuadNum(Fraction(1), Fraction(0), self.d)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- comparisons ----------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, QuadNum):
            return self.a == other.a and self.b == other.b and self.d == other.d
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def is_rational(self) -> bool:
        return self.b == 0

    def sign(self) -> int:
        """Exact sign of the real number a + b*sqrt(d) (d > 0)."""
        if self.d < 0:
            raise ValueError("sign undefined for imaginary quadratic elements")
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb if sa == 0 else sa
        # opposite signs: compare a^2 with b^2 d
        diff = self.a * self.a - self.b * self.b * self.d
        return sa if diff > 0 else (-sa if diff < 0 else 0)

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # -- conversions ----------------------------------------------------------
    def __float__(self):
        if self.d < 0:
            raise ValueError("imaginary quadratic element has no real value")
        return float(self.to_mpf(80))

    def to_mpf(self, prec: int = 128):
        with mpmath.workprec(prec + 16):
            val = (mpmath.mpf(self.a.numerator) / self.a.denominator
                   + mpmath.mpf(self.b.numerator) / self.b.denominator * mpmath.sqrt(self.d))
        return val

    def to_json(self) -> dict:
        return {"a": str(self.a), "b": str(self.b), "d": self.d}

    @classmethod
    def from_json(cls, obj) -> "QuadNum":
        return cls(Fraction(obj["a"]), Fraction(obj["b"]), int(obj["d"]))

    def __repr__(self):
        return f"QuadNum({self.a} + {self.b}*sqrt({self.d}))"

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        return f"{self.a} + {self.b}*sqrt({self.d})" if self.a else f"{self.b}*sqrt({self.d})"


def quad_char_root(trace: int, d_hint: int | None = None) -> QuadNum:
    """Root (tau + sqrt(tau^2 - 4)) / 2 of t^2 - tau*t + 1."""
    tau = int(trace)
    if abs(tau) <= 2:
        raise NotHyperbolic(f"|trace| = {abs(tau)} <= 2")
    s, d = squarefree_decompose(tau * tau - 4)
    if d == 1:
        # tau^2 - 4 is never a nonzero square for |tau| > 2
        raise NotHyperbolic("discriminant is a perfect square")
    if d_hint is not None and d_hint != d:
        raise ValueError(f"tau^2 - 4 = {tau * tau - 4} has square-free part {d}, not {d_hint}")
    return QuadNum(Fraction(tau, 2), Fraction(s, 2), d)


# ---------------------------------------------------------------------------
# projective points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProjPoint:
    """Primitive, sign-normalized integer coordinates of a point of P^n(Q).

    Build instances with :func:`normalize`; the constructor trusts its input.
    """

    coords: tuple

    @property
    def dim(self) -> int:
        return len(self.coords) - 1

    def __iter__(self):
        return iter(self.coords)

    def __len__(self):
        return len(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def to_json(self) -> list[str]:
        return [str(int(c)) for c in self.coords]

    @classmethod
    def from_json(cls, obj: Sequence) -> "ProjPoint":
        return normalize([Fraction(str(c)) if isinstance(c, str) and "/" in c else int(c) for c in obj])

    def __repr__(self):
        if max(int(c).bit_length() for c in self.coords) > 200:
            bits = [int(c).bit_length() for c in self.coords]
            return f"ProjPoint(<{bits} bits>)"
        return "(" + ":".join(str(int(c)) for c in self.coords) + ")"


def normalize_int(coords: Iterable) -> tuple:
    """Primitive sign-normalized integer tuple (as mpz); raises on all-zero."""
    cs = [mpz(c) for c in coords]
    g = reduce(gmpy2.gcd, cs, mpz(0))
    if g == 0:
        raise InvalidPoint("all coordinates are zero")
    lead = next(c for c in cs if c != 0)
    if lead < 0:
        g = -g
    if g != 1:
        cs = [gmpy2.divexact(c, g) for c in cs]
    return tuple(cs)


def normalize(raw: Sequence) -> ProjPoint:
    """Unique primitive integer representative with first nonzero entry positive."""
    if len(raw) == 0:
        raise InvalidPoint("empty coordinate list")
    if all(isinstance(c, (int, type(mpz(0)))) for c in raw):
        return ProjPoint(normalize_int(raw))
    fr = [_as_fraction(c) for c in raw]
    den = reduce(math.lcm, (f.denominator for f in fr), 1)
    return ProjPoint(normalize_int(f.numerator * (den // f.denominator) for f in fr))


def log_abs(x) -> float:
    """log|x| for a nonzero integer of any size, without float(x)."""
    x = abs(x)
    if x == 0:
        raise ValueError("log of zero")
    bits = x.bit_length()
    if bits <= 53:
        return math.log(int(x))
    shift = bits - 53
    top = int(x >> shift)
    return math.log(top) + shift * _LOG2


def log_abs_mp(x, prec: int = 128):
    """log|x| as an mpmath float with ``prec`` bits, reading only the top limbs."""
    x = abs(mpz(x))
    if x == 0:
        raise ValueError("log of zero")
    keep = prec + 20
    bits = x.bit_length()
    with mpmath.workprec(prec + 20):
        if bits <= keep:
            val = mpmath.log(mpmath.mpf(x))
        else:
            shift = bits - keep
            val = mpmath.log(mpmath.mpf(x >> shift)) + shift * mpmath.ln2
    return val


def max_abs(p: ProjPoint):
    return max(abs(c) for c in p.coords)


def naive_height(p: ProjPoint) -> float:
    """log max|x_i| of a normalized point (double precision)."""
    return log_abs(max_abs(p))


def naive_height_mp(p: ProjPoint, prec: int = 128):
    return log_abs_mp(max_abs(p), prec)


def coord_bits(p: ProjPoint) -> int:
    return max(abs(c).bit_length() for c in p.coords)
