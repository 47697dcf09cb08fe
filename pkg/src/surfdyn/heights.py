"""Weil heights for divisor classes and canonical heights for f and f^-1.

h_D(P) = sum_i c_i log max|x_i| for D = sum_i c_i H_i.  The canonical heights
are the normalized limits

    hat h_+(P) = lim lambda^-n h_{nu_+}(f^n P),
    hat h_-(P) = lim lambda^-n h_{nu_-}(f^-n P),

truncated at a finite depth n.  With C the largest one-step defect
|h(f y) - lambda h(y)| seen along the computed leg, the truncation error is
at most C lambda^-n / (1 - 1/lambda).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import mpmath

from .errors import DegenerateFiber, InvalidDepth
from .exact_arith import QuadNum, log_abs_mp, max_abs
from .orbits import OrbitRecord, extend, orbit
from .presets import composite_pullback, lattice_for
from .spectral import NefEigenclasses, nef_eigenclasses
from .surfaces import Surface, SurfacePoint

DEFAULT_PRECISION = 128


def _mp(c, prec):
    if isinstance(c, QuadNum):
        return c.to_mpf(prec)
    with mpmath.workprec(prec):
        return mpmath.mpf(c.numerator) / c.denominator if hasattr(c, "numerator") else mpmath.mpf(c)


@dataclass(frozen=True)
class HeightSpec:
    """A divisor class sum_i c_i H_i; coefficients may be QuadNum."""

    coeffs: tuple

    def __call__(self, pt: SurfacePoint, precision: int = DEFAULT_PRECISION):
        return height(self, pt, precision)


def height(spec: HeightSpec, pt: SurfacePoint, precision: int = DEFAULT_PRECISION):
    if len(spec.coeffs) != len(pt.factors):
        raise ValueError("height spec and point have different numbers of factors")
    with mpmath.workprec(precision):
        total = mpmath.mpf(0)
        for c, f in zip(spec.coeffs, pt.factors):
            if c != 0:
                total += _mp(c, precision) * log_abs_mp(max_abs(f), precision)
    return total


@dataclass(frozen=True)
class HeightModel:
    lam: QuadNum
    eig: NefEigenclasses
    d_plus: HeightSpec
    d_minus: HeightSpec
    ample: HeightSpec


@lru_cache(maxsize=None)
def height_model(family: str) -> HeightModel:
    pb = composite_pullback(family)
    eig = nef_eigenclasses(pb, lattice_for(family))
    rank = len(eig.nu_plus.coeffs)
    return HeightModel(eig.lam, eig, HeightSpec(tuple(eig.nu_plus.coeffs)),
                       HeightSpec(tuple(eig.nu_minus.coeffs)), HeightSpec((1,) * rank))


@dataclass
class CanonicalHeightResult:
    h_plus: object
    h_minus: object
    h_D: object
    depth_used: int
    error_plus: object
    error_minus: object
    error_bound: object
    C_plus: object
    C_minus: object
    zero_plus: bool
    zero_minus: bool
    zero_D: bool
    clamped: bool
    partial: bool
    precision: int

    def to_json(self) -> dict:
        s = lambda x: mpmath.nstr(x, 20, strip_zeros=False)
        return {"h_plus": s(self.h_plus), "h_minus": s(self.h_minus), "h_D": s(self.h_D),
                "depth_used": self.depth_used, "error_plus": s(self.error_plus),
                "error_minus": s(self.error_minus), "error_bound": s(self.error_bound),
                "C_plus": s(self.C_plus), "C_minus": s(self.C_minus),
                "zero_plus": self.zero_plus, "zero_minus": self.zero_minus,
                "zero_D": self.zero_D, "clamped": self.clamped, "partial": self.partial,
                "precision": self.precision}


def _leg(model, spec, record, k, step, depth, prec, lam):
    """(lambda^-n h(f^{k+step*n}), C, n_used) along one direction."""
    vals = []
    for m in range(depth + 1):
        n = k + step * m
        if not record.has(n):
            break
        vals.append(height(spec, record.at(n).point, prec))
    n_used = len(vals) - 1
    if n_used < 1:
        return None, None, 0
    C = max(abs(vals[m + 1] - lam * vals[m]) for m in range(n_used))
    return vals[-1] / lam ** n_used, C, n_used


def canonical_at(surface: Surface, record: OrbitRecord, k: int, depth: int,
                 precision: int = DEFAULT_PRECISION) -> CanonicalHeightResult:
    """Canonical heights of f^k(center) using the points already in ``record``."""
    if depth < 1:
        raise InvalidDepth(f"depth must be >= 1, got {depth}")
    model = height_model(surface.family)
    with mpmath.workprec(precision):
        lam = model.lam.to_mpf(precision)
        hp, Cp, np_ = _leg(model, model.d_plus, record, k, 1, depth, precision, lam)
        hm, Cm, nm = _leg(model, model.d_minus, record, k, -1, depth, precision, lam)
        if hp is None or hm is None:
            blocked = record.degenerate_hit[0] if record.degenerate_hit else {}
            raise DegenerateFiber("orbit too short for any canonical height estimate",
                                  axis=blocked.get("axis"), step=blocked.get("step"))
        n = min(np_, nm)
        if n < depth:
            # recompute both legs at the common achieved depth
            hp, Cp, _ = _leg(model, model.d_plus, record, k, 1, n, precision, lam)
            hm, Cm, _ = _leg(model, model.d_minus, record, k, -1, n, precision, lam)
        tail = lam ** (-n) / (1 - 1 / lam)
        ep, em = Cp * tail, Cm * tail
        clamped = False
        if -ep <= hp < 0:
            hp, clamped = mpmath.mpf(0), True
        if -em <= hm < 0:
            hm, clamped = mpmath.mpf(0), True
        hD = hp + hm
        err = ep + em
        return CanonicalHeightResult(
            h_plus=hp, h_minus=hm, h_D=hD, depth_used=n,
            error_plus=ep, error_minus=em, error_bound=err, C_plus=Cp, C_minus=Cm,
            zero_plus=hp <= ep, zero_minus=hm <= em, zero_D=hD <= err,
            clamped=clamped, partial=n < depth, precision=precision)


def canonical_heights(surface: Surface, pt: SurfacePoint, depth: int = 5,
                      precision: int = DEFAULT_PRECISION) -> CanonicalHeightResult:
    if depth < 1:
        raise InvalidDepth(f"depth must be >= 1, got {depth}")
    rec = orbit(surface, pt, -depth, depth)
    return canonical_at(surface, rec, 0, depth, precision)


@dataclass(frozen=True)
class FunctionalEquationCheck:
    residual: object          # |hat h_D(f x) + hat h_D(f^-1 x) - (lambda + 1/lambda) hat h_D(x)|
    bound: object             # 3 (lambda + 1/lambda) * error_bound(x)
    ok: bool
    step_plus: object         # |hat h_+(f x) - lambda hat h_+(x)|
    step_minus: object        # |hat h_-(f^-1 x) - lambda hat h_-(x)|
    step_bound: object        # 2 lambda * error_bound(x)
    step_ok: bool
    center: CanonicalHeightResult


def functional_equation_residual(surface: Surface, pt: SurfacePoint, depth: int = 4,
                                 precision: int = DEFAULT_PRECISION,
                                 record: OrbitRecord | None = None) -> FunctionalEquationCheck:
    """Compare canonical heights at f^-1 x, x and f x, all at the same depth."""
    if record is None:
        record = orbit(surface, pt, -depth - 1, depth + 1)
    else:
        extend(surface, record, -depth - 1, depth + 1)
    r0 = canonical_at(surface, record, 0, depth, precision)
    r1 = canonical_at(surface, record, 1, depth, precision)
    rm = canonical_at(surface, record, -1, depth, precision)
    model = height_model(surface.family)
    with mpmath.workprec(precision):
        lam = model.lam.to_mpf(precision)
        s = lam + 1 / lam
        res = abs(r1.h_D + rm.h_D - s * r0.h_D)
        # the factor 3 absorbs the errors of the shifted estimates
        err = r0.error_bound
        bound = 3 * s * err
        sp = abs(r1.h_plus - lam * r0.h_plus)
        sm = abs(rm.h_minus - lam * r0.h_minus)
        sb = 2 * lam * err
    return FunctionalEquationCheck(res, bound, res <= bound, sp, sm, sb,
                                   sp <= sb and sm <= sb, r0)
