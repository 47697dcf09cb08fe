import math

import mpmath
import pytest

from surfdyn import presets
from surfdyn.errors import DegenerateFiber, InvalidDepth
from surfdyn.exact_arith import QuadNum, normalize
from surfdyn.heights import (HeightSpec, canonical_at, canonical_heights,
                             functional_equation_residual, height, height_model)
from surfdyn.orbits import OrbitRecord, orbit
from surfdyn.surfaces import SurfacePoint

from conftest import FIXED_POINT

S3 = QuadNum.sqrt(3)


def test_height_of_origin_like_point_is_zero():
    assert height(HeightSpec((1, 1)), SurfacePoint.of((1, 0, 0), (1, 0, 0))) == 0


def test_height_quadratic_coefficients():
    pt = SurfacePoint.of((1, 2, 3), (1, 1, 2))
    val = height(HeightSpec((2 + S3, -1)), pt)
    with mpmath.workprec(128):
        ref = (2 + mpmath.sqrt(3)) * mpmath.log(3) - mpmath.log(2)
    assert abs(val - ref) < mpmath.mpf(2) ** -110


def test_height_ignores_representative():
    a = SurfacePoint((normalize([3, 6, 9]), normalize([-2, -2, -4])))
    assert a == SurfacePoint.of((1, 2, 3), (1, 1, 2))
    assert height(HeightSpec((1, 1)), a) == pytest.approx(math.log(6))


def test_height_dimension_mismatch():
    with pytest.raises(ValueError):
        height(HeightSpec((1, 1, 1)), SurfacePoint.of((1, 0, 0), (1, 0, 0)))


def test_height_model_uses_nef_eigenclasses():
    m = height_model("wehler")
    assert m.d_plus.coeffs == (2 + S3, -1)
    assert m.d_minus.coeffs == (-1, 2 + S3)
    assert m.lam == QuadNum(7, 4, 3)


@pytest.fixture(scope="module")
def wehler_records(wehler, wehler_points):
    return [(p, orbit(wehler, p, -5, 5)) for p in wehler_points[:6]]


def test_nonnegative_within_error(wehler, wehler_records):
    for _, rec in wehler_records:
        r = canonical_at(wehler, rec, 0, 4)
        assert r.h_plus >= -r.error_plus and r.h_minus >= -r.error_minus
        with mpmath.workprec(r.precision):
            assert r.h_D == r.h_plus + r.h_minus
        assert not (r.zero_plus or r.zero_minus or r.zero_D)


def test_deeper_is_better(wehler, wehler_records):
    for _, rec in wehler_records:
        assert canonical_at(wehler, rec, 0, 5).error_bound < canonical_at(wehler, rec, 0, 3).error_bound


def test_deeper_estimates_agree(wehler, wehler_records):
    for _, rec in wehler_records:
        r3, r5 = canonical_at(wehler, rec, 0, 3), canonical_at(wehler, rec, 0, 5)
        assert abs(r3.h_D - r5.h_D) <= r3.error_bound + r5.error_bound


def test_telescoping_consistency(wehler, wehler_records):
    model = height_model("wehler")
    lam = model.lam.to_mpf(128)
    for _, rec in wehler_records:
        a = canonical_at(wehler, rec, 1, 3).h_plus
        with mpmath.workprec(128):
            b = lam * canonical_at(wehler, rec, 0, 4).h_plus
            # same number lambda^-3 h(f^4 z), evaluated along two rounding paths
            assert abs(a - b) <= mpmath.mpf(2) ** -118 * abs(a)


def test_canonical_minus_naive_is_bounded(wehler, wehler_records):
    model = height_model("wehler")
    lam = float(model.lam)
    for _, rec in wehler_records:
        for k in (-1, 0, 1):
            r = canonical_at(wehler, rec, k, 4)
            y = rec.at(k).point
            gap = abs(r.h_D - height(model.d_plus, y) - height(model.d_minus, y))
            assert gap <= (r.C_plus + r.C_minus) / (lam - 1)


def test_functional_equation(wehler, wehler_points):
    for p in wehler_points[:3]:
        fe = functional_equation_residual(wehler, p, depth=4)
        assert fe.ok and fe.step_ok


def test_residual_shrinks_with_depth(triple, triple_points):
    p = triple_points[2]
    rec = orbit(triple, p, -6, 6)
    res = [functional_equation_residual(triple, p, d, record=rec).residual for d in (2, 3, 4, 5)]
    assert res[-1] < res[0]
    assert sum(b < a for a, b in zip(res, res[1:])) >= 2


def test_fixed_point_has_zero_canonical_height(fixed_surface):
    r = canonical_heights(fixed_surface, FIXED_POINT, depth=3)
    assert r.zero_plus and r.zero_minus and r.zero_D
    assert r.h_D <= r.error_bound


def test_invalid_depth(wehler, wehler_points):
    with pytest.raises(InvalidDepth):
        canonical_heights(wehler, wehler_points[0], depth=0)


def test_partial_result_on_short_record(wehler, wehler_points):
    rec = orbit(wehler, wehler_points[0], -2, 2)
    r = canonical_at(wehler, rec, 0, 5)
    assert r.partial and r.depth_used == 2


def test_degenerate_center_only_record(wehler, wehler_points):
    rec = orbit(wehler, wehler_points[0], 0, 0)
    rec.degenerate_hit.append({"direction": "forward", "step": 1, "axis": 2})
    with pytest.raises(DegenerateFiber):
        canonical_at(wehler, rec, 0, 3)


def test_result_json_fields(triple, triple_points):
    js = canonical_heights(triple, triple_points[0], depth=2).to_json()
    assert {"h_plus", "h_minus", "h_D", "depth_used", "error_bound"} <= set(js)
    assert js["depth_used"] == 2
