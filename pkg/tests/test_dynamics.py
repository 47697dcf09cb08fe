import math

import mpmath
import pytest
from hypothesis import given, strategies as st

from surfdyn.dynamics import (count_orbit, counting_report, detect_periodic, orbit,
                              orbit_invariant, periodic_scan, sigma_count, verify_period)
from surfdyn.errors import Indeterminate, InsufficientOrbit, PeriodicCenter
from surfdyn.heights import canonical_at, canonical_heights, height_model
from surfdyn.surfaces import automorphism

from conftest import FIXED_POINT

LAM_W = 7 + 4 * math.sqrt(3)


def test_trivial_orbit(wehler, wehler_points):
    rec = orbit(wehler, wehler_points[0], 0, 0)
    assert len(rec.entries) == 1 and rec.entries[0].point == wehler_points[0]
    assert rec.truncated_at == (0, 0)


def test_orbit_requires_zero_in_range(wehler, wehler_points):
    with pytest.raises(ValueError):
        orbit(wehler, wehler_points[0], 1, 3)


def test_orbit_entries_follow_the_map(triple, triple_points):
    rec = orbit(triple, triple_points[5], -3, 3)
    ns = [e.n for e in rec.entries]
    assert ns == sorted(ns) == list(range(-3, 4))
    for a, b in zip(rec.entries, rec.entries[1:]):
        assert automorphism(triple, a.point) == b.point


def test_fixed_point_orbit_is_one_cycle(fixed_surface):
    rec = orbit(fixed_surface, FIXED_POINT, -4, 4)
    assert rec.period == 1 and len(rec.entries) == 1


def test_heights_grow_like_lambda(wehler, wehler_points):
    rec = orbit(wehler, wehler_points[4], 0, 5)
    h = [e.h_H for e in rec.entries]
    assert h[5] / h[4] == pytest.approx(LAM_W, rel=0.05)


def test_detect_fixed_point(fixed_surface):
    assert detect_periodic(fixed_surface, FIXED_POINT, 12) == 1
    assert verify_period(fixed_surface, FIXED_POINT, 1)


def test_non_periodic_samples(wehler, wehler_points):
    for p in wehler_points[:8]:
        assert detect_periodic(wehler, p, 12) is None
        r = canonical_heights(wehler, p, depth=3)
        assert r.h_D > r.error_bound


def test_filter_agrees_with_exact_iteration(triple, triple_points):
    for p in triple_points[:10]:
        assert detect_periodic(triple, p, 3) == detect_periodic(triple, p, 3, primes=())


def test_periodicity_is_orbit_invariant(triple, triple_points, fixed_surface):
    for p in triple_points[:6]:
        assert detect_periodic(triple, automorphism(triple, p), 12) == detect_periodic(triple, p, 12)
    assert detect_periodic(fixed_surface, automorphism(fixed_surface, FIXED_POINT), 12) == 1


def test_indeterminate_when_coordinates_explode(wehler, wehler_points):
    with pytest.raises(Indeterminate):
        detect_periodic(wehler, wehler_points[0], 12, primes=(), bit_cap=64)


def test_count_orbit_properties(wehler, wehler_points):
    rec = orbit(wehler, wehler_points[1], -6, 6)
    Ts = [math.exp(k / 2) for k in range(0, 21)]
    counts = [count_orbit(rec, T) for T in Ts]
    assert counts == sorted(counts)
    for T in Ts:
        n_minus = sum(1 for e in rec.backward() if e.h_H <= T)
        assert count_orbit(rec, T) == count_orbit(rec, T, forward_only=True) + n_minus - 1


def test_count_orbit_needs_coverage(wehler, wehler_points):
    rec = orbit(wehler, wehler_points[1], -1, 1)
    with pytest.raises(InsufficientOrbit):
        count_orbit(rec, 1e6)


def test_count_periodic_orbit(fixed_surface):
    rec = orbit(fixed_surface, FIXED_POINT, -3, 3)
    assert count_orbit(rec, 1e9) == rec.period == 1


@given(st.floats(0.01, 50), st.floats(0.01, 50), st.floats(1, 1e6))
def test_sigma_count_brute_force(hp, hm, T):
    lam = LAM_W
    with mpmath.workprec(128):
        got = sigma_count(mpmath.mpf(hp), mpmath.mpf(hm), mpmath.mpf(lam), mpmath.mpf(T))
        ref = sum(1 for n in range(-40, 41)
                  if mpmath.mpf(lam) ** n * hp + mpmath.mpf(lam) ** (-n) * hm <= T)
    assert got == ref


@pytest.fixture(scope="module")
def report(wehler, wehler_points):
    return counting_report(wehler, wehler_points[2])


def test_report_csv_columns(report):
    header = report.to_csv().splitlines()[0]
    assert header == "T,N,N_plus,Sigma,predicted_N,bracket_lo,bracket_hi,pass"
    assert len(report.rows) == 9


def test_report_bracket_and_window(report):
    assert report.bracket_ok
    assert report.window_width <= report.window_limit


def test_report_forward_only(wehler, wehler_points):
    rep = counting_report(wehler, wehler_points[2], forward_only=True)
    assert rep.to_csv().splitlines()[0] == "T,N_plus,predicted_N_plus"


def test_report_invariant_under_shift(wehler, wehler_points, report):
    p = automorphism(wehler, wehler_points[2])
    rep2 = counting_report(wehler, p, depth=4)
    tol = 3 * (report.invariant_error + rep2.invariant_error)
    assert abs(report.invariant - rep2.invariant) <= tol


def test_report_rejects_periodic_center(fixed_surface):
    with pytest.raises(PeriodicCenter):
        counting_report(fixed_surface, FIXED_POINT)


def test_orbit_invariant_error_positive(wehler, wehler_points):
    rec = orbit(wehler, wehler_points[0], -3, 3)
    res = canonical_at(wehler, rec, 0, 3)
    val, err = orbit_invariant(res, height_model("wehler").lam.to_mpf(128))
    assert err > 0


def test_scan_finds_fixed_point(fixed_surface):
    res = periodic_scan(fixed_surface, 1.5, 12)
    assert [(h["point"], h["period"]) for h in res.hits] == [(FIXED_POINT, 1)]
    h = res.hits[0]
    assert h["verified"] and h["h_D"] <= h["error_bound"]
    assert res.max_periodic_height == 0.0


def test_scan_threads_deterministic(triple):
    a = periodic_scan(triple, 1.5, 6).to_json()
    b = periodic_scan(triple, 1.5, 6, threads=3).to_json()
    assert a == b
