import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmctori import (
    BracketFailure,
    NotAdmissible,
    admissible_m,
    classify,
    clifford_radius,
    generate_clifford,
    period_K,
    principal_curvatures,
    solve_C_for_m,
    window,
)
from cmctori.classify import window_from_limits
from cmctori.period import lower_bound_C

SQ3 = math.sqrt(3.0)
# 40-digit mpmath root of K(1, C) = 2 pi / 3
C_STAR_H1_M3 = 9.908469426660855437


def brute_force_count(H, m_max=10_000):
    m = np.arange(2, m_max + 1, dtype=float)
    k = 2 * math.pi / m
    lo = 2 * (0.5 * math.pi - math.atan(H))
    w = math.hypot(1.0, H)
    hi = math.sqrt(2.0) * math.pi / (math.sqrt(w) * math.sqrt(H + w))
    return [int(x) for x in m[(lo < k) & (k < hi)]]


def test_window_values():
    assert window(2) == (0.0, pytest.approx(1 / SQ3))
    lo, hi = window(3)
    assert lo == pytest.approx(1 / SQ3) and hi == pytest.approx(7 / (4 * math.sqrt(2)))
    with pytest.raises(ValueError):
        window(1)


@pytest.mark.parametrize("H, expected", [(0.0, []), (1 / SQ3, []), (1.0, [3]), (0.3, [2]), (2.3, [5, 6, 7])])
def test_admissible_examples(H, expected):
    assert admissible_m(H) == expected


def test_admissible_rejects_negative():
    with pytest.raises(ValueError):
        admissible_m(-1e-3)


@pytest.mark.parametrize("H", list(np.linspace(0.0, 12.0, 61)) + [1e-6, 1 / SQ3 + 1e-9, 1 / SQ3 - 1e-9, 40.0])
def test_count_matches_brute_force_scan(H):
    got = admissible_m(H)
    assert got == brute_force_count(H)
    assert got == [m for m in range(2, 200) if window_from_limits(H, m)]


@pytest.mark.parametrize("m", range(2, 9))
def test_window_endpoints_are_excluded(m):
    lo, hi = window(m)
    assert m not in admissible_m(hi)
    if m > 2:
        assert m not in admissible_m(lo)


@pytest.mark.parametrize("H", [0.0, 1 / SQ3])
def test_rigid_at_zero_and_one_over_sqrt3(H):
    report = classify(H)
    assert report.rigid and report.specs == []


@pytest.mark.parametrize("H, m", [(1e-4, 2), (1 / SQ3 * (1 - 1e-4), 2), (1 / SQ3 * (1 + 1e-4), 3)])
def test_rigidity_is_isolated(H, m):
    # the m = 2 window starts at 0 and the m = 3 window starts at 1/sqrt(3),
    # so rigidity holds at the two points only
    assert classify(H).ms() == [m]


def test_solve_H1_m3():
    spec = solve_C_for_m(1.0, 3)
    assert spec.C == pytest.approx(C_STAR_H1_M3, rel=1e-13)
    assert abs(spec.K - 2 * math.pi / 3) <= 1e-9
    assert abs(period_K(1.0, spec.C).value - 2 * math.pi / 3) <= 1e-9


def test_solve_bracket_independence():
    spec = solve_C_for_m(1.0, 3)
    a = lower_bound_C(1.0)
    for bracket in [(a + 1e-3, 50.0), (9.0, 10.5), (a * (1 + 1e-9), 1e4)]:
        assert solve_C_for_m(1.0, 3, bracket=bracket).C == pytest.approx(spec.C, abs=1e-9)


@pytest.mark.parametrize("H, m", [(0.0, 2), (1.0, 2), (1.0, 4), (0.0, 1)])
def test_not_admissible(H, m):
    with pytest.raises(NotAdmissible):
        solve_C_for_m(H, m)


@pytest.mark.parametrize("bracket", [(12.0, 20.0), (5.0, 6.0), (1.0, 20.0)])
def test_bad_bracket(bracket):
    with pytest.raises(BracketFailure):
        solve_C_for_m(1.0, 3, bracket=bracket)


@pytest.mark.parametrize("H, r", [(0.0, 1 / math.sqrt(2)), (1 / SQ3, 0.5)])
def test_clifford_radius_values(H, r):
    assert clifford_radius(H) == pytest.approx(r, rel=1e-15)


@given(st.floats(0.0, 50.0))
def test_clifford_radius_inverts_mean_curvature(H):
    r = clifford_radius(H)
    assert 0 < r <= 1 / math.sqrt(2) + 1e-16
    rho = math.sqrt(1 - r * r)
    assert (1 - 2 * r * r) / (2 * r * rho) == pytest.approx(H, abs=1e-12 * max(1, H))


@pytest.mark.parametrize("H", [0.0, 0.25, 1 / SQ3, 1.0, 3.0])
def test_clifford_round_trip(H, rng):
    mesh = generate_clifford(clifford_radius(H), 32, 32)
    i, j = rng.integers(0, 32, (2, 40))
    res = principal_curvatures(mesh.parametrization, mesh.u[i], mesh.v[j], step=1e-3, richardson=True)
    assert np.abs(res.H - H).max() < 1e-8


def test_report_dict():
    d = classify(1.0).as_dict()
    assert set(d) == {"H", "cliffordRadius", "rigid", "tori"}
    assert d["rigid"] is False and [t["m"] for t in d["tori"]] == [3]
    assert set(d["tori"][0]) == {"m", "C", "K"}


def test_classify_negative_H():
    with pytest.raises(ValueError):
        classify(-0.5)


@given(st.floats(0.0, 6.0))
@settings(max_examples=25, deadline=None)
def test_classification_contract(H):
    report = classify(H)
    assert report.rigid == (admissible_m(H) == [])
    ms = report.ms()
    assert ms == sorted(set(ms))
    for s in report.specs:
        lo, hi = window(s.m)
        assert lo < H < hi
        assert s.C > lower_bound_C(H)
        assert abs(s.K - 2 * math.pi / s.m) <= 1e-9
