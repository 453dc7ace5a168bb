import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmctori.errors import QuadratureFailure
from cmctori.quadrature import gauss_kronrod, gauss_kronrod_many, gauss_legendre_adaptive


@given(st.lists(st.floats(-3, 3), min_size=1, max_size=14), st.floats(-2, 0), st.floats(0.1, 2))
@settings(max_examples=60, deadline=None)
def test_polynomials_integrate_exactly(coeffs, a, width):
    b = a + width
    p = np.polynomial.Polynomial(coeffs)
    exact = p.integ()(b) - p.integ()(a)
    for rule in (gauss_kronrod, gauss_legendre_adaptive):
        value, _ = rule(p, a, b)
        assert value == pytest.approx(exact, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize(
    "f, a, b, exact",
    [
        (np.exp, 0.0, 1.0, math.e - 1.0),
        (lambda x: 1.0 / (1.0 + x * x), -1.0, 1.0, 0.5 * math.pi),
        (np.sqrt, 0.0, 1.0, 2.0 / 3.0),
        (np.log, 1e-12, 1.0, -1.0 - (1e-12 * math.log(1e-12) - 1e-12)),
        (lambda x: 1.0 / (1e-4 + x * x), -1.0, 1.0, 2e2 * math.atan(1e2)),
    ],
)
def test_known_integrals(f, a, b, exact):
    v, e = gauss_kronrod(f, a, b, epsabs=1e-13, epsrel=1e-13)
    assert v == pytest.approx(exact, rel=1e-11, abs=1e-11)
    w, _ = gauss_legendre_adaptive(f, a, b, epsabs=1e-13, epsrel=1e-13)
    assert w == pytest.approx(exact, rel=1e-11, abs=1e-11)


def test_many_intervals_match_single_calls():
    a = np.linspace(0.0, 2.0, 7)
    b = a + np.linspace(0.1, 3.0, 7)
    v, e = gauss_kronrod_many(np.cos, a, b)
    assert v.shape == a.shape and e.shape == a.shape
    np.testing.assert_allclose(v, np.sin(b) - np.sin(a), rtol=1e-12, atol=1e-13)


def test_reversed_interval_changes_sign():
    v, _ = gauss_kronrod(np.exp, 1.0, 0.0)
    assert v == pytest.approx(1.0 - math.e, rel=1e-13)


def test_nonfinite_integrand_raises():
    with pytest.raises(QuadratureFailure):
        gauss_kronrod(lambda x: np.where(x > 0.5, np.nan, x), 0.0, 1.0)


def test_unreachable_tolerance_raises():
    with pytest.raises(QuadratureFailure):
        gauss_kronrod(lambda x: np.sign(x - 0.3), 0.0, 1.0, epsabs=0.0, epsrel=1e-15, limit=40)
