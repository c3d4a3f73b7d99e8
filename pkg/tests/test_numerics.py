import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special as sps

from extremal_kit import numerics as nm


def test_gamma_values_and_poles():
    assert nm.gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    assert nm.gamma(5.0) == pytest.approx(24.0, rel=1e-15)
    with pytest.raises(nm.PoleError):
        nm.gamma(-2.0)


@pytest.mark.parametrize("nu", [0.0, 1.0, 3.0])
def test_bessel_zeros_integer_orders_against_scipy_table(nu):
    ref = sps.jn_zeros(int(nu), 30)
    assert np.allclose(nm.bessel_zeros(nu, 30), ref, rtol=1e-13, atol=0)


@pytest.mark.parametrize("nu", [-0.5, -0.3, 0.5, 1.7])
def test_bessel_zeros_fractional_orders_against_mpmath(nu):
    # high-precision roots started from the McMahon asymptotic guess
    got = nm.bessel_zeros(nu, 12)
    ref = [float(mpmath.findroot(lambda x: mpmath.besselj(nu, x), (k + nu / 2 - 0.25) * mpmath.pi))
           for k in range(1, 13)]
    assert np.allclose(got, ref, rtol=1e-12, atol=0)


def test_bessel_zero_half_orders_closed_form():
    # J_{1/2} ~ sin x / sqrt x and J_{-1/2} ~ cos x / sqrt x
    assert np.allclose(nm.bessel_zeros(-0.5, 20), np.pi * (np.arange(1, 21) - 0.5), rtol=1e-13)
    assert np.allclose(nm.bessel_zeros(0.5, 20), np.pi * np.arange(1, 21), rtol=1e-13)
    assert nm.bessel_zero(0.5, 3) == pytest.approx(3 * np.pi, rel=1e-13)
    with pytest.raises(ValueError):
        nm.bessel_zero(0.5, 0)


def test_bessel_order_must_exceed_minus_one():
    with pytest.raises(ValueError):
        nm.bessel_zeros(-1.0, 3)
    with pytest.raises(ValueError):
        nm.bessel_j(-1.5, 1.0)


@given(st.floats(0.3, 6.0))
@settings(max_examples=30, deadline=None)
def test_integrate_gamma_integral(s):
    v = nm.integrate(lambda x: x ** (s - 1) * math.exp(-x), 0.0, math.inf)
    assert v == pytest.approx(math.gamma(s), rel=1e-9)


def test_integrate_nonconvergence_reports_partial():
    with pytest.raises(nm.NonConvergenceError) as err:
        nm.integrate(lambda x: 1.0 / x, 1.0, math.inf)
    assert err.value.partial is not None


def test_integrate_complex_oscillatory():
    v = nm.integrate_complex(lambda x: np.exp(-x * (1 + 2j)), 0.0, math.inf)
    assert abs(v - 1 / (1 + 2j)) < 1e-12


@given(st.integers(1, 30))
@settings(max_examples=20, deadline=None)
def test_composite_gauss_exact_for_polynomials(order):
    x, w = nm.composite_gauss([0.0, 0.5, 2.0], order)
    deg = 2 * order - 1
    assert np.dot(w, x ** deg) == pytest.approx(2.0 ** (deg + 1) / (deg + 1), rel=1e-12)


def test_geometric_breaks_shape():
    br = nm.geometric_breaks(1.0, 3.0, floor=1e-6)
    assert br[0] == 1.0 and br[-1] == pytest.approx(3.0)
    assert np.all(np.diff(br) > 0)
    assert br[1] - br[0] <= 2e-6 * 2.0


@given(st.integers(2, 12), st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_solve_dense_matches_numpy(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, n)) + n * np.eye(n)
    b = rng.normal(size=n)
    assert np.allclose(nm.solve_dense(A, b), np.linalg.solve(A, b), rtol=1e-12, atol=1e-12)


def test_solve_dense_refuses_singular():
    with pytest.raises(nm.SingularMatrixError):
        nm.solve_dense([[1.0, 2.0], [2.0, 4.0]], [1.0, 2.0])
    with pytest.raises(nm.SingularMatrixError):
        nm.solve_dense(np.zeros((2, 2)), [1.0, 2.0])


def test_poly_eval_ascending():
    assert nm.poly_eval([1.0, 2.0, 3.0], 2.0) == pytest.approx(17.0)


@given(st.lists(st.floats(0.0, 1.0, exclude_max=True), min_size=1, max_size=9))
@settings(max_examples=40, deadline=None)
def test_roots_on_circle_recovers_unimodular_roots(xs):
    xs = np.sort(np.asarray(xs))
    gaps = np.diff(np.concatenate([xs, [xs[0] + 1]]))
    if len(xs) > 1 and gaps.min() < 0.02:
        return
    coeffs = np.polynomial.polynomial.polyfromroots(nm.e(xs)) * np.exp(0.7j)
    got = np.sort(nm.roots_on_circle(coeffs))
    d = np.abs(((got - xs) + 0.5) % 1.0 - 0.5)
    assert len(got) == len(xs)
    assert d.max() < 1e-9


def test_circle_character():
    assert abs(nm.e(0.25) - 1j) < 1e-15
