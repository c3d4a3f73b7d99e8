import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate as si

from extremal_kit import lp, measure as me

SIN2 = lp.PeriodicSquareLP(np.pi, [0.0])


def sin2_g(t):
    # summing t e^{t n pi} over the double zeros n pi on the relevant side
    t = np.asarray(t, dtype=float)
    a = np.abs(t)
    with np.errstate(invalid="ignore", divide="ignore"):
        pos = np.where(t > 0, t / -np.expm1(-np.pi * t), 1 / np.pi)
        neg = a / np.expm1(np.pi * a)
    return np.where(t >= 0, pos, neg)


T_CHECK = np.array([-2.0, -1.0, -0.25, 0.25, 1.0, 2.0, 7.5, -6.0])


def test_sin2_frequency_function_against_geometric_sum():
    assert np.allclose(lp.g_c(SIN2, 0.5, T_CHECK), sin2_g(T_CHECK), rtol=1e-13, atol=1e-300)


def test_sin2_series_route_agrees_with_summed_route():
    assert np.allclose(lp.g_c(SIN2, 0.5, T_CHECK, method="series"), sin2_g(T_CHECK), rtol=1e-10)


def test_contour_quadrature_agrees_with_residues():
    t = np.array([-1.0, -0.25, 0.25, 1.0, 2.0])
    got = lp.g_contour(SIN2, 0.5, t)
    assert np.allclose(got, sin2_g(t), rtol=1e-6)


def test_frequency_function_derivative_by_differences():
    fr = SIN2.freq(0.5)
    t = np.array([-3.0, -0.7, 0.4, 2.2])
    h = 1e-6
    fd = (fr.value(t + h) - fr.value(t - h)) / (2 * h)
    assert np.allclose(fr.deriv(t), fd, rtol=1e-6)


@pytest.mark.parametrize("F,c", [
    (lp.HadamardLP(0, 0.3, 2.0, [1.5]), 0.5),
    (lp.HadamardLP(0, 0.3, 2.0, [1.5]), 3.0),
    (lp.HadamardLP(2, -0.2, 0.7), 0.5),
    (lp.HadamardLP(2, -0.2, 0.7), -0.5),
    (lp.HadamardLP(1, 0.4, 1.3), 0.5),
])
def test_closed_forms_match_residue_sums(F, c):
    t = np.linspace(-5, 5, 1000)
    t = t[np.abs(t - F.b) > 1e-9]
    if F.r == 0:
        t = t[np.abs(t - (F.b + 1 / F.xs[0])) > 1e-9]
    ref = lp.residue_freq(F, c).value(t)
    assert np.allclose(lp.g_closed_form(F, c, t), ref, rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("F,c,z", [
    (lp.HadamardLP(0, 0.3, 2.0, [1.5]), 0.5, 0.9),
    (lp.HadamardLP(2, -0.2, 0.7), 0.5, 1.7),
    (lp.HadamardLP(0, 0.0, 1.0, [-1.0, 2.0, 3.0], [1, 2, 1]), 0.5, 1.1),
])
def test_frequency_function_inverts_laplace_transform(F, c, z):
    # integral of g(t) e^{-tz} dt = 1 / F(z) for z in the strip containing c
    fr = lp.residue_freq(F, c)
    f = lambda t: float(fr.value(np.array([t]))[0]) * math.exp(-t * z)
    brk = F.b + (1 / F.xs[0] if F.r == 0 and len(F.xs) == 1 else 0.0)
    # the integrand has decayed below e^-100 at |t| = 200
    val = si.quad(f, -200.0, brk, limit=400)[0] + si.quad(f, brk, 200.0, limit=400)[0]
    assert val == pytest.approx(1 / float(F(z)), rel=1e-7)


def test_abscissa_on_a_zero_is_rejected():
    with pytest.raises(lp.LPError):
        lp.g_c(SIN2, np.pi, 1.0)
    with pytest.raises(lp.LPError):
        lp.PeriodicSquareLP(1.0, [0.2, 0.2])
    with pytest.raises(lp.LPError):
        lp.HadamardLP(0, 0.0, 1.0, [0.0])


@given(st.lists(st.floats(0.05, 0.95), min_size=1, max_size=4), st.floats(0.02, 0.3))
@settings(max_examples=25, deadline=None)
def test_periodic_square_g_is_nonnegative(base, frac):
    base = np.unique(np.round(base, 3))
    if len(base) > 1 and np.diff(base).min() < 0.02:
        return
    F = lp.PeriodicSquareLP(1.0, base)
    c = float(base[0] * frac)
    t = np.linspace(-30, 30, 601)
    g = F.freq(c).value(t)
    assert np.all(g > -1e-12 * np.abs(g).max())


def test_convolution_routes_agree():
    F = lp.PeriodicSquareLP(1.0, [0.0, 0.3, 0.55])
    for m in (me.dirac(0), me.ramp(2)):
        for t in (-1.3, 0.2, 0.7, 4.0):
            assert lp.g_conv_dmu(F, m, t) == pytest.approx(lp.g_conv_dmu(F, m, t, route="mu"), rel=1e-8, abs=1e-12)


@given(st.lists(st.floats(0.05, 0.95), min_size=1, max_size=3), st.sampled_from(["dirac", "ramp"]))
@settings(max_examples=8, deadline=None)
def test_minorant_and_majorant_bracket_f_mu(base, kind):
    base = np.unique(np.round(base, 2))
    if len(base) > 1 and np.diff(base).min() < 0.05:
        return
    F = lp.PeriodicSquareLP(1.0, np.concatenate([[0.0], base]))
    m = me.dirac(0) if kind == "dirac" else me.ramp(2)
    I = lp.Interpolant(F, m)
    x = np.linspace(-3.0, 3.0, 1201) + 1e-3
    f = me.f_mu(m, x)
    tol = 1e-9
    assert np.all(I.L(x) <= f + tol)
    assert np.all(I.M(x) >= f - tol)
    # the gap M - L is 2 F(x) / (F''(0) x^2)
    gap = I.M(x) - I.L(x)
    assert np.allclose(gap, 2 * F(x) / (F.second_derivative_at_zero() * x ** 2), rtol=1e-9, atol=1e-12)


def test_interpolant_matches_derivative_at_zeros():
    F = lp.PeriodicSquareLP(1.0, [0.0, 0.4])
    m = me.ramp(2)
    I = lp.Interpolant(F, m)
    h = 1e-5
    for xi in (0.4, 1.0, 1.4, 2.0):
        dL = (I.L(xi + h) - I.L(xi - h)) / (2 * h)
        df = (me.f_mu(m, xi + h) - me.f_mu(m, xi - h)) / (2 * h)
        assert I.L(xi) == pytest.approx(float(me.f_mu(m, xi)), abs=1e-10)
        assert dL == pytest.approx(df, abs=1e-6)


def test_truncated_hadamard_product_converges():
    z = 0.7 + 0.2j
    val, bound = lp.hadamard_product(SIN2, z, 400)
    exact = complex(SIN2(z))
    assert abs(val - exact) <= bound + 1e-14
    assert abs(val - exact) < 1e-2 * abs(exact)
    with pytest.raises(lp.LPError):
        lp.hadamard_product(SIN2, z, 0)
