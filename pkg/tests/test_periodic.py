import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from extremal_kit import measure as me, opuc, periodic as pe

LEB = opuc.lebesgue()


def ramp2_periodized(x):
    # sum_n>=0 of 2(1 - e^{-t}(1 + t))/t^2 at t = u + n, split into a Hurwitz zeta
    # value and an exponentially convergent remainder
    u = x - math.floor(x) or 1.0
    with mpmath.workdps(30):
        rest = mpmath.nsum(lambda n: 2 * mpmath.exp(-(u + n)) * (1 + u + n) / (u + n) ** 2, [0, mpmath.inf])
        return float(2 * mpmath.zeta(2, u) - rest)


def test_dirac_periodization_closed_form():
    a = 0.8
    x = np.array([-1.3, 0.01, 0.5, 0.99, 1.0, 2.0, 3.7])
    u = np.where(np.mod(x, 1) == 0, 1.0, np.mod(x, 1))
    assert np.allclose(pe.F_mu(me.dirac(a), x), np.exp(-a * u) / -np.expm1(-a), rtol=1e-13)
    assert np.allclose(pe.F_mu_deriv(me.dirac(a), x[x % 1 != 0]),
                       -a * np.exp(-a * u[x % 1 != 0]) / -np.expm1(-a), rtol=1e-13)


@pytest.mark.parametrize("x", [0.1, 0.5, 0.93, 1.0, -2.25])
def test_ramp_periodization_against_mpmath_sum(x):
    assert pe.F_mu(me.ramp(2), x) == pytest.approx(ramp2_periodized(x), rel=1e-10)


def test_direct_sum_oracle_for_fast_decay():
    m = me.dirac(0.6)
    for x in (0.2, 0.75):
        assert pe.F_mu(m, x) == pytest.approx(pe.F_mu_direct(m, x, terms=400), rel=1e-12)


def test_odd_periodization_of_sign_is_sawtooth():
    x = np.array([-0.75, 0.1, 0.5, 0.9, 2.25, 3.0])
    want = np.where(np.mod(x, 1) == 0, 0.0, 1 - 2 * np.mod(x, 1))
    assert np.allclose(pe.F_mu_tilde(me.dirac(0), x), want, atol=1e-14)
    assert np.allclose(pe.F_mu_tilde_deriv(me.dirac(0), x[:-1]), -2.0)


@pytest.mark.parametrize("m,odd", [(me.ramp(2), False), (me.dirac(0.3), False), (me.ramp(3.5), False),
                                   (me.exponential(), True), (me.ramp(2), True), (me.dirac(0), True)])
@pytest.mark.parametrize("deriv", [False, True])
def test_kernel_route_matches_distribution_route(m, odd, deriv):
    for x in (0.07, 0.4, 0.81):
        fn = {(False, False): pe.F_mu, (True, False): pe.F_mu_tilde,
              (False, True): pe.F_mu_deriv, (True, True): pe.F_mu_tilde_deriv}[(odd, deriv)]
        assert fn(m, x) == pytest.approx(pe.F_mu_ibp(m, x, odd, deriv), rel=1e-9, abs=1e-12)


def test_derivative_by_differences():
    m, h = me.ramp(2), 1e-6
    for x in (0.2, 0.66):
        fd = (pe.F_mu(m, x + h) - pe.F_mu(m, x - h)) / (2 * h)
        assert pe.F_mu_deriv(m, x) == pytest.approx(fd, rel=1e-7)


def test_hypothesis_and_domain_errors():
    with pytest.raises(me.HypothesisError):
        pe.F_mu(me.dirac(0), 0.3)
    with pytest.raises(me.HypothesisError):
        pe.F_mu_tilde(me.dirac(-0.5), 0.3)
    with pytest.raises(pe.IntegerPointError):
        pe.F_mu_deriv(me.ramp(2), np.array([0.5, 2.0]))
    with pytest.raises(me.MeasureError):
        pe.F_mu_tilde(me.sine(1.0), 0.3)


def test_trig_poly_basics():
    p = pe.TrigPoly.from_real_basis([0.5, 1.0, -2.0, 0.25, 3.0])
    x = np.linspace(0, 1, 9)
    direct = 0.5 + 2 * (1.0 * np.cos(2 * np.pi * x) - 0.25 * np.sin(2 * np.pi * x)) \
        + 2 * (-2.0 * np.cos(4 * np.pi * x) - 3.0 * np.sin(4 * np.pi * x))
    assert np.allclose(p(x), direct)
    assert p.N == 2 and p.coeff(1) == pytest.approx(1.0 + 0.25j)
    h = 1e-6
    assert np.allclose(p.deriv()(x), (p(x + h) - p(x - h)) / (2 * h), rtol=1e-6, atol=1e-6)
    assert p.integral(LEB) == pytest.approx(0.5)
    # against 1 - cos(4 pi x): a_0 - (a_2 + a_-2)/2
    assert p.integral(opuc.jacobi(1, 1)) == pytest.approx(0.5 + 2.0)
    assert p.to_csv().splitlines()[0] == "k,re,im"
    with pytest.raises(ValueError):
        pe.TrigPoly([1, 2])
    with pytest.raises(ValueError):
        pe.TrigPoly([1j, 0, 1j])


@pytest.mark.parametrize("N", range(1, 17))
def test_sawtooth_polynomials(N):
    pair = pe.periodic_extremal(LEB, me.dirac(0), N, "odd")
    assert pair.majorant.integral(LEB) == pytest.approx(1 / (N + 1), abs=1e-10)
    assert pair.minorant.integral(LEB) == pytest.approx(-1 / (N + 1), abs=1e-10)
    assert pair.majorant(0.0) == pytest.approx(1.0, abs=1e-10)
    assert pair.minorant(0.0) == pytest.approx(-1.0, abs=1e-10)
    # the gap is a multiple of the Fejer kernel
    x = np.linspace(0.001, 0.999, 501)
    fej = 2 / (N + 1) ** 2 * (np.sin(np.pi * (N + 1) * x) / np.sin(np.pi * x)) ** 2
    assert np.allclose(pair.majorant(x) - pair.minorant(x), fej, atol=1e-11)


@given(st.floats(-0.3, 2.5), st.floats(-0.3, 2.5), st.integers(1, 10),
       st.sampled_from(["ramp2", "ramp3", "dirac", "exp"]), st.sampled_from(["truncated", "odd"]))
@settings(max_examples=25, deadline=None)
def test_one_sided_and_optimal(a, b, N, mname, kind):
    m = {"ramp2": me.ramp(2), "ramp3": me.ramp(3), "dirac": me.dirac(0.5), "exp": me.exponential()}[mname]
    if mname == "exp" and kind == "truncated":
        return
    th = opuc.jacobi(a, b)
    pair = pe.periodic_extremal(th, m, N, kind, grid=2000)
    assert pair.check["min_gap_minorant"] >= -1e-9
    assert pair.check["min_gap_majorant"] >= -1e-9
    lo, hi = pair.theorem_sums()
    assert pair.minorant.integral(th) == pytest.approx(lo, abs=1e-9)
    assert pair.majorant.integral(th) == pytest.approx(hi, abs=1e-9)
    assert pe.periodic_optimal_value(th, m, N, kind) == pytest.approx(lo, abs=1e-12)
    # interpolation at the nonzero nodes
    nz = pair.rule.nodes[1:]
    assert np.allclose(pair.minorant(nz), pair.target(nz), atol=1e-9)


def test_degree_zero():
    pair = pe.periodic_extremal(LEB, me.ramp(2), 0)
    assert pair.minorant.N == 0
    assert pair.minorant(0.3) == pytest.approx(ramp2_periodized(0.0), rel=1e-10)
    assert pair.majorant(0.3) == pytest.approx(ramp2_periodized(0.0) + 1.0, rel=1e-8)


def test_kind_requirements():
    with pytest.raises(me.HypothesisError):
        pe.periodic_extremal(LEB, me.dirac(0), 3, "truncated")
    with pytest.raises(ValueError):
        pe.periodic_extremal(LEB, me.ramp(2), 3, "even")


def test_translated_measures_converge_with_bounded_coefficients():
    base = pe.periodic_extremal(LEB, me.dirac(0), 6, "odd")
    errs, sizes = [], []
    for n in (1, 2, 4, 8, 16, 32, 64):
        p = pe.approx_general(LEB, me.dirac(0), 6, n)
        assert p.shift == pytest.approx(1 / n)
        errs.append(np.abs(p.minorant.coeffs - base.minorant.coeffs).max())
        sizes.append(max(np.abs(p.minorant.coeffs).max(), np.abs(p.majorant.coeffs).max()))
    assert max(sizes) < 2 * np.abs(base.majorant.coeffs).max() + 1
    assert all(e2 < e1 for e1, e2 in zip(errs, errs[1:]))
    assert errs[-1] < 1e-4
    with pytest.raises(ValueError):
        pe.approx_general(LEB, me.dirac(0), 6, 0)


@pytest.mark.parametrize("theta,m,N,kind", [(opuc.jacobi(1, 1), me.ramp(2), 4, "truncated"),
                                            (LEB, me.ramp(2), 3, "odd"),
                                            (LEB, me.dirac(0.5), 5, "truncated")])
def test_poisson_route(theta, m, N, kind):
    rep = pe.poisson_crosscheck(theta, m, N, kind, grid=400)
    assert rep.max_dev_minorant < 1e-8
    assert rep.max_dev_majorant < 1e-8
    assert rep.node_residual < 1e-8


def test_verification_grid_hugs_nodes():
    g = pe.verification_grid(np.array([0.0, 0.5]), n=100)
    assert np.all((g >= 0) & (g < 1))
    assert np.min(np.abs(g - 0.5)[g != 0.5]) <= 1e-7 * 1.0001
