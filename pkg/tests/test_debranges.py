import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from extremal_kit import debranges as db, measure as me

# pi/3 - sum_k 2 e^{-k pi}(1 + k pi)/(k^2 pi), evaluated with mpmath at 40 digits
RAMP2_PW1_MINORANT = 0.93103276746619080


def test_kernel_at_origin():
    assert db.PaleyWiener(2.5).K00 == pytest.approx(2.5 / math.pi, rel=1e-15)
    for nu in (-0.5, 0.0, 0.7, 3.0):
        assert db.Homogeneous(nu).K00 == pytest.approx(1 / (2 * math.pi * (nu + 1)), rel=1e-14)
    assert db.optimal_value(db.PaleyWiener(1.0), "odd") == pytest.approx(2 * math.pi)


def test_minus_half_order_is_paley_wiener():
    h, pw = db.Homogeneous(-0.5), db.PaleyWiener(1.0)
    x = np.linspace(-20, 20, 401)
    assert np.allclose(h.A(x), pw.A(x), atol=1e-12)
    assert np.allclose(h.B(x), pw.B(x), atol=1e-12)
    assert np.allclose(h.kernel_diag(x), 1 / math.pi, atol=1e-12)


@pytest.mark.parametrize("nu", [-0.3, 0.0, 1.5])
def test_companions_against_mpmath(nu):
    h = db.Homogeneous(nu)
    g = math.gamma(nu + 1)
    for x in (0.3, 5.9, 6.1, 17.0, -9.0):
        a = g * mpmath.besselj(nu, abs(x)) / (abs(x) / 2) ** nu
        b = math.copysign(1, x) * g * mpmath.besselj(nu + 1, abs(x)) / (abs(x) / 2) ** nu
        assert h.A(x) == pytest.approx(float(a), abs=1e-12)
        assert h.B(x) == pytest.approx(float(b), abs=1e-12)


@pytest.mark.parametrize("space", [db.PaleyWiener(1.3), db.Homogeneous(0.0), db.Homogeneous(2.0)])
@given(st.floats(-15, 15), st.floats(0.01, 8))
@settings(max_examples=40, deadline=None)
def test_hermite_biehler_inequality(space, x, y):
    z = complex(x, y)
    assert abs(space.E_star(z)) < abs(space.E(z))


@pytest.mark.parametrize("space", [db.PaleyWiener(1.0), db.Homogeneous(0.0), db.Homogeneous(0.8)])
def test_kernel_gram_matrix_is_positive(space):
    pts = np.array([-3.1, -0.4, 0.0, 0.9, 2.2, 7.3]) + 0.2j
    K = space.kernel(pts[:, None], pts[None, :])
    assert np.allclose(K, K.conj().T, atol=1e-12)
    assert np.linalg.eigvalsh(K).min() > -1e-12


@pytest.mark.parametrize("space", [db.PaleyWiener(1.0), db.Homogeneous(0.0), db.Homogeneous(0.8)])
def test_kernel_diagonal_forms_agree(space):
    x = np.array([0.0, 1e-4, 0.5, 3.0, 11.0])
    assert np.allclose(space.kernel(x, x).real, space.kernel_diag(x), rtol=1e-8)
    assert space.kernel_diag(np.array([0.0]))[0] == pytest.approx(space.K00, rel=1e-12)


CASES = [(sp, m, kind) for sp in (db.PaleyWiener(1.0), db.Homogeneous(0.0))
         for m in (me.ramp(2), me.dirac(0.5)) for kind in ("truncated", "odd")]


@pytest.mark.parametrize("space,m,kind", CASES)
def test_extremal_pair_sandwich_and_interpolation(space, m, kind):
    p = db.extremal_pair(space, m, kind)
    x = np.linspace(-25, 25, 1001) + 1e-3
    f = p.target(x)
    assert np.all(p.minorant(x) <= f + 1e-9)
    assert np.all(p.majorant(x) >= f - 1e-9)
    xi = space.B_zeros(20)
    xi = np.concatenate([xi, -xi])
    assert np.abs(p.minorant(xi) - p.target(xi)).max() < 1e-8
    assert np.abs(p.majorant(xi) - p.target(xi)).max() < 1e-8


@pytest.mark.parametrize("space,m,kind", CASES)
def test_gap_is_kernel_square(space, m, kind):
    p = db.extremal_pair(space, m, kind)
    x = np.linspace(-30, 30, 777)
    gap = p.majorant(x) - p.minorant(x)
    assert np.all(np.abs(gap - p.gap_identity(x)) / (1 + np.abs(gap)) < 1e-8)


def test_hypothesis_failures():
    with pytest.raises(me.HypothesisError) as err:
        db.extremal_pair(db.PaleyWiener(1.0), me.sine(1.0), "odd")
    assert "H3" in err.value.failing
    p = db.extremal_pair(db.PaleyWiener(1.0), me.sine(1.0), "truncated", minorant_only=True)
    x = np.linspace(0.1, 20, 200)
    assert np.all(p.minorant(x) <= p.target(x) + 1e-9)
    with pytest.raises(db.SupportError):
        db.extremal_pair(db.PaleyWiener(1.0), me.dirac(-3.0))


def test_corollary_sums_against_independent_sum():
    sp, m = db.PaleyWiener(1.0), me.ramp(2)
    lo = db.minorant_integral(sp, m)
    assert lo == pytest.approx(RAMP2_PW1_MINORANT, rel=1e-10)
    assert db.majorant_integral(sp, m) - lo == pytest.approx(math.pi, rel=1e-13)
    lo_odd, hi_odd = db.odd_integrals(sp, m)
    assert lo_odd == pytest.approx(-math.pi, rel=1e-12)
    assert hi_odd == pytest.approx(math.pi, rel=1e-12)


def test_homogeneous_zero_sum_against_mpmath():
    # at nu = 0 the nodes are the zeros j of J_1, where K(j, j) = J_0(j)^2 / pi
    sp, m = db.Homogeneous(0.0), me.dirac(1.0)
    got = db.minorant_integral(sp, m)
    ref = mpmath.fsum(mpmath.pi * mpmath.exp(-j) / mpmath.besselj(0, j) ** 2
                      for j in (mpmath.besseljzero(1, k) for k in range(1, 40)))
    assert got == pytest.approx(float(ref), rel=1e-12)


def test_l1_precondition():
    with pytest.raises(db.L1Error):
        db.minorant_integral(db.PaleyWiener(1.0), me.exponential())
    with pytest.raises(db.L1Error):
        db.minorant_integral(db.Homogeneous(0.5), me.ramp(2))


@pytest.mark.parametrize("nu", [-0.5, 0.0, 0.5, 1.0])
@pytest.mark.parametrize("delta", [1.0, 2.0, 2 * math.pi])
def test_power_weight_value_two_routes(nu, delta):
    assert db.delta_nu(nu, delta) == pytest.approx(db.delta_nu_reconstructed(nu, delta), rel=1e-12)
    assert db.delta_nu(nu, delta, kind="odd") == pytest.approx(db.delta_nu_reconstructed(nu, delta, "odd"), rel=1e-12)


def test_power_weight_value_special_cases():
    assert db.delta_nu(-0.5, 2.0, kind="odd") == pytest.approx(2 * math.pi, rel=1e-15)
    assert db.delta_nu(0.0, 1.0, me.dirac(-2.0)) == math.inf
    with pytest.raises(ValueError):
        db.delta_nu(-1.0, 1.0)


@pytest.mark.parametrize("nu", [0.0, 0.5])
def test_isometry_constant(nu):
    lhs, rhs = db.isometry_integrals(db.Homogeneous(nu))
    assert lhs / rhs == pytest.approx(db.c_nu(nu), rel=1e-6)


def test_parse_space():
    assert db.parse_space("pw:tau=2") == db.PaleyWiener(2.0)
    assert db.parse_space("homog:nu=0.5") == db.Homogeneous(0.5)
    for bad in ("homog", "pw:tau=x", "torus:n=1"):
        with pytest.raises(db.SpaceError):
            db.parse_space(bad)
    with pytest.raises(db.SpaceError):
        db.Homogeneous(-1.0)
