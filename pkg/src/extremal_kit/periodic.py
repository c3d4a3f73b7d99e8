"""Periodizations of f_mu and extremal trigonometric polynomials.

For a measure on [0, inf) the periodization is

    F_mu(x) = sum_n f_mu(x + n) = integral of k(lambda, u) d mu(lambda),

with u = x - floor(x) taken in (0, 1] and k(lambda, u) = e^{-lambda u}/(1 - e^{-lambda}).
The odd version uses k~(lambda, u) = -sinh(lambda psi)/sinh(lambda/2), psi = u - 1/2,
which stays bounded as lambda -> 0.  The same functions are also available as
integrals of the closed-form kernels h, h~ against the distribution function.

The extremal polynomials of degree N for a circle measure theta interpolate
the target at the zeros of the companion B_{N+1} to second order away from
0, with prescribed values at 0; they are found from the real 2N+1 linear
system and then checked for one-sidedness.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy import special as sps

from . import lp
from . import measure as ms
from . import numerics as nm
from . import opuc


class OneSidedError(ArithmeticError):
    """The constructed polynomial crosses the target by more than the tolerance."""

    def __init__(self, msg, where=None, amount=None):
        super().__init__(msg)
        self.where, self.amount = where, amount


class IntegerPointError(ValueError):
    """Derivative requested at an integer."""


def _frac_right(x):
    """x - floor(x) mapped into (0, 1]."""
    u = np.mod(np.asarray(x, dtype=float), 1.0)
    return np.where(u == 0, 1.0, u)


# ---------------------------------------------------------------------------
# closed-form kernels against the distribution function

def h(lam, x):
    """Periodization of x e^{-lambda x} chi_{x>0}; continuous, equal at both ends of a period."""
    lam = np.asarray(lam, dtype=float)
    u = np.mod(np.asarray(x, dtype=float), 1.0)
    q = np.exp(-lam)
    return np.exp(-lam * u) * (u + (1 - u) * q) / np.expm1(-lam) ** 2


def _series_odd_num(a, p, q, terms=30):
    # p sinh(aq) - q sinh(ap) = pq sum_{k>=1} a^{2k+1} (q^{2k} - p^{2k}) / (2k+1)!
    acc = np.zeros(np.broadcast(a, p, q).shape)
    for k in range(1, terms):
        acc = acc + a ** (2 * k + 1) * (q ** (2 * k) - p ** (2 * k)) / math.factorial(2 * k + 1)
    return p * q * acc


def h_tilde(lam, x):
    """h(lambda, x) - h(lambda, 1 - x), evaluated without cancellation for small lambda."""
    lam, x = np.broadcast_arrays(np.asarray(lam, dtype=float), np.asarray(x, dtype=float))
    u = np.mod(x, 1.0)
    out = np.empty(lam.shape)
    small = lam < 1.0
    if np.any(small):
        a = 0.5 * lam[small]
        psi = u[small] - 0.5
        p, q = 1 + 2 * psi, 1 - 2 * psi
        out[small] = 0.25 * _series_odd_num(a, p, q) / np.sinh(a) ** 2
    if np.any(~small):
        out[~small] = h(lam[~small], u[~small]) - h(lam[~small], 1.0 - u[~small])
    return out if out.ndim else out[()]


def _dh_num_series(a, psi, terms=32):
    # e^{aq}(1 - ap) - e^{-ap}(1 + aq) = sum_{n>=2} a^n c_n
    p, q = 1 + 2 * psi, 1 - 2 * psi
    acc = np.zeros(np.broadcast(a, psi).shape)
    for n in range(2, terms):
        c = (q ** n - (-p) ** n) / math.factorial(n) - (p * q ** (n - 1) + q * (-p) ** (n - 1)) / math.factorial(n - 1)
        acc = acc + a ** n * c
    return acc


def dh(lam, x):
    """d/dx h(lambda, x) for x not an integer."""
    lam, x = np.broadcast_arrays(np.asarray(lam, dtype=float), np.asarray(x, dtype=float))
    u = np.mod(x, 1.0)
    out = np.empty(lam.shape)
    small = lam < 1.0
    if np.any(small):
        a = 0.5 * lam[small]
        out[small] = _dh_num_series(a, u[small] - 0.5) / (4 * np.sinh(a) ** 2)
    if np.any(~small):
        L, U = lam[~small], u[~small]
        q = np.exp(-L)
        out[~small] = np.exp(-L * U) * ((1 - q) - L * (U + (1 - U) * q)) / np.expm1(-L) ** 2
    return out if out.ndim else out[()]


def dh_tilde(lam, x):
    u = np.mod(np.asarray(x, dtype=float), 1.0)
    return dh(lam, u) + dh(lam, 1.0 - u)


# ---------------------------------------------------------------------------
# kernels against d mu

def k_trunc(lam, u):
    lam = np.asarray(lam, dtype=float)
    with np.errstate(divide="ignore"):
        return np.exp(-lam * u) / -np.expm1(-lam)


def dk_trunc(lam, u):
    lam = np.asarray(lam, dtype=float)
    return -lam * np.exp(-lam * u) / -np.expm1(-lam)


def k_odd(lam, u):
    """-sinh(lambda psi)/sinh(lambda/2) with psi = u - 1/2; equals -2 psi at lambda = 0."""
    lam = np.asarray(lam, dtype=float)
    psi = np.asarray(u, dtype=float) - 0.5
    lam, psi = np.broadcast_arrays(lam, psi)
    out = np.empty(lam.shape)
    z = lam == 0
    out[z] = -2 * psi[z]
    nz = ~z
    L, P = lam[nz], psi[nz]
    # e^{lambda(|psi| - 1/2)} (1 - e^{-2 lambda |psi|}) / (1 - e^{-lambda})
    out[nz] = -np.sign(P) * np.exp(L * (np.abs(P) - 0.5)) * -np.expm1(-2 * L * np.abs(P)) / -np.expm1(-L)
    return out if out.ndim else out[()]


def dk_odd(lam, u):
    """d/dx of k_odd: -lambda cosh(lambda psi)/sinh(lambda/2); -2 at lambda = 0."""
    lam = np.asarray(lam, dtype=float)
    psi = np.asarray(u, dtype=float) - 0.5
    lam, psi = np.broadcast_arrays(lam, psi)
    out = np.empty(lam.shape)
    z = lam == 0
    out[z] = -2.0
    nz = ~z
    L, P = lam[nz], np.abs(psi[nz])
    out[nz] = -L * np.exp(L * (P - 0.5)) * (1 + np.exp(-2 * L * P)) / -np.expm1(-L)
    return out if out.ndim else out[()]


def _lambda_rule(m: ms.Measure, order: int = 40):
    """Nodes and weights for integrals of lambda-smooth kernels against the densities.

    Kernels of the truncated case behave like 1/lambda at 0.  A ramp starting
    at a gets a Gauss-Jacobi rule carrying (lambda - a)^{p-1}, or lambda^{p-2}
    with the extra lambda moved into the weights when a = 0, so the quadrature
    only sees a smooth integrand.  Returned weights include the pdf.
    """
    lams, ws = [], []
    for d in m.densities:
        if not d.decays:
            raise ms.MeasureError("the periodic construction needs densities with decaying tails")
        if d.family == "ramp":
            p = d.params[0]
            a, top = d.a, d.a + min(d.hi - d.lo, 1.0)
            beta = p - 2.0 if (a == 0 and p > 1) else p - 1.0
            x, w = sps.roots_jacobi(order, 0.0, beta)
            half = 0.5 * (top - a)
            lam = a + half * (1 + x)
            # pdf = p (lambda - a)^{p-1} = p half^{p-1} (1+x)^{p-1}
            ww = p * half ** (beta + 1) * w
            if beta == p - 2.0:
                ww = ww * lam
            lams.append(lam)
            ws.append(ww)
            if d.b > top:
                x2, w2 = d.nodes(20, width=2.0)
                keep = x2 > top
                lams.append(x2[keep])
                ws.append(w2[keep])
        else:
            x, w = d.nodes(20, width=1.0)
            if d.a == 0:
                br = nm.geometric_breaks(0.0, 1.0, floor=1e-14)
                xg, wg = nm.composite_gauss(br, 12)
                keep = x > 1.0
                x = np.concatenate([xg, x[keep]])
                w = np.concatenate([wg * d.pdf(xg), w[keep]])
            lams.append(x)
            ws.append(w)
    if not lams:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(lams), np.concatenate(ws)


def _apply(m: ms.Measure, kern, x, zero_atom=None):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return _apply_u(m, kern, _frac_right(x), zero_atom)


def _apply_u(m: ms.Measure, kern, u, zero_atom=None):
    u = np.atleast_1d(u)
    out = np.zeros(u.shape)
    for loc, mass in m.atoms:
        if loc == 0 and zero_atom is not None:
            out += mass * zero_atom(u)
        else:
            out += mass * kern(np.full(u.shape, loc), u)
    lam, w = _lambda_rule(m)
    if len(lam):
        for i0 in range(0, len(u), 2048):
            uu = u[i0:i0 + 2048]
            out[i0:i0 + 2048] += kern(lam[None, :], uu[:, None]) @ w
    return out


def _require_periodic(m: ms.Measure, need_h4: bool):
    if m.support_lower_bound < 0:
        raise ms.HypothesisError("(H1') fails: support must lie in [0, inf)", ["H1'"])
    if need_h4:
        for loc, mass in m.atoms:
            if loc == 0 and mass != 0:
                raise ms.HypothesisError("(H4) fails: atom at the origin", ["H4"])
        for d in m.densities:
            if d.a == 0 and not (d.family == "ramp" and d.params[0] > 1):
                raise ms.HypothesisError("(H4) fails: density does not vanish fast enough at 0", ["H4"])


def F_mu(m: ms.Measure, x):
    """Periodization of f_mu; left-continuous at the integers."""
    _require_periodic(m, True)
    out = _apply(m, k_trunc, x)
    return out if np.ndim(x) else float(out[0])


def F_mu_tilde(m: ms.Measure, x):
    """Periodization of the odd function f~_mu; zero at the integers."""
    _require_periodic(m, False)
    x = np.asarray(x, dtype=float)
    out = _apply(m, k_odd, x)
    out = np.where(np.mod(x, 1.0) == 0, 0.0, out.reshape(x.shape))
    return out if np.ndim(x) else float(out)


def _no_integers(x):
    if np.any(np.mod(np.asarray(x, dtype=float), 1.0) == 0):
        raise IntegerPointError("derivative requested at an integer")


def F_mu_deriv(m: ms.Measure, x):
    _no_integers(x)
    _require_periodic(m, True)
    out = _apply(m, dk_trunc, x)
    return out if np.ndim(x) else float(out[0])


def F_mu_tilde_deriv(m: ms.Measure, x):
    _no_integers(x)
    _require_periodic(m, False)
    out = _apply(m, dk_odd, x, zero_atom=lambda u: np.full(u.shape, -2.0))
    return out if np.ndim(x) else float(out[0])


def F_mu_ibp(m: ms.Measure, x: float, odd: bool = False, deriv: bool = False) -> float:
    """Same quantities as integrals of h, h~ (or their x-derivatives) against the distribution."""
    _require_periodic(m, not odd)
    kern = {(False, False): h, (True, False): h_tilde, (False, True): dh, (True, True): dh_tilde}[(odd, deriv)]
    pts = sorted({1.0, *[p for p in m.breaks() if p > 0]})
    f = lambda lam: float(kern(lam, x) * ms.distribution(m, lam))
    return nm.integrate(f, 0.0, math.inf, points=pts)


def F_mu_direct(m: ms.Measure, x: float, terms: int = 50) -> float:
    """sum_{|n| <= terms} f_mu(x + n) (periodization oracle)."""
    n = np.arange(-terms, terms + 1)
    return float(np.sum(np.asarray(ms.f_mu(m, x + n)).real))


# ---------------------------------------------------------------------------
# trigonometric polynomials

@dataclass
class TrigPoly:
    """sum_{|k| <= N} a_k e(k x), coefficients stored for k = -N..N."""

    coeffs: NDArray
    real: bool = True

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if len(self.coeffs) % 2 != 1:
            raise ValueError("need 2N+1 coefficients")
        if self.real:
            c = self.coeffs
            if np.max(np.abs(c - np.conj(c[::-1])), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(c))):
                raise ValueError("coefficients are not those of a real polynomial")

    @property
    def N(self) -> int:
        return (len(self.coeffs) - 1) // 2

    def coeff(self, k: int) -> complex:
        return complex(self.coeffs[k + self.N])

    @classmethod
    def from_real_basis(cls, v) -> "TrigPoly":
        """From (a_0, Re a_1..Re a_N, Im a_1..Im a_N)."""
        v = np.asarray(v, dtype=float)
        N = (len(v) - 1) // 2
        pos = v[1:N + 1] + 1j * v[N + 1:]
        return cls(np.concatenate([np.conj(pos[::-1]), [v[0]], pos]))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        k = np.arange(-self.N, self.N + 1)
        vals = np.exp(2j * np.pi * np.multiply.outer(x, k)) @ self.coeffs
        return vals.real if self.real else vals

    def deriv(self) -> "TrigPoly":
        k = np.arange(-self.N, self.N + 1)
        return TrigPoly(2j * np.pi * k * self.coeffs, self.real)

    def integral(self, theta: opuc.CircleMeasure) -> complex:
        """Integral against theta: sum_k a_k conj(m_k)."""
        mom = theta.moments(self.N)
        val = complex(np.dot(self.coeffs, np.conj(mom)))
        return val.real if self.real else val

    def to_csv(self) -> str:
        rows = ["k,re,im"] + [f"{k},{c.real:.17g},{c.imag:.17g}"
                              for k, c in zip(range(-self.N, self.N + 1), self.coeffs)]
        return "\n".join(rows) + "\n"


def _interp_matrix(nodes: NDArray, N: int) -> NDArray:
    """Rows: values at every node, derivatives at the nonzero nodes, in the real basis."""
    k = np.arange(1, N + 1)
    rows = []
    for xi in nodes:
        ang = 2 * np.pi * k * xi
        rows.append(np.concatenate([[1.0], 2 * np.cos(ang), -2 * np.sin(ang)]))
    for xi in nodes[1:]:
        ang = 2 * np.pi * k * xi
        rows.append(np.concatenate([[0.0], -4 * np.pi * k * np.sin(ang), -4 * np.pi * k * np.cos(ang)]))
    return np.array(rows)


@dataclass
class PeriodicExtremalPair:
    minorant: TrigPoly
    majorant: TrigPoly
    kind: str
    theta: opuc.CircleMeasure
    measure: ms.Measure
    rule: opuc.QuadratureRule
    node_values: dict = field(default_factory=dict)
    shift: float = 0.0
    check: dict = field(default_factory=dict)

    def target(self, x):
        if self.kind == "odd":
            return F_mu_tilde(self.measure, x)
        return F_mu(self.measure, x)

    def theorem_sums(self) -> tuple[float, float]:
        return self.node_values["sum_minorant"], self.node_values["sum_majorant"]


def verification_grid(nodes, n: int = 10_000, near: int = 16, reach: float = 1e-3) -> NDArray:
    """Uniform grid plus points geometrically close to each node (on both sides)."""
    off = np.geomspace(1e-7, reach, near)
    extra = [np.mod(xi + s * off, 1.0) for xi in nodes for s in (-1, 1)]
    return np.unique(np.concatenate([np.arange(n) / n, *extra]))


def _targets(m: ms.Measure, kind: str, nodes: NDArray):
    nz = nodes[1:]
    if kind == "truncated":
        vals = F_mu(m, nz)
        ders = F_mu_deriv(m, nz)
        at0 = float(F_mu(m, np.array([0.0]))[0])
        jump = ms.f_mu_limit_at_zero(m).value
        return vals, ders, at0, at0 + jump
    vals = F_mu_tilde(m, nz)
    ders = F_mu_tilde_deriv(m, nz)
    return vals, ders, -1.0, 1.0


def periodic_extremal(theta: opuc.CircleMeasure, m: ms.Measure, N: int, kind: str = "truncated",
                      tol: float = 1e-8, verify: bool = True, grid: int = 10_000) -> PeriodicExtremalPair:
    """Extremal real trigonometric minorant and majorant of degree N for the periodized target."""
    if kind not in ("truncated", "odd"):
        raise ValueError("kind is 'truncated' or 'odd'")
    rep = ms.check_hypotheses(m)
    rep.require("H1'", "H2")
    rep.require("H3") if kind == "odd" else rep.require("H4")
    basis = opuc.opuc_basis(theta, N)
    rule = opuc.quadrature_rule(basis, "B")
    nodes = rule.nodes
    vals, ders, lo0, hi0 = _targets(m, kind, nodes)
    if kind == "truncated" and rep.h3 != "holds":
        hi0 = lo0 + ms.f_mu_limit_at_zero(m).value
    Amat = _interp_matrix(nodes, N)
    rhs_lo = np.concatenate([[lo0], vals, ders])
    rhs_hi = np.concatenate([[hi0], vals, ders])
    try:
        sol = nm.solve_dense(Amat, np.column_stack([rhs_lo, rhs_hi]))
    except nm.SingularMatrixError as exc:
        raise nm.SingularMatrixError(f"interpolation system is singular: {exc}") from None
    Lp, Mp = TrigPoly.from_real_basis(sol[:, 0]), TrigPoly.from_real_basis(sol[:, 1])
    w = rule.weights
    sums = {
        "sum_minorant": float(lo0 * w[0] + np.dot(w[1:], vals)),
        "sum_majorant": float(hi0 * w[0] + np.dot(w[1:], vals)),
        "value_at_zero": (lo0, hi0),
    }
    pair = PeriodicExtremalPair(Lp, Mp, kind, theta, m, rule, sums)
    if verify:
        x = verification_grid(nodes, grid)
        f = pair.target(x)
        gl, gm = f - Lp(x), Mp(x) - f
        pair.check = {"min_gap_minorant": float(gl.min()), "min_gap_majorant": float(gm.min()),
                      "grid_points": int(len(x))}
        for name, gap in (("minorant", gl), ("majorant", gm)):
            if gap.min() < -tol:
                i = int(np.argmin(gap))
                raise OneSidedError(f"{name} crosses the target by {-gap[i]:.3g} at x={x[i]:.6g}", x[i], -gap[i])
    return pair


def periodic_optimal_value(theta: opuc.CircleMeasure, m: ms.Measure, N: int, kind: str = "truncated",
                           side: str = "minorant") -> float:
    """The quadrature sum giving the optimal integral against theta."""
    rule = opuc.quadrature_rule(opuc.opuc_basis(theta, N), "B")
    vals, _, lo0, hi0 = _targets(m, kind, rule.nodes) if len(rule.nodes) > 1 else (np.zeros(0), None, *_node0(m, kind))
    v0 = lo0 if side == "minorant" else hi0
    return float(v0 * rule.weights[0] + np.dot(rule.weights[1:], vals))


def _node0(m, kind):
    if kind == "odd":
        return -1.0, 1.0
    at0 = float(F_mu(m, np.array([0.0]))[0])
    return at0, at0 + ms.f_mu_limit_at_zero(m).value


def approx_general(theta: opuc.CircleMeasure, m: ms.Measure, N: int, n: int, kind: str = "odd",
                   **kw) -> PeriodicExtremalPair:
    """Pair for the measure translated by 1/n, which satisfies (H4) when m does not."""
    if n < 1:
        raise ValueError("shift index starts at 1")
    rep = ms.check_hypotheses(m)
    rep.require("H1'", "H2", "H3")
    pair = periodic_extremal(theta, m.shifted(1.0 / n), N, kind, **kw)
    pair.shift = 1.0 / n
    return pair


# ---------------------------------------------------------------------------
# second route: periodize the entire-function interpolants

def b_square_lp(rule: opuc.QuadratureRule) -> lp.PeriodicSquareLP:
    """|B_{N+1}(e(x))|^2 up to a positive constant: prod_j sin^2(pi (x - node_j))."""
    return lp.PeriodicSquareLP(1.0, rule.nodes)


@dataclass
class PoissonReport:
    max_dev_minorant: float
    max_dev_majorant: float
    node_residual: float
    node0_majorant: float
    grid_points: int
    direct_terms: int


def poisson_values(rule: opuc.QuadratureRule, m: ms.Measure, x):
    """sum_n L(F, mu, x + n) and sum_n M(F, mu, x + n) for F = |B_{N+1}(e(.))|^2.

    The terms n = -1, 0 are evaluated one by one.  For n >= 1 the point lies
    right of the abscissa and for n <= -2 left of -1, so those terms are summed
    in closed form under the Laplace integrals (geometric series in e^{-t}).
    """
    F = b_square_lp(rule)
    I = lp.interpolant(F, m)
    u = np.mod(np.asarray(x, dtype=float), 1.0)
    tot = np.asarray(I.L(u)).real + np.asarray(I.L(u - 1.0)).real
    Fu = np.asarray(F(u))
    # n >= 1: sum f(u + n) - F(u) int_0^inf (G - G0) e^{-tu} / (e^t - 1) dt
    tp, wp, Gp = I.tpos, I.wpos, I.Gpos
    with np.errstate(over="ignore"):
        wr = wp * (Gp - I.G0) / np.expm1(tp)
    right = I._laplace(tp, wr, 1.0, u).real
    tail_f = _apply_u(m, lambda lam, uu: np.exp(-lam * (uu + 1.0)) / -np.expm1(-lam), u)
    tot += tail_f - Fu * right
    # n <= -2: F(u) int_{-inf}^0 (G - G0) e^{-t(u-2)} / (1 - e^t) dt
    tn, wn, Gn = I.tneg, I.wneg, I.Gneg
    left = I._laplace(tn, wn * (Gn - I.G0) / -np.expm1(tn), 1.0, u - 2.0).real
    tot += Fu * left
    # sum_n 2 F(x+n) / (F''(0) (x+n)^2) = 2 pi^2 F(x) / (F''(0) sin^2(pi x));
    # the node set contains 0, so F(x) / sin^2(pi x) is the product over the others
    rest = np.ones(u.shape)
    for xi in rule.nodes[1:]:
        rest = rest * np.sin(np.pi * (u - xi)) ** 2
    extra = np.pi ** 2 * F.scale * rest / F.lead
    return tot, tot + extra


def poisson_crosscheck(theta: opuc.CircleMeasure, m: ms.Measure, N: int, kind: str = "truncated",
                       grid: int = 10_000, pair: PeriodicExtremalPair | None = None) -> PoissonReport:
    if pair is None:
        pair = periodic_extremal(theta, m, N, kind)
    x = np.arange(grid) / grid
    Lsum, Msum = poisson_values(pair.rule, m, x)
    if kind == "odd":
        Lneg, Mneg = poisson_values(pair.rule, m, -x)
        Lsum, Msum = Lsum - Mneg, Msum - Lneg
    dl = float(np.max(np.abs(Lsum - pair.minorant(x))))
    dm = float(np.max(np.abs(Msum - pair.majorant(x))))
    nz = pair.rule.nodes[1:]
    Ln, _ = poisson_values(pair.rule, m, nz)
    node_res = float(np.max(np.abs(Ln - pair.target(nz)), initial=0.0)) if kind == "truncated" else 0.0
    _, M0 = poisson_values(pair.rule, m, np.array([0.0]))
    return PoissonReport(dl, dm, node_res, float(M0[0]), len(x), 2)
