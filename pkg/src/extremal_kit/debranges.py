"""Hermite-Biehler families, reproducing kernels and the extremal entire pairs.

Two families are built: the Paley-Wiener space of type tau (E = e^{-i tau z})
and the homogeneous spaces E_nu = A_nu - i B_nu assembled from Bessel
functions.  For either space the extremal minorant and majorant of the
truncated function f_mu are the interpolants L and M attached to F = B^2; the
odd problem combines them with their reflections.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from numpy.typing import NDArray
from scipy import special as sps

from . import lp
from . import measure as ms
from . import numerics as nm


class SpaceError(ValueError):
    """Invalid space parameters or evaluation at a zero of E."""


class SupportError(ms.HypothesisError):
    """The measure starts further left than the exponential type allows."""


class L1Error(ArithmeticError):
    """f_mu is not integrable against the space weight."""


class DeBrangesSpace:
    """Space given by companions A, B with E = A - iB."""

    tau: float
    b_not_in_space: bool = True

    def A(self, z):
        raise NotImplementedError

    def B(self, z):
        raise NotImplementedError

    def dA(self, z):
        raise NotImplementedError

    def dB(self, z):
        raise NotImplementedError

    def E(self, z):
        return self.A(z) - 1j * self.B(z)

    def E_star(self, z):
        zc = np.conj(np.asarray(z))
        return np.conj(self.E(zc))

    def B_zeros(self, count: int) -> NDArray:
        """First ``count`` positive zeros of B."""
        raise NotImplementedError

    @property
    def dB0(self) -> float:
        raise NotImplementedError

    def kernel(self, w, z):
        """Reproducing kernel K(w, z)."""
        w = np.asarray(w, dtype=complex)
        z = np.asarray(z, dtype=complex)
        w, z = np.broadcast_arrays(w, z)
        wb = np.conj(w)
        d = z - wb
        near = np.abs(d) < 1e-7 * (1.0 + np.abs(z))
        out = np.empty(z.shape, dtype=complex)
        if np.any(~near):
            zz, ww, dd = z[~near], wb[~near], d[~near]
            out[~near] = (self.B(zz) * self.A(ww) - self.A(zz) * self.B(ww)) / (np.pi * dd)
        if np.any(near):
            u = 0.5 * (z[near] + wb[near])
            out[near] = (self.dB(u) * self.A(u) - self.dA(u) * self.B(u)) / np.pi
        return out if out.ndim else out[()]

    def kernel_diag(self, x):
        """K(x, x) for real x through the derivative form."""
        x = np.asarray(x, dtype=float)
        return ((self.dB(x) * self.A(x) - self.dA(x) * self.B(x)) / np.pi).real

    @property
    def K00(self) -> float:
        return float(self.dB0 * float(np.real(self.A(0.0))) / np.pi)

    def weight(self, x):
        x = np.asarray(x, dtype=float)
        e2 = np.abs(self.E(x)) ** 2
        if np.any(e2 == 0):
            raise SpaceError("E vanishes at a requested point")
        return 1.0 / e2

    @cached_property
    def F(self) -> lp.LPFunction:
        """The Laguerre-Polya function B^2."""
        raise NotImplementedError


class PaleyWiener(DeBrangesSpace):
    """E(z) = exp(-i tau z): A = cos(tau z), B = sin(tau z)."""

    def __init__(self, tau: float = 1.0):
        if not tau > 0:
            raise SpaceError("tau must be positive")
        self.tau = float(tau)

    def __repr__(self):
        return f"PaleyWiener(tau={self.tau!r})"

    def __eq__(self, other):
        return isinstance(other, PaleyWiener) and other.tau == self.tau

    def __hash__(self):
        return hash(("pw", self.tau))

    def A(self, z):
        return np.cos(self.tau * np.asarray(z))

    def B(self, z):
        return np.sin(self.tau * np.asarray(z))

    def dA(self, z):
        return -self.tau * np.sin(self.tau * np.asarray(z))

    def dB(self, z):
        return self.tau * np.cos(self.tau * np.asarray(z))

    def weight(self, x):
        return np.ones_like(np.asarray(x, dtype=float))

    def B_zeros(self, count):
        return np.pi / self.tau * np.arange(1, count + 1)

    def kernel_diag(self, x):
        return np.full(np.shape(x), self.tau / np.pi)

    @property
    def dB0(self):
        return self.tau

    @cached_property
    def F(self):
        return lp.PeriodicSquareLP(np.pi / self.tau, [0.0])


class Homogeneous(DeBrangesSpace):
    """E_nu = A_nu - i B_nu with A_nu, B_nu normalised Bessel functions of orders nu, nu + 1."""

    SERIES_RADIUS = 6.0

    def __init__(self, nu: float):
        if not nu > -1:
            raise SpaceError("nu must exceed -1")
        self.nu = float(nu)
        self.tau = 1.0
        self._g = math.gamma(self.nu + 1.0)

    def __repr__(self):
        return f"Homogeneous(nu={self.nu!r})"

    def __eq__(self, other):
        return isinstance(other, Homogeneous) and other.nu == self.nu

    def __hash__(self):
        return hash(("homog", self.nu))

    # -- companions
    def _series(self, z, odd: bool):
        z = np.asarray(z, dtype=complex)
        q = -(0.5 * z) ** 2
        term = (0.5 * z) / (self.nu + 1.0) if odd else np.ones_like(z)
        acc = term.copy()
        for n in range(1, 60):
            term = term * q / (n * (self.nu + n + (1.0 if odd else 0.0)))
            acc = acc + term
        return acc

    def _bessel(self, z, order_shift: int):
        """Gamma(nu+1) (z/2)^{-nu} J_{nu+k}(z) for Re z >= 0."""
        z = np.asarray(z, dtype=complex)
        return self._g * (0.5 * z) ** (-self.nu) * sps.jv(self.nu + order_shift, z)

    def _eval(self, z, odd: bool):
        z0 = np.asarray(z)
        z = np.atleast_1d(z0).astype(complex)
        out = np.empty(z.shape, dtype=complex)
        small = np.abs(z) <= self.SERIES_RADIUS
        out[small] = self._series(z[small], odd)
        big = ~small
        if np.any(big):
            zb = z[big]
            flip = zb.real < 0
            zr = np.where(flip, -zb, zb)
            val = self._bessel(zr, 1 if odd else 0)
            out[big] = np.where(flip, -val, val) if odd else val
        if not np.iscomplexobj(z0):
            out = out.real
        return out if z0.ndim else out[0]

    def A(self, z):
        return self._eval(z, odd=False)

    def B(self, z):
        return self._eval(z, odd=True)

    def A_series(self, z):
        return self._series(z, odd=False)

    def B_series(self, z):
        return self._series(z, odd=True)

    def dA(self, z):
        return -self.B(z)

    def dB(self, z):
        z0 = np.asarray(z)
        z = np.atleast_1d(z0)
        out = np.empty(z.shape, dtype=np.result_type(z, float))
        small = np.abs(z) < 1e-3
        if np.any(~small):
            zz = z[~small]
            out[~small] = self.A(zz) - (2 * self.nu + 1) * self.B(zz) / zz
        if np.any(small):
            zz = z[small]
            # B = sum_n (-1)^n (z/2)^{2n+1}/(n!(nu+1)_{n+1}); derivative termwise
            n1 = self.nu + 1.0
            out[small] = 1.0 / (2 * n1) - 3 * zz ** 2 / (8 * n1 * (n1 + 1)) + 5 * zz ** 4 / (96 * n1 * (n1 + 1) * (n1 + 2))
        return out if z0.ndim else out[0]

    @property
    def dB0(self):
        return 1.0 / (2.0 * (self.nu + 1.0))

    def B_zeros(self, count):
        return nm.bessel_zeros(self.nu + 1.0, count)

    def kernel_diag(self, x):
        x = np.asarray(x, dtype=float)
        out = np.empty(x.shape)
        small = np.abs(x) < 1e-3
        out[small] = 1.0 / (2 * np.pi * (self.nu + 1.0))
        xx = x[~small]
        a, b = self.A(xx), self.B(xx)
        out[~small] = (a * a + b * b - (2 * self.nu + 1) * a * b / xx) / np.pi
        return out if out.ndim else out[()]

    def comparison_density(self, x):
        """c_nu |x|^{2 nu + 1}; the weight is comparable to its reciprocal."""
        return self.c_nu * np.abs(np.asarray(x, dtype=float)) ** (2 * self.nu + 1)

    @property
    def c_nu(self) -> float:
        return c_nu(self.nu)

    @cached_property
    def F(self):
        nu = self.nu
        return lp.OddSquareLP(
            B=self.B,
            pos_zeros=self.B_zeros,
            dB=lambda x: self.A(x),
            ratio=lambda x: -(2 * nu + 1) / x,
            dB0=self.dB0,
            type_B=1.0,
            name=f"B_{nu:g}",
        )


def c_nu(nu: float) -> float:
    return math.pi * 2.0 ** (-2 * nu - 1) / math.gamma(nu + 1.0) ** 2


def parse_space(spec: str) -> DeBrangesSpace:
    """``pw:tau=1`` or ``homog:nu=0``."""
    name, _, rest = spec.partition(":")
    args = {}
    for part in filter(None, rest.split(",")):
        k, _, v = part.partition("=")
        try:
            args[k.strip()] = float(v)
        except ValueError:
            raise SpaceError(f"bad parameter {part!r}") from None
    name = name.strip().lower()
    if name in ("pw", "paley-wiener", "paleywiener"):
        return PaleyWiener(args.get("tau", 1.0))
    if name in ("homog", "homogeneous", "bessel"):
        if "nu" not in args:
            raise SpaceError("homogeneous space needs nu")
        return Homogeneous(args["nu"])
    raise SpaceError(f"unknown space {spec!r}")


# ---------------------------------------------------------------------------
# extremal pairs

@dataclass
class ExtremalPair:
    minorant: Callable
    majorant: Callable
    kind: str
    space: DeBrangesSpace
    measure: ms.Measure
    interp: lp.Interpolant = field(repr=False)
    report: ms.HypothesisReport | None = field(default=None, repr=False)

    def target(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "odd":
            return np.asarray(ms.f_mu_tilde(self.measure, x)).real
        return np.asarray(ms.f_mu(self.measure, x)).real

    def gap_identity(self, x):
        """kappa K(0,x)^2 / K(0,0)^2 with kappa = 1 (truncated) or 2 (odd)."""
        kap = 2.0 if self.kind == "odd" else 1.0
        k = np.asarray(self.space.kernel(0.0, np.asarray(x, dtype=float))).real
        return kap * k * k / self.space.K00 ** 2


def _check_support(space: DeBrangesSpace, m: ms.Measure):
    lo = m.support_lower_bound
    if lo < -2.0 * space.tau - 1e-15:
        raise SupportError(f"support starts at {lo:g}, below -2 tau(E) = {-2 * space.tau:g}", ["support"])


def extremal_pair(space: DeBrangesSpace, m: ms.Measure, kind: str = "truncated",
                  minorant_only: bool = False, check: bool = True) -> ExtremalPair:
    """Extremal minorant and majorant of f_mu (truncated) or of its odd version.

    Without (H3) the truncated minorant is still extremal; pass
    ``minorant_only=True`` to accept that case (the majorant is still
    returned but carries no optimality claim).
    """
    if kind not in ("truncated", "odd"):
        raise ValueError("kind is 'truncated' or 'odd'")
    _check_support(space, m)
    rep = None
    if check:
        rep = ms.check_hypotheses(m, e_type_bound=2.0 * space.tau)
        rep.require("H1", "H2")
        if not (kind == "truncated" and minorant_only):
            if rep.h3 == "fails":
                raise ms.HypothesisError(
                    "(H3) fails: the majorant is not extremal; the truncated minorant can be built with minorant_only",
                    ["H3"])
    I = lp.interpolant(space.F, m)
    if kind == "truncated":
        lo, hi = I.L, I.M
    else:
        def lo(z):
            z = np.asarray(z)
            return I.L(z) - I.M(-z)

        def hi(z):
            z = np.asarray(z)
            return I.M(z) - I.L(-z)
    return ExtremalPair(lo, hi, kind, space, m, I, rep)


def optimal_value(space: DeBrangesSpace, kind: str = "truncated") -> float:
    k = 2.0 if kind == "odd" else 1.0
    return k / space.K00


def delta_nu(nu: float, delta: float, m: ms.Measure | None = None, kind: str = "truncated") -> float:
    """Optimal weighted value for the power weight |x|^{2nu+1} and type delta."""
    if not nu > -1 or not delta > 0:
        raise ValueError("need nu > -1 and delta > 0")
    if m is not None and m.support_lower_bound < -delta:
        return math.inf
    val = math.gamma(nu + 1.0) * math.gamma(nu + 2.0) * (4.0 / delta) ** (2 * nu + 2)
    return 2.0 * val if kind == "odd" else val


def delta_nu_reconstructed(nu: float, delta: float, kind: str = "truncated") -> float:
    """The same value through 1/K_nu(0,0), the isometry constant and a dilation to type delta."""
    return (2.0 / delta) ** (2 * nu + 2) * optimal_value(Homogeneous(nu), kind) / c_nu(nu)


# ---------------------------------------------------------------------------
# quadrature sums over the zeros of B

def _decay_exponent(space: DeBrangesSpace, m: ms.Measure) -> float:
    """Log-log slope of |f_mu| times the weight growth over the last decade sampled."""
    x = np.geomspace(1e3, 1e4, 9)
    f = np.abs(np.asarray(ms.f_mu(m, x)).real)
    if np.any(f == 0):
        return -math.inf
    growth = 0.0 if isinstance(space, PaleyWiener) else 2 * space.nu + 1
    return float(np.polyfit(np.log(x), np.log(f), 1)[0]) + growth


def require_l1(space: DeBrangesSpace, m: ms.Measure, odd: bool = False):
    s = _decay_exponent(space, m)
    if s > -1.05:
        raise L1Error(f"f_mu is not integrable against the weight (decay exponent {s:.3g})")
    return s


def _zero_sum(space: DeBrangesSpace, m: ms.Measure, sign: int, count: int = 4000) -> float:
    """Sum over zeros xi = sign * x_k of f_mu(xi)/K(xi, xi) with a tail estimate."""
    xs = sign * space.B_zeros(count)
    vals = np.asarray(ms.f_mu(m, xs)).real / space.kernel_diag(xs)
    if sign < 0:
        return float(vals.sum())  # f_mu vanishes on the negative axis
    partial = float(vals.sum())
    if isinstance(space, PaleyWiener):
        X = (count + 0.5) * np.pi / space.tau
        tail = ms.f_mu_tail_integral(m, X)
    else:
        k = np.arange(1, count + 1)[-count // 10:]
        last = vals[-count // 10:]
        live = last != 0
        if live.sum() < 2:
            # terms underflowed: faster than any power, nothing left to add
            return partial
        sl, ic = np.polyfit(np.log(k[live]), np.log(np.abs(last[live])), 1)
        if sl >= -1.0:
            raise L1Error("quadrature sum diverges")
        K0 = count + 0.5
        tail = float(np.sign(vals[-1]) * math.exp(ic) * K0 ** (sl + 1) / (-(sl + 1)))
    return partial + tail


def minorant_integral(space: DeBrangesSpace, m: ms.Measure) -> float:
    """Weighted integral of the extremal minorant: sum over positive zeros of B of f_mu/K."""
    require_l1(space, m)
    return _zero_sum(space, m, +1)


def majorant_integral(space: DeBrangesSpace, m: ms.Measure) -> float:
    require_l1(space, m)
    return 1.0 / space.K00 + _zero_sum(space, m, +1)


def odd_integrals(space: DeBrangesSpace, m: ms.Measure) -> tuple[float, float]:
    """(minorant, majorant) weighted integrals in the odd problem."""
    require_l1(space, m)
    # the zeros of B and K(x, x) are symmetric while f~ is odd, so the
    # sum over nonzero zeros cancels pairwise
    s = _zero_sum(space, m, +1) + _zero_sum_odd_negative(space, m)
    return -1.0 / space.K00 + s, 1.0 / space.K00 + s


def _zero_sum_odd_negative(space: DeBrangesSpace, m: ms.Measure) -> float:
    # f~(-x) = -f_mu(x) for x > 0
    return -_zero_sum(space, m, +1)


def gap_integral(pair: ExtremalPair, X: float = 1000.0, order: int = 20) -> float:
    """Weighted integral of majorant - minorant over R, numerically.

    The integral over [-X, X] uses a composite Gauss rule; the tail is
    supplied by the kernel identity for the gap.
    """
    sp = pair.space
    br = np.linspace(-X, X, int(2 * X / 2.0) + 1)
    x, w = nm.composite_gauss(br, order)
    gap = (np.asarray(pair.majorant(x)) - np.asarray(pair.minorant(x))).real
    core = float(np.dot(w, gap * sp.weight(x)))
    return core + gap_tail(sp, X, 2.0 if pair.kind == "odd" else 1.0)


def gap_tail(space: DeBrangesSpace, X: float, kappa: float) -> float:
    """Integral over |x| > X of kappa K(0,x)^2/K(0,0)^2 times the weight."""
    if isinstance(space, PaleyWiener):
        t = space.tau
        # integral_X^inf sin^2(t x)/(t x)^2 dx * t^2 ... in closed form
        u = t * X
        si, _ = sps.sici(2 * u)
        one_side = (math.sin(u) ** 2 / u + (math.pi / 2 - si)) / t
        return kappa * 2.0 * one_side
    # composite rule out to 32 X, then B^2/(A^2+B^2) is replaced by its mean 1/2
    x, w = nm.composite_gauss(np.arange(X, 32 * X + 1.0, 2.0), 20)
    a, b = space.A(x), space.B(x)
    core = float(np.dot(w, b * b / (a * a + b * b) / (x * x)))
    far = 0.5 / (32 * X)
    # both half lines contribute alike: the integrand is even
    return 2.0 * kappa * (core + far) / space.dB0 ** 2


def isometry_integrals(space: Homogeneous, X: float = 4000.0) -> tuple[float, float]:
    """Both sides of the norm identity for F = K(0, .): the weighted integral
    against |E|^{-2} and the one against |x|^{2nu+1} (without c_nu).

    K(0, x) = B(x) / (pi x).  The integrands are even; beyond X both behave
    like (amplitude) cos^2(...) / x^2 and the tail takes the mean 1/2.
    """
    if not isinstance(space, Homogeneous):
        raise SpaceError("the norm identity concerns the homogeneous spaces")
    nu = space.nu
    x, w = nm.composite_gauss(np.arange(0.0, X + 1.0, 2.0), 20)
    a, b = space.A(x), space.B(x)
    k2 = (b / (np.pi * x)) ** 2
    lhs = 2.0 * (float(np.dot(w, k2 / (a * a + b * b))) + 0.5 / (np.pi ** 2 * X))
    amp = math.gamma(nu + 1.0) ** 2 * 4.0 ** nu * 2.0 / np.pi
    rhs = 2.0 * (float(np.dot(w, k2 * x ** (2 * nu + 1))) + 0.5 * amp / (np.pi ** 2 * X))
    return lhs, rhs
