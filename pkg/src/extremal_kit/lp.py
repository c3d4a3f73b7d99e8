"""Laguerre-Polya functions, frequency functions and the interpolants A, L, M.

For an LP function F with a zero-free interval around ``c`` the frequency
function

    g_c(t) = (1 / 2 pi i) * integral over Re s = c of e^{ts} / F(s) ds

is computed from residues: for ``t > 0`` the line is closed to the left and
picks up the zeros below ``c``; for ``t < 0`` it is closed to the right with a
sign flip.  A zero ``xi`` of multiplicity m contributes ``e^{t xi} P_xi(t)``
with ``P_xi`` a polynomial of degree m - 1 read off the Laurent expansion.

Three concrete families are provided:

* :class:`HadamardLP` -- finitely many zeros, any multiplicities;
* :class:`PeriodicSquareLP` -- ``C prod_j sin^2(pi (z - zeta_j) / p)``, whose
  residue series over the translates of each zero sums in closed form;
* :class:`OddSquareLP` -- ``B(z)^2`` for an odd real entire B described by its
  positive zeros (used for the Bessel family).

:class:`Interpolant` evaluates A(F, mu, .), L(F, mu, .) and M(F, mu, .).  It
samples ``G = g * d mu`` once on composite Gauss nodes of the two half lines,
after which every Laplace integral in the construction is a dot product.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial
from numpy.typing import NDArray
from scipy import special as sps

from . import measure as ms
from . import numerics as nm


class LPError(ValueError):
    """Invalid LP data or a violated precondition of the construction."""


RES_REL = 1e-12
RES_CAP = 500


@dataclass
class FreqFunction:
    """Frequency function g_c with vectorised value and derivative."""

    c: float
    value: Callable[[NDArray], NDArray]
    deriv: Callable[[NDArray], NDArray]
    trunc_terms: int | None = None
    atom: tuple[float, float] | None = None  # (location, mass) when g is a point mass
    smooth: bool = True

    def __call__(self, t):
        return self.value(t)


def _exprel(x):
    return sps.exprel(x)


def _exprel_deriv(x):
    """d/dx (e^x - 1) / x = integral_0^1 s e^{xs} ds."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < 0.5
    xs = x[small]
    term = np.full_like(xs, 0.5)
    acc = term.copy()
    fact = 1.0
    for k in range(1, 25):
        fact *= k
        acc = acc + xs ** k / (fact * (k + 2))
    out[small] = acc
    xb = x[~small]
    with np.errstate(over="ignore", invalid="ignore"):
        out[~small] = (np.exp(xb) * (xb - 1.0) + 1.0) / (xb * xb)
    return out


class LPFunction:
    """Abstract Laguerre-Polya function with real zeros and no Gaussian factor."""

    r: int = 0          # order of the zero at the origin
    b: float = 0.0      # linear exponent of the Hadamard form
    lead: float = 1.0   # F^{(r)}(0) / r!
    a: float = 0.0      # Gaussian coefficient, always 0 here

    # -- to be provided by subclasses
    def __call__(self, z):
        raise NotImplementedError

    @property
    def n_zeros(self) -> float:
        raise NotImplementedError

    def zeros(self, count: int) -> tuple[NDArray, NDArray]:
        """First ``count`` distinct zeros (origin included) sorted by modulus, with multiplicities."""
        raise NotImplementedError

    @property
    def alpha(self) -> float:
        raise NotImplementedError

    def residue_poly(self, xi: NDArray) -> NDArray:
        """Coefficients (ascending in t) of P_xi with Res e^{ts}/F(s) = e^{t xi} P_xi(t)."""
        raise NotImplementedError

    @property
    def shift(self) -> float:
        """Exponent b' such that e^{ts}/F(s) = e^{(t-b')s}/R(s) with R decaying on arcs."""
        return 0.0

    @property
    def g_strip(self) -> float:
        """Half width of the strip where the frequency function is analytic (inf if not smooth)."""
        return 2.0

    @property
    def smooth_g(self) -> bool:
        return True

    # -- generic helpers
    def taylor0(self, n: int = 6) -> NDArray:
        """Taylor coefficients at the origin by a Cauchy integral on a small circle."""
        al = self.alpha
        rad = 0.25 * min(1.0, al if np.isfinite(al) else 1.0)
        k = 64
        w = rad * np.exp(2j * np.pi * np.arange(k) / k)
        vals = np.asarray(self(w), dtype=complex)
        coef = np.fft.fft(vals) / k / rad ** np.arange(k)
        return coef[:n].real

    def second_derivative_at_zero(self) -> float:
        if self.r != 2:
            raise LPError("F must have a double zero at the origin")
        return 2.0 * self.lead

    def over_z(self, z):
        """F(z) / z with the removable singularity handled by a local series."""
        return self._over_power(z, 1)

    def over_z2(self, z):
        return self._over_power(z, 2)

    def _over_power(self, z, k):
        z = np.asarray(z)
        out = np.empty(z.shape, dtype=complex)
        small = np.abs(z) < 1e-3
        if np.any(~small):
            zz = z[~small]
            out[~small] = np.asarray(self(zz), dtype=complex) / zz ** k
        if np.any(small):
            c = self.taylor0(k + 4)
            if k <= self.r:
                c[:self.r] = 0.0
            if self.r == 2:
                c[2] = self.lead
            zz = z[small].astype(complex)
            out[small] = sum(c[k + j] * zz ** j for j in range(4))
        if not np.iscomplexobj(z):
            out = out.real
        return out if out.ndim else out[()]

    def freq(self, c: float) -> FreqFunction:
        return residue_freq(self, c)

    def default_abscissa(self) -> float:
        al = self.alpha
        return 0.5 * al if np.isfinite(al) else 1.0


# ---------------------------------------------------------------------------
# finite zero sets

def _series_reciprocal(p: NDArray, n: int) -> NDArray:
    q = np.zeros(n)
    q[0] = 1.0 / p[0]
    for k in range(1, n):
        s = sum(p[i] * q[k - i] for i in range(1, min(k, len(p) - 1) + 1))
        q[k] = -s / p[0]
    return q


class HadamardLP(LPFunction):
    """F(z) = lead z^r e^{bz} prod_j (1 - z/x_j)^{m_j} e^{m_j z / x_j} with finitely many zeros."""

    def __init__(self, r: int = 0, b: float = 0.0, lead: float = 1.0, zeros=(), mult=None):
        x = np.asarray(zeros, dtype=float)
        m = np.ones(len(x), dtype=int) if mult is None else np.asarray(mult, dtype=int)
        if np.any(x == 0):
            raise LPError("nonzero zeros only; use r for the origin")
        if lead == 0 or r < 0 or np.any(m < 1) or len(m) != len(x):
            raise LPError("bad Hadamard data")
        order = np.argsort(np.abs(x), kind="stable")
        self.r, self.b, self.lead = int(r), float(b), float(lead)
        self.xs, self.ms = x[order], m[order]
        self._K = self.lead * float(np.prod((-1.0 / self.xs) ** self.ms)) if len(x) else self.lead
        self._beff = self.b + float(np.sum(self.ms / self.xs)) if len(x) else self.b

    def __repr__(self):
        return f"HadamardLP(r={self.r}, b={self.b}, lead={self.lead}, zeros={self.xs.tolist()}, mult={self.ms.tolist()})"

    def __call__(self, z):
        z = np.asarray(z)
        out = self.lead * z ** self.r * np.exp(self.b * z)
        for x, m in zip(self.xs, self.ms):
            out = out * ((1.0 - z / x) * np.exp(z / x)) ** m
        return out

    @property
    def n_zeros(self):
        return self.r + int(np.sum(self.ms))

    @property
    def alpha(self):
        pos = self.xs[self.xs > 0]
        return float(pos.min()) if len(pos) else math.inf

    @property
    def shift(self):
        return self._beff

    @property
    def smooth_g(self):
        return False

    @property
    def g_strip(self):
        return math.inf

    def taylor0(self, n=6):
        p = Polynomial([0.0] * self.r + [1.0])
        for x, m in zip(self.xs, self.ms):
            p = p * Polynomial([1.0, -1.0 / x]) ** int(m)
        # e^{b z} and the exponential factors combine into e^{b' z}
        e = np.array([self._beff ** k / math.factorial(k) for k in range(n)])
        c = np.convolve(p.coef, e)[:n] * self.lead
        return np.pad(c, (0, max(0, n - len(c))))

    def second_derivative_at_zero(self):
        if self.r != 2:
            raise LPError("F must have a double zero at the origin")
        return 2.0 * self.lead

    def _all_zeros(self):
        xs = list(self.xs)
        ms = list(self.ms)
        if self.r:
            xs = [0.0] + xs
            ms = [self.r] + ms
        return np.asarray(xs, dtype=float), np.asarray(ms, dtype=int)

    def zeros(self, count):
        xs, ms = self._all_zeros()
        return xs[:count], ms[:count]

    def residue_poly(self, xi):
        xs, ms = self._all_zeros()
        mmax = int(ms.max()) if len(ms) else 1
        out = np.zeros((len(np.atleast_1d(xi)), mmax))
        for row, x0 in enumerate(np.atleast_1d(xi)):
            idx = int(np.argmin(np.abs(xs - x0)))
            m = int(ms[idx])
            H = Polynomial([self._K])
            for j, (x, mm) in enumerate(zip(xs, ms)):
                if j != idx:
                    H = H * Polynomial([-x, 1.0]) ** int(mm)
            p = np.array([H.deriv(k)(x0) / math.factorial(k) if k else H(x0) for k in range(m)])
            q = _series_reciprocal(p, m)
            # residue of e^{t' s}/((s-x0)^m H(s)) with t' = t - b': e^{t' x0} sum_j t'^j/j! q_{m-1-j}
            coeffs = np.array([q[m - 1 - j] / math.factorial(j) for j in range(m)])
            out[row, :m] = coeffs
        return out


# ---------------------------------------------------------------------------
# periodic families of double zeros

class PeriodicSquareLP(LPFunction):
    """F(z) = scale * prod_j sin^2(pi (z - zeta_j) / period).

    Double zeros at ``zeta_j + n * period``.  With one base zero at 0 and
    period pi / tau this is sin^2(tau z); the periodic construction uses it
    with period 1 and the quadrature nodes as base zeros.
    """

    def __init__(self, period: float, base, scale: float = 1.0):
        base = np.sort(np.mod(np.asarray(base, dtype=float), period))
        if len(base) == 0 or scale <= 0 or period <= 0:
            raise LPError("bad periodic data")
        if np.any(np.diff(base) <= 1e-14 * period):
            raise LPError("base zeros must be distinct")
        self.period, self.base, self.scale = float(period), base, float(scale)
        k = np.pi / period
        n = len(base)
        diff = base[:, None] - base[None, :]
        s = np.sin(k * diff)
        np.fill_diagonal(s, 1.0)
        R = np.prod(s, axis=1)
        with np.errstate(divide="ignore"):
            cot = np.cos(k * diff) / np.where(np.eye(n, dtype=bool), 1.0, s)
        np.fill_diagonal(cot, 0.0)
        dP = k * R                           # P'(zeta_i)
        ratio = 2.0 * k * cot.sum(axis=1)    # P''(zeta_i) / P'(zeta_i)
        self._a = 1.0 / (scale * dP ** 2)
        self._b = -ratio * self._a
        self._dP = dP
        self.r = 2 if abs(base[0]) < 1e-15 * period else 0
        self.b = 0.0
        if self.r == 2:
            self.lead = scale * dP[0] ** 2   # F''(0) / 2
        else:
            self.lead = float(self(0.0))

    def __repr__(self):
        return f"PeriodicSquareLP(period={self.period!r}, base={self.base.tolist()!r}, scale={self.scale!r})"

    def __call__(self, z):
        z = np.asarray(z)
        k = np.pi / self.period
        out = self.scale * np.ones(z.shape, dtype=np.result_type(z, float))
        for zeta in self.base:
            out = out * np.sin(k * (z - zeta)) ** 2
        return out

    @property
    def n_zeros(self):
        return math.inf

    @property
    def alpha(self):
        pos = self.base[self.base > 1e-15 * self.period]
        return float(pos.min()) if len(pos) else self.period

    @property
    def g_strip(self):
        return 2.0 * np.pi / self.period

    def zeros(self, count):
        reps = count // len(self.base) + 2
        n = np.arange(-reps, reps + 1)
        allz = (self.base[None, :] + self.period * n[:, None]).ravel()
        allz = allz[np.argsort(np.abs(allz), kind="stable")]
        return allz[:count], np.full(count, 2)

    def _index(self, xi):
        u = np.mod(np.asarray(xi, dtype=float), self.period)
        d = np.abs(u[:, None] - self.base[None, :])
        d = np.minimum(d, self.period - d)
        return np.argmin(d, axis=1)

    def residue_poly(self, xi):
        idx = self._index(np.atleast_1d(xi))
        return np.stack([self._b[idx], self._a[idx]], axis=1)

    def taylor0(self, n=6):
        c = super().taylor0(n)
        if self.r == 2:
            c[:2] = 0.0
            c[2] = self.lead
        return c

    def second_derivative_at_zero(self):
        if self.r != 2:
            raise LPError("F must have a double zero at the origin")
        return 2.0 * self.lead

    def _theta(self, c):
        # largest translate of each base zero below c
        n = np.ceil((c - self.base) / self.period) - 1.0
        eta = self.base + n * self.period
        if np.any(np.abs(eta - c) < 1e-14 * self.period) or np.any(np.abs(eta + self.period - c) < 1e-14 * self.period):
            raise LPError("abscissa lies on a zero of F")
        return eta

    def freq(self, c: float) -> FreqFunction:
        eta = self._theta(c)
        a, b, p = self._a, self._b, self.period

        def parts(t):
            t = np.asarray(t, dtype=float)
            th = np.where(t[..., None] >= 0, eta, eta + p)
            ex = np.exp(t[..., None] * th)
            num = (a * ex).sum(-1) + (b * th * _exprel(t[..., None] * th)).sum(-1)
            dnum = (a * th * ex).sum(-1) + (b * th * th * _exprel_deriv(t[..., None] * th)).sum(-1)
            den = p * _exprel(-np.abs(t) * p)
            dden = -p * p * np.sign(t) * _exprel_deriv(-np.abs(t) * p)
            far = t * th.min(-1) < -1.0
            if np.any(far):
                # the residues b_i sum to zero over a period; dropping the
                # constant -sum(b)/t keeps the decaying left tail accurate
                tf, ef, thf = t[far][..., None], ex[far], th[far]
                num[far] = ((a + b / tf) * ef).sum(-1)
                dnum[far] = ((a * thf + b * thf / tf - b / tf ** 2) * ef).sum(-1)
            return num, dnum, den, dden

        def value(t):
            num, _, den, _ = parts(t)
            return num / den

        def deriv(t):
            num, dnum, den, dden = parts(t)
            return (dnum * den - num * dden) / (den * den)

        return FreqFunction(float(c), value, deriv, None)


# ---------------------------------------------------------------------------
# squares of odd entire functions given by their zeros

class OddSquareLP(LPFunction):
    """F = B^2 for a real odd entire B with simple real zeros 0, +-x_1, +-x_2, ...

    ``B`` evaluates the function, ``pos_zeros(k)`` returns its first k positive
    zeros, ``dB(x)`` and ``ratio(x) = B''(x)/B'(x)`` are evaluated at zeros,
    ``dB0 = B'(0)``.  Near t = 0, where the residue series converges slowly,
    the frequency function is taken from quadrature along the abscissa line.
    """

    def __init__(self, B, pos_zeros, dB, ratio, dB0: float, type_B: float = 1.0, name: str = "B"):
        self._B, self._zeros_fn, self._dB, self._ratio = B, pos_zeros, dB, ratio
        self.dB0 = float(dB0)
        self.type_B = float(type_B)
        self.name = name
        self.r = 2
        self.b = 0.0
        self.lead = self.dB0 ** 2

    def __repr__(self):
        return f"OddSquareLP({self.name})"

    def __call__(self, z):
        return np.asarray(self._B(z)) ** 2

    @property
    def n_zeros(self):
        return math.inf

    @property
    def alpha(self):
        return float(self._zeros_fn(1)[0])

    @property
    def g_strip(self):
        return 2.0 * self.type_B

    def zeros(self, count):
        k = count // 2 + 1
        pz = self._zeros_fn(k)
        allz = np.concatenate([[0.0], np.ravel(np.column_stack([pz, -pz]))])
        return allz[:count], np.full(count, 2)

    def residue_poly(self, xi):
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        out = np.zeros((len(xi), 2))
        zero = xi == 0
        out[zero, 1] = 1.0 / self.dB0 ** 2
        nz = ~zero
        d = self._dB(np.abs(xi[nz]))
        rt = np.sign(xi[nz]) * self._ratio(np.abs(xi[nz]))
        out[nz, 1] = 1.0 / d ** 2
        out[nz, 0] = -rt / d ** 2
        return out

    def taylor0(self, n=6):
        c = super().taylor0(n)
        c[:2] = 0.0
        c[2] = self.lead
        return c

    def second_derivative_at_zero(self):
        return 2.0 * self.lead

    def freq(self, c: float) -> FreqFunction:
        if not 0 < c < self.alpha:
            return residue_freq(self, c)
        t_sw = 1.0
        ncheb = 8
        deg = 32
        # quadrature along Re s = c for |t| < t_sw, frozen into Chebyshev pieces
        ymax = 30.0 / self.type_B
        yn, yw = nm.composite_gauss(np.linspace(-ymax, ymax, 121), 20)
        s = c + 1j * yn
        inv = yw / np.asarray(self(s), dtype=complex) / (2 * np.pi)
        edges = np.linspace(-t_sw, t_sw, ncheb + 1)
        cheb, dcheb = [], []
        xk = np.cos(np.pi * (np.arange(deg) + 0.5) / deg)
        for lo, hi in zip(edges[:-1], edges[1:]):
            tk = 0.5 * (lo + hi) + 0.5 * (hi - lo) * xk
            vals = (np.exp(np.outer(tk, s)) @ inv).real
            ch = np.polynomial.chebyshev.Chebyshev.fit(tk, vals, deg - 1, domain=[lo, hi])
            cheb.append(ch)
            dcheb.append(ch.deriv())
        zpos = self._zeros_fn(60)
        zlist = np.concatenate([[0.0], -zpos])   # zeros below c
        zabove = zpos                              # zeros above c
        pl = self.residue_poly(zlist)
        pa = self.residue_poly(zabove)

        def resid(t, d=False):
            t = np.asarray(t, dtype=float)
            out = np.zeros_like(t)
            pos = t >= 0
            for mask, zz, pp, sgn in ((pos, zlist, pl, 1.0), (~pos, zabove, pa, -1.0)):
                if np.any(mask):
                    tt = t[mask][:, None]
                    ex = np.exp(tt * zz)
                    if d:
                        val = ex * (zz * (pp[:, 0] + pp[:, 1] * tt) + pp[:, 1])
                    else:
                        val = ex * (pp[:, 0] + pp[:, 1] * tt)
                    out[mask] = sgn * val.sum(-1)
            return out

        def evaluate(t, d=False):
            t = np.asarray(t, dtype=float)
            out = resid(t, d)
            inner = np.abs(t) < t_sw
            if np.any(inner):
                ti = t[inner]
                k = np.clip(((ti + t_sw) / (2 * t_sw) * ncheb).astype(int), 0, ncheb - 1)
                vals = np.empty_like(ti)
                for j in range(ncheb):
                    sel = k == j
                    if np.any(sel):
                        vals[sel] = (dcheb if d else cheb)[j](ti[sel])
                out[inner] = vals
            return out

        return FreqFunction(float(c), lambda t: evaluate(t), lambda t: evaluate(t, True), 60)


# ---------------------------------------------------------------------------
# frequency functions

def _zeros_relative_to(F: LPFunction, c: float, below: bool, count: int):
    zs, _ = F.zeros(count)
    sel = zs < c if below else zs > c
    z = zs[sel]
    return z[np.argsort(np.abs(z - c), kind="stable")]


def residue_series(F: LPFunction, c: float, t: float, rel: float = RES_REL, cap: int = RES_CAP) -> tuple[float, int]:
    """Term-by-term residue sum for g_c(t) with the stopping rule of the module.

    Terms are added by increasing distance from the abscissa; the sum stops
    once a term falls below ``rel`` times the partial sum.
    """
    tp = float(t) - F.shift
    below = tp >= 0
    if math.isinf(F.n_zeros):
        pool = _zeros_relative_to(F, c, below, 4 * cap + 8)
    else:
        pool = _zeros_relative_to(F, c, below, int(F.n_zeros) + 1)
    total, used = 0.0, 0
    sgn = 1.0 if below else -1.0
    polys = F.residue_poly(pool) if len(pool) else np.zeros((0, 1))
    for z, pc in zip(pool, polys):
        term = sgn * math.exp(tp * z) * float(np.polynomial.polynomial.polyval(tp, pc))
        total += term
        used += 1
        if math.isinf(F.n_zeros) and abs(term) < rel * abs(total) and used > 1:
            return total, used
        if used >= cap:
            break
    if math.isinf(F.n_zeros):
        raise nm.NonConvergenceError(f"residue series needs more than {cap} terms at t={t}", total)
    return total, used


def residue_freq(F: LPFunction, c: float) -> FreqFunction:
    """Frequency function by straightforward residue sums (vectorised)."""
    if math.isinf(F.n_zeros):
        zs, _ = F.zeros(4 * RES_CAP)
    else:
        zs, _ = F.zeros(int(F.n_zeros) + 1)
    if np.any(np.abs(zs - c) < 1e-15 * max(1.0, abs(c))):
        raise LPError("abscissa lies on a zero of F")
    lo_z, hi_z = zs[zs < c], zs[zs > c]
    pl, ph = F.residue_poly(lo_z) if len(lo_z) else None, F.residue_poly(hi_z) if len(hi_z) else None
    b = F.shift

    def evaluate(t, d=False):
        t = np.asarray(t, dtype=float) - b
        out = np.zeros_like(t)
        pos = t >= 0
        for mask, zz, pp, sgn in ((pos, lo_z, pl, 1.0), (~pos, hi_z, ph, -1.0)):
            if pp is None or not np.any(mask):
                continue
            tt = t[mask][:, None]
            ex = np.exp(tt * zz)
            poly = sum(pp[:, j] * tt ** j for j in range(pp.shape[1]))
            if d:
                dpoly = sum(j * pp[:, j] * tt ** (j - 1) for j in range(1, pp.shape[1]))
                val = ex * (zz * poly + (dpoly if pp.shape[1] > 1 else 0.0))
            else:
                val = ex * poly
            out[mask] = sgn * val.sum(-1)
        return out

    return FreqFunction(float(c), lambda t: evaluate(t), lambda t: evaluate(t, True), len(zs),
                        smooth=F.smooth_g)


def g_closed_form(F: HadamardLP, c: float, t):
    """Closed forms for at most two zeros (a double zero at the origin in the latter case).

    Discontinuities take the right limit.  For no zeros the frequency
    function is a point mass; the regular part (zero) is returned.
    """
    t = np.asarray(t, dtype=float)
    N = F.n_zeros
    b = F.b
    if N == 0:
        return np.zeros_like(t)
    if N == 1:
        if F.r == 1:
            d = F.lead
            return np.where(t >= b, 1.0 / d, 0.0) if c > 0 else np.where(t < b, -1.0 / d, 0.0)
        tau = float(F.xs[0])
        F0 = F.lead
        val = tau / F0 * np.exp(tau * (t - b) - 1.0)
        cut = b + 1.0 / tau
        return np.where(t >= cut, -val, 0.0) if c > tau else np.where(t < cut, val, 0.0)
    if N == 2 and F.r == 2:
        d2 = 2.0 * F.lead
        return np.where(t >= b, 2.0 / d2 * (t - b), 0.0) if c > 0 else np.where(t < b, -2.0 / d2 * (t - b), 0.0)
    raise LPError("closed forms cover at most one zero or a double zero at the origin")


def g_c(F: LPFunction, c: float, t, method: str = "auto"):
    """Frequency function g_c(t).

    ``method="series"`` forces the term-by-term residue sum with the module's
    truncation rule; ``"auto"`` uses the family's summed form when it has one.
    """
    if F(np.asarray(c)) == 0:
        raise LPError("abscissa lies on a zero of F")
    if isinstance(F, HadamardLP) and F.n_zeros <= 1:
        return g_closed_form(F, c, t)
    if method == "series":
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        vals = np.array([residue_series(F, c, ti)[0] for ti in ts])
        return vals if np.ndim(t) else float(vals[0])
    fr = F.freq(c)
    out = fr.value(np.atleast_1d(np.asarray(t, dtype=float)))
    return out if np.ndim(t) else float(out[0])


def g_contour(F: LPFunction, c: float, t, ymax: float = 1e3, panels: int = 10**6):
    """Quadrature of the defining line integral (trapezoid on |Im s| <= ymax)."""
    y = np.linspace(-ymax, ymax, panels + 1)
    s = c + 1j * y
    w = np.full(y.shape, y[1] - y[0])
    w[0] = w[-1] = 0.5 * w[0]
    with np.errstate(over="ignore", invalid="ignore"):
        Fs = np.asarray(F(s), dtype=complex)
    # where F overflows the integrand is negligible
    ok = np.isfinite(Fs)
    inv = np.zeros_like(Fs)
    with np.errstate(over="ignore"):
        inv[ok] = w[ok] / Fs[ok]
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.array([float((np.exp(ti * s) * inv).sum().real) for ti in ts]) / (2 * np.pi)
    return out if np.ndim(t) else float(out[0])


# ---------------------------------------------------------------------------
# convolution with the measure and the interpolants

def _default_freq(F: LPFunction) -> FreqFunction:
    c = F.default_abscissa()
    if F(np.asarray(c)).real <= 0:
        raise LPError(f"F must be positive at the abscissa {c:g}")
    return F.freq(c)


def g_conv_dmu(F: LPFunction, m: ms.Measure, t: float, route: str = "dmu") -> float:
    """(g * d mu)(t) with g = g_{alpha_F / 2} (g_1 when F has no positive zero).

    ``route="dmu"`` integrates g against the measure; ``route="mu"`` integrates
    g' against the distribution function.
    """
    fr = _default_freq(F)
    t = float(t)
    if route == "dmu":
        total = sum(mass * float(fr.value(np.array([t - loc]))[0]) for loc, mass in m.atoms)
        for d in m.densities:
            pts = [t - F.shift] + d.breaks()
            f = lambda lam, d=d: float(fr.value(np.array([t - lam]))[0] * d.pdf(lam))
            upper = d.b if np.isfinite(d.b) else np.inf
            total += nm.integrate(f, d.a, upper, points=pts)
        return total
    if route == "mu":
        lo = m.support_lower_bound
        pts = [t - F.shift] + m.breaks()
        f = lambda lam: float(fr.deriv(np.array([t - lam]))[0] * ms.distribution(m, lam))
        return nm.integrate(f, lo, np.inf, points=pts)
    raise ValueError("route is 'dmu' or 'mu'")


class Interpolant:
    """A(F, mu, .), L(F, mu, .) and M(F, mu, .) for one LP function and one measure."""

    def __init__(self, F: LPFunction, m: ms.Measure, order: int = 20):
        self.F, self.m = F, m
        al = F.alpha
        self.alpha = al
        self.c = F.default_abscissa()
        if F(np.asarray(self.c)).real <= 0:
            raise LPError(f"F must be positive at the abscissa {self.c:g}")
        self.g = F.freq(self.c)
        self.order = order
        self._build_nodes()
        self.G0 = float(self.G(np.array([0.0]))[0])
        self.Gpos = self.G(self.tpos)
        self.Gneg = self.G(self.tneg)

    # -- convolution
    def G(self, t) -> NDArray:
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for loc, mass in self.m.atoms:
            out += mass * self.g.value(t - loc)
        for d in self.m.densities:
            if self.g.smooth:
                upper = None
                if not d.decays:
                    upper = float(np.max(t, initial=0.0)) + 80.0 / min(self.c, 1.0)
                lam, w = d.nodes(self.order, upper=upper, width=self._width)
                for i0 in range(0, len(t), 2048):
                    tt = t[i0:i0 + 2048]
                    out[i0:i0 + 2048] += self.g.value(tt[:, None] - lam[None, :]) @ w
            else:
                for i, ti in enumerate(t):
                    out[i] += self._density_quad(d, ti)
        return out

    def _density_quad(self, d: ms.Density, t: float) -> float:
        pts = [t - self.F.shift] + d.breaks()
        f = lambda lam: float(self.g.value(np.array([t - lam]))[0] * d.pdf(lam))
        upper = d.b if np.isfinite(d.b) else np.inf
        return nm.integrate(f, d.a, upper, points=pts)

    def _build_nodes(self):
        F, m = self.F, self.m
        w = min(4.0, F.g_strip) if np.isfinite(F.g_strip) else 2.0
        self._width = w
        lo = m.support_lower_bound
        kinks = []
        if not F.smooth_g:
            kinks = [F.shift + loc for loc, _ in m.atoms] + [F.shift + p for p in m.breaks()]
        # positive side: integrand decays like e^{-c t} at worst
        tpos = 50.0 / self.c + max(0.0, -lo) + 2.0 * w
        if np.isfinite(self.alpha):
            tneg = 200.0 / self.alpha + max(0.0, (max(m.breaks()) if m.breaks() else 0.0))
        else:
            tneg = max(0.0, -(lo + F.shift)) + 1.0
        self._kinks = kinks
        self._ext_cache = {}
        self.tpos, self.wpos = self._half_line(tpos, w, [k for k in kinks if k > 0])
        tn, wn = self._half_line(tneg, w, [-k for k in kinks if k < 0])
        self.tneg, self.wneg = -tn, wn
        self._ends = {1: self._end_of(tpos, w), -1: self._end_of(tneg, w)}

    @staticmethod
    def _end_of(T, w):
        return w * (max(1, int(math.ceil((T - w) / w))) + 1)

    def _half_line(self, T, w, kinks):
        n = max(1, int(math.ceil((T - w) / w)))
        uni = np.linspace(w, w * (n + 1), n + 1)
        geo = nm.geometric_breaks(0.0, w, floor=1e-9)
        br = np.unique(np.concatenate([geo, uni, np.asarray(kinks, dtype=float)]))
        br = br[br >= 0]
        # fine pieces near the origin get a shorter rule
        x_hi, w_hi = nm.composite_gauss(br[br >= w - 1e-15] if np.sum(br >= w) > 1 else [w, 2 * w], self.order)
        small = br[br <= w + 1e-15]
        x_lo, w_lo = nm.composite_gauss(small, 12)
        return np.concatenate([x_lo, x_hi]), np.concatenate([w_lo, w_hi])

    # -- Laplace integrals
    @staticmethod
    def _laplace(t, w, vals, z):
        z = np.atleast_1d(np.asarray(z))
        out = np.empty(z.shape, dtype=np.result_type(z, float))
        for i0 in range(0, len(z), 1024):
            zz = z[i0:i0 + 1024]
            ex = -np.outer(zz, t)
            # samples of G that underflowed would meet overflowing exponentials
            ex = np.minimum(ex.real, 700.0) + (1j * ex.imag if np.iscomplexobj(ex) else 0.0)
            with np.errstate(under="ignore"):
                out[i0:i0 + 1024] = np.exp(ex) @ (w * vals)
        return out

    def _extended(self, side: int, T: float):
        """Nodes, weights and samples of G on one half line reaching |t| = T."""
        base = (self.tpos, self.wpos, self.Gpos) if side > 0 else (self.tneg, self.wneg, self.Gneg)
        end, w = self._ends[side], self._width
        if not T > end:
            return base
        step = 64 * w
        reach = end + step * math.ceil((min(T, 2e4) - end) / step)
        key = (side, reach)
        if key not in self._ext_cache:
            br = np.arange(end, reach + 0.5 * w, w)
            kinks = [side * k for k in self._kinks if end < side * k < reach]
            br = np.unique(np.concatenate([br, kinks]))
            x, ww = nm.composite_gauss(br, self.order)
            x = side * x
            self._ext_cache[key] = (np.concatenate([base[0], x]), np.concatenate([base[1], ww]),
                                    np.concatenate([base[2], self.G(x)]))
        return self._ext_cache[key]

    def A1(self, z):
        """F(z) * integral over t < 0 of G(t) e^{-tz}; valid for Re z < alpha_F.

        Samples of G decay like e^{alpha_F t} and underflow for t below about
        -700 / alpha_F, so accuracy is only kept for Re z <= 0.95 alpha_F.
        """
        z = np.atleast_1d(np.asarray(z))
        T = 45.0 / max(self.alpha - float(np.max(z.real)), 1e-3) if np.isfinite(self.alpha) else 0.0
        t, w, G = self._extended(-1, T)
        return np.asarray(self.F(z)) * self._laplace(t, w, G, z)

    def A2(self, z):
        """f_mu(z) - F(z) * integral over t > 0 of G(t) e^{-tz}; valid for Re z > 0."""
        z = np.atleast_1d(np.asarray(z))
        t, w, G = self._extended(1, 45.0 / max(float(np.min(z.real)), 1e-3))
        raw = self._laplace(t, w, G - self.G0, z) + self.G0 / z
        return np.asarray(ms.f_mu(self.m, z)) - np.asarray(self.F(z)) * raw

    def A(self, z):
        z = np.atleast_1d(np.asarray(z))
        left = z.real <= self.c
        out = np.empty(z.shape, dtype=np.result_type(z, float))
        if np.any(left):
            out[left] = self.A1(z[left])
        if np.any(~left):
            out[~left] = self.A2(z[~left])
        return out

    def L(self, z):
        z0 = np.asarray(z)
        z = np.atleast_1d(z0)
        out = np.empty(z.shape, dtype=np.result_type(z, float))
        F = self.F
        far = z.real <= -1.0
        near = (~far) & (z.real <= self.c)
        right = z.real > self.c
        if np.any(far):
            zz = z[far]
            out[far] = np.asarray(F(zz)) * self._laplace(self.tneg, self.wneg, self.Gneg - self.G0, zz)
        if np.any(near):
            zz = z[near]
            out[near] = (np.asarray(F(zz)) * self._laplace(self.tneg, self.wneg, self.Gneg, zz)
                         + self.G0 * np.asarray(F.over_z(zz)))
        if np.any(right):
            zz = z[right]
            out[right] = (np.asarray(ms.f_mu(self.m, zz))
                          - np.asarray(F(zz)) * self._laplace(self.tpos, self.wpos, self.Gpos - self.G0, zz))
        return out if z0.ndim else out[0]

    def M(self, z):
        z0 = np.asarray(z)
        z = np.atleast_1d(z0)
        d2 = self.F.second_derivative_at_zero()
        out = self.L(z) + 2.0 / d2 * np.asarray(self.F.over_z2(z))
        return out if z0.ndim else out[0]


@lru_cache(maxsize=64)
def interpolant(F: LPFunction, m: ms.Measure) -> Interpolant:
    return Interpolant(F, m)


def eval_F(F: LPFunction, z, n_terms: int | None = None):
    """F(z); with ``n_terms`` the truncated Hadamard product over that many zeros."""
    if n_terms is None:
        return F(z)
    return hadamard_product(F, z, n_terms)[0]


def hadamard_product(F: LPFunction, z, n_terms: int):
    """Truncated product over the first zeros (paired symmetrically when possible).

    Returns (value, tail_bound) where the bound covers the omitted factors
    through the sum of |z|^2 / x^2 over them.
    """
    if n_terms < 1:
        raise LPError("n_terms must be at least 1")
    z = complex(z)
    if isinstance(F, HadamardLP):
        return complex(F(z)), 0.0
    zs, mult = F.zeros(n_terms + 1 + F.r)
    nz = zs != 0
    xs, ms_ = zs[nz][:n_terms], mult[nz][:n_terms]
    val = F.lead * z ** F.r * np.exp(F.b * z)
    for x, m in zip(xs, ms_):
        val *= ((1 - z / x) * np.exp(z / x)) ** m
    # tail: omitted zeros come in +- pairs with spacing about that of the last ones
    last = abs(xs[-1])
    spacing = abs(abs(xs[-1]) - abs(xs[-3])) if len(xs) > 2 else last
    tail_sum = 2.0 * 2.0 * abs(z) ** 2 / (spacing * last)
    return complex(val), float(abs(val) * (math.exp(tail_sum) - 1.0))


def alpha_F(F: LPFunction) -> float:
    return F.alpha


def A_interp(F: LPFunction, m: ms.Measure, z):
    return interpolant(F, m).A(z)


def L_of(F: LPFunction, m: ms.Measure, z):
    return interpolant(F, m).L(z)


def M_of(F: LPFunction, m: ms.Measure, z):
    return interpolant(F, m).M(z)
