"""Shared numeric substrate.

Special functions are thin wrappers over :mod:`scipy.special` with the domain
checks this package relies on.  Adaptive integration goes through
:func:`scipy.integrate.quad`; semi-infinite ranges are first mapped to a
bounded interval with ``t = a - ln u`` because every integrand met here decays
exponentially.  The fixed-node helpers (:func:`composite_gauss`,
:func:`geometric_breaks`) back the vectorised integrals in the other modules.

Roots of self-inversive polynomials are found without an eigensolver: the
rotated function ``x -> e(-m x / 2) p(e(x))`` is real, so a sign scan on a
uniform grid followed by bracketing isolates every zero.
"""
from __future__ import annotations

import math
import threading
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import integrate as _spi
from scipy import linalg as _sla
from scipy import optimize as _spo
from scipy import special as _sps


class NumericsError(ArithmeticError):
    """Base class for numeric failures raised by this package."""


class PoleError(NumericsError):
    pass


class NonConvergenceError(NumericsError):
    """Raised when an iterative or adaptive method gives up.

    ``partial`` carries the best estimate reached before giving up.
    """

    def __init__(self, msg: str, partial: float | complex | None = None, error: float | None = None):
        super().__init__(msg)
        self.partial = partial
        self.error = error


class SingularMatrixError(NumericsError):
    pass


class RootCountError(NumericsError):
    pass


@dataclass(frozen=True)
class Tolerance:
    rel: float = 1e-10
    abs: float = 1e-12
    max_subdiv: int = 2000

    def __post_init__(self):
        if not self.rel > 0:
            raise ValueError("rel must be positive")
        if not self.abs >= 0:
            raise ValueError("abs must be nonnegative")
        if self.max_subdiv < 1:
            raise ValueError("max_subdiv must be at least 1")


DEFAULT_TOL = Tolerance()


def e(x):
    """The circle character exp(2 pi i x)."""
    return np.exp(2j * np.pi * np.asarray(x))


# ---------------------------------------------------------------------------
# special functions

def gamma(x: float) -> float:
    if float(x) <= 0 and float(x) == math.floor(float(x)):
        raise PoleError(f"gamma has a pole at {x}")
    return float(_sps.gamma(x))


def bessel_j(nu: float, x):
    """J_nu(x); accepts arrays and complex arguments."""
    if not nu > -1:
        raise ValueError("order must exceed -1")
    out = _sps.jv(nu, x)
    return float(out) if np.ndim(out) == 0 and np.isrealobj(out) else out


_zero_cache: dict[float, NDArray] = {}
_zero_lock = threading.Lock()


def _scan_bessel_zeros(nu: float, count: int) -> NDArray:
    # McMahon gives the k-th zero to within a fraction of the spacing pi,
    # so scanning a little past it catches all of the first `count` zeros.
    mu = 4.0 * nu * nu
    beta = (count + nu / 2.0 - 0.25) * np.pi
    upper = beta - (mu - 1.0) / (8.0 * beta) + 2.0 * np.pi
    grid = np.concatenate([np.geomspace(1e-8, 1.0, 200), np.arange(1.0, upper, 0.05)[1:]])
    vals = _sps.jv(nu, grid)
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    roots = [
        _spo.brentq(lambda s: _sps.jv(nu, s), grid[i], grid[i + 1], xtol=1e-15, rtol=1e-15, maxiter=200)
        for i in idx[:count]
    ]
    if len(roots) < count:
        raise RootCountError(f"found {len(roots)} of {count} zeros of J_{nu}")
    return np.asarray(roots)


def bessel_zeros(nu: float, count: int) -> NDArray:
    """First ``count`` positive zeros of J_nu (cached per order)."""
    if not nu > -1:
        raise ValueError("order must exceed -1")
    key = float(nu)
    with _zero_lock:
        have = _zero_cache.get(key)
        if have is None or len(have) < count:
            have = _scan_bessel_zeros(key, max(count, 64, 2 * (0 if have is None else len(have))))
            _zero_cache[key] = have
    return have[:count].copy()


def bessel_zero(nu: float, k: int) -> float:
    if k < 1:
        raise ValueError("zero index starts at 1")
    return float(bessel_zeros(nu, k)[k - 1])


# ---------------------------------------------------------------------------
# integration

def _check(value, err, tol: Tolerance, info=None):
    bound = max(tol.abs, tol.rel * abs(value))
    if not np.isfinite(value) or err > bound:
        raise NonConvergenceError(f"integral did not converge (error {err:.3g} > {bound:.3g})", value, err)


def _quad_real(f, a, b, tol: Tolerance, points):
    kw = dict(epsabs=tol.abs, epsrel=tol.rel, limit=tol.max_subdiv, full_output=1)
    if points is not None:
        pts = sorted(p for p in points if a < p < b)
        if pts:
            kw["points"] = pts
    res = _spi.quad(f, a, b, **kw)
    return res[0], res[1]


def integrate_with_error(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: Tolerance = DEFAULT_TOL,
    points: Sequence[float] | None = None,
) -> tuple[float, float]:
    """Adaptive integral of ``f`` over (a, b) with its error estimate.

    Infinite endpoints are mapped to (0, 1] by ``t = a - ln u`` (or the mirror
    image); ``points`` are interior break points in the original variable.
    """
    if a == b:
        return 0.0, 0.0
    if a > b:
        v, err = integrate_with_error(f, b, a, tol, points)
        return -v, err
    pts = list(points) if points is not None else []
    if np.isinf(a) and np.isinf(b):
        v1, e1 = integrate_with_error(f, -np.inf, 0.0, tol, [p for p in pts if p < 0])
        v2, e2 = integrate_with_error(f, 0.0, np.inf, tol, [p for p in pts if p > 0])
        return v1 + v2, e1 + e2
    if np.isinf(b):
        g = lambda u: f(a - math.log(u)) / u if u > 0 else 0.0
        upts = [math.exp(a - p) for p in pts if p > a]
        return _quad_real(g, 0.0, 1.0, tol, upts)
    if np.isinf(a):
        g = lambda u: f(b + math.log(u)) / u if u > 0 else 0.0
        upts = [math.exp(p - b) for p in pts if p < b]
        return _quad_real(g, 0.0, 1.0, tol, upts)
    return _quad_real(f, a, b, tol, pts)


def _doubling_tail(f, a: float, sign: int, tol: Tolerance, points, kmax: int = 14):
    # integral of f over (a, sign*inf) for algebraically decaying integrands:
    # doubling chunks, then one Richardson step against a 1/X remainder
    edges = [a + sign * (2.0 ** k - 1.0) for k in range(kmax + 1)]
    sums, total, err = [], 0.0, 0.0
    inner = Tolerance(tol.rel, tol.abs * 1e-2, tol.max_subdiv)
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, e1 = integrate_with_error(f, min(lo, hi), max(lo, hi), inner, points)
        total += v
        err += e1
        sums.append(total)
    rich = [2.0 * s1 - s0 for s0, s1 in zip(sums[:-1], sums[1:])]
    return rich[-1], abs(rich[-1] - rich[-2]) + err


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: Tolerance = DEFAULT_TOL,
    points: Sequence[float] | None = None,
) -> float:
    """Integral of a real function over (a, b); raises NonConvergenceError.

    When the exponential substitution fails on an infinite range (integrands
    with only algebraic decay), the range is cut into doubling chunks and the
    partial sums are extrapolated; expect about 1e-6 relative accuracy there.
    """
    v, err = integrate_with_error(f, a, b, tol, points)
    bound = max(tol.abs, tol.rel * abs(v))
    if (err > bound or not np.isfinite(v)) and (np.isinf(a) or np.isinf(b)):
        lo, hi = min(a, b), max(a, b)
        pts = list(points) if points is not None else []
        if np.isinf(lo) and np.isinf(hi):
            v1, e1 = _doubling_tail(f, 0.0, -1, tol, pts)
            v2, e2 = _doubling_tail(f, 0.0, 1, tol, pts)
            v, err = v1 + v2, e1 + e2
        elif np.isinf(hi):
            v, err = _doubling_tail(f, lo, 1, tol, pts)
        else:
            v, err = _doubling_tail(f, hi, -1, tol, pts)
        if a > b:
            v = -v
        loose = Tolerance(max(tol.rel, 1e-6), tol.abs, tol.max_subdiv)
        _check(v, err, loose)
        return v
    _check(v, err, tol)
    return v


def integrate_complex(f, a, b, tol: Tolerance = DEFAULT_TOL, points=None) -> complex:
    re = integrate(lambda t: f(t).real, a, b, tol, points)
    im = integrate(lambda t: f(t).imag, a, b, tol, points)
    return complex(re, im)


_gl_cache: dict[int, tuple[NDArray, NDArray]] = {}


def gauss_legendre(order: int) -> tuple[NDArray, NDArray]:
    if order not in _gl_cache:
        _gl_cache[order] = np.polynomial.legendre.leggauss(order)
    return _gl_cache[order]


def composite_gauss(breaks: ArrayLike, order: int = 20) -> tuple[NDArray, NDArray]:
    """Nodes and weights of the composite Gauss-Legendre rule on ``breaks``."""
    br = np.asarray(breaks, dtype=float)
    x, w = gauss_legendre(order)
    lo, hi = br[:-1, None], br[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + half * (x[None, :] + 1.0)).ravel()
    weights = (half * w[None, :]).ravel()
    return nodes, weights


def geometric_breaks(start: float, stop: float, ratio: float = 2.0, floor: float = 1e-14) -> NDArray:
    """Breaks ``start, start + h, start + 2h, ...`` refined geometrically towards ``start``.

    Returns an increasing array from ``start`` to ``stop`` whose pieces shrink by
    ``ratio`` towards ``start`` down to relative size ``floor``.
    """
    length = stop - start
    n = int(math.ceil(math.log(1.0 / floor) / math.log(ratio)))
    rel = ratio ** -np.arange(n, -1, -1, dtype=float)
    return np.concatenate([[start], start + length * rel])


# ---------------------------------------------------------------------------
# linear algebra and roots

def solve_dense(A: ArrayLike, b: ArrayLike) -> NDArray:
    """Solve ``A x = b`` by partially pivoted LU; refuses near-singular systems."""
    A = np.atleast_2d(np.asarray(A))
    b = np.asarray(b)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    scale = float(np.max(np.abs(A))) if A.size else 0.0
    if scale == 0.0:
        raise SingularMatrixError("zero matrix")
    with warnings.catch_warnings():
        # exact zero pivots are reported below as SingularMatrixError
        warnings.simplefilter("ignore", _sla.LinAlgWarning)
        lu, piv = _sla.lu_factor(A, check_finite=True)
    pivots = np.abs(np.diag(lu))
    if pivots.min() < 1e-14 * scale:
        raise SingularMatrixError(f"pivot {pivots.min():.3g} below 1e-14 x scale {scale:.3g}")
    x = _sla.lu_solve((lu, piv), b)
    # one step of iterative refinement keeps the residual at rounding level
    r = b - A @ x
    x = x + _sla.lu_solve((lu, piv), r)
    return x


def poly_eval(coeffs: ArrayLike, z):
    """Evaluate a polynomial given by ascending coefficients."""
    c = np.asarray(coeffs)
    return np.polynomial.polynomial.polyval(np.asarray(z), c)


def roots_on_circle(coeffs: ArrayLike, scan_factor: int = 16) -> NDArray:
    """Arguments in [0, 1) of the zeros of a self-inversive polynomial.

    ``coeffs`` are ascending, degree ``m = len(coeffs) - 1``.  The rotated
    function ``e(-m x/2) p(e(x))`` is real up to a constant unimodular factor,
    which is removed before the scan.
    """
    c = np.asarray(coeffs, dtype=complex)
    m = len(c) - 1
    if m < 1:
        return np.zeros(0)
    norm = float(np.sum(np.abs(c)))

    def rot(x):
        return np.exp(-1j * np.pi * m * np.asarray(x)) * poly_eval(c, e(x))

    # the unimodular factor: rot is (factor) * real; estimate it from a
    # large-modulus sample
    probe = rot(np.linspace(0, 1, 4 * m + 3, endpoint=False))
    k = int(np.argmax(np.abs(probe)))
    phase = probe[k] / abs(probe[k])

    def real_rot(x):
        return (rot(x) / phase).real

    n = scan_factor * m
    shift = 0.5 / n
    grid = -shift + np.arange(n + 1) / n
    vals = real_rot(grid)
    roots = []
    for i in range(n):
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            roots.append(grid[i])
        elif a * b < 0:
            roots.append(_spo.brentq(lambda s: float(real_rot(s)), grid[i], grid[i + 1], xtol=1e-16, rtol=1e-15))
    out = np.sort(np.mod(np.asarray(roots), 1.0))
    out[out > 1.0 - 1e-15] = 0.0
    out = np.sort(out)
    if len(out) != m:
        raise RootCountError(f"found {len(out)} of {m} roots on the circle")
    resid = np.abs(poly_eval(c, e(out)))
    if np.any(resid > 1e-10 * norm):
        raise RootCountError("root residual above 1e-10 * norm; zeros may be clustered")
    return out
