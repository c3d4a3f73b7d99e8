"""Signed measures on the line and their truncated Laplace transforms.

A :class:`Measure` is a finite list of atoms plus a finite list of densities
drawn from a few closed-form families.  Every family knows its distribution
function, the running integral of that distribution function and its Laplace
transform, so the hypothesis checks and ``f_mu`` do not depend on adaptive
quadrature except as a fallback.

Sign and normalisation conventions:

* ``distribution(m, x) = m((-inf, x])``, right-continuous;
* the bound in the average and boundedness conditions is fixed to 1;
* the sine family is scaled by a/2 so that its distribution function
  ``(1 - cos a x) / 2`` stays inside [0, 1].
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy import special as sps

from . import numerics as nm


class MeasureError(ValueError):
    """Malformed measure description or unsupported operation."""


class HypothesisError(ValueError):
    """A required hypothesis on the measure does not hold."""

    def __init__(self, msg: str, failing: Sequence[str] = ()):
        super().__init__(msg)
        self.failing = tuple(failing)


class DivergenceError(ArithmeticError):
    pass


FAMILIES = ("exponential", "ramp", "sine", "uniform")


@dataclass(frozen=True)
class Density:
    """A density from a named family restricted to ``[lo, hi]`` and shifted by ``shift``.

    exponential: e^{-s};  ramp(p): p s^{p-1};  sine(a): (a/2) sin(a s);
    uniform(c): c.  Here ``s = lambda - shift``.
    """

    family: str
    params: tuple[float, ...] = ()
    lo: float = 0.0
    hi: float = math.inf
    shift: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise MeasureError(f"unknown density family {self.family!r}")
        if not self.lo < self.hi:
            raise MeasureError("density support must have lo < hi")
        if not np.isfinite(self.lo):
            raise MeasureError("density support must be bounded below")
        if self.family in ("ramp", "sine", "uniform") and len(self.params) != 1:
            raise MeasureError(f"{self.family} takes one parameter")
        if self.family == "ramp" and not (self.params[0] > 0 and self.lo >= 0):
            raise MeasureError("ramp needs p > 0 and support in [0, inf)")
        if self.family == "sine" and not self.params[0] > 0:
            raise MeasureError("sine needs a > 0")

    # support in the shifted variable lambda
    @property
    def a(self) -> float:
        return self.lo + self.shift

    @property
    def b(self) -> float:
        return self.hi + self.shift

    @property
    def decays(self) -> bool:
        return self.family == "exponential" or np.isfinite(self.hi)

    @property
    def singular_at_lo(self) -> bool:
        return self.family == "ramp" and self.lo == 0 and self.params[0] < 1

    def _pdf_s(self, s):
        f = self.family
        if f == "exponential":
            return np.exp(-s)
        if f == "ramp":
            p = self.params[0]
            with np.errstate(divide="ignore", invalid="ignore"):
                return p * np.power(s, p - 1.0)
        if f == "sine":
            a = self.params[0]
            return 0.5 * a * np.sin(a * s)
        return np.full_like(np.asarray(s, dtype=float), self.params[0])

    def _prim_s(self, s):
        # an antiderivative of the pdf in s
        f = self.family
        if f == "exponential":
            return -np.exp(-s)
        if f == "ramp":
            return np.power(s, self.params[0])
        if f == "sine":
            return -0.5 * np.cos(self.params[0] * s)
        return self.params[0] * np.asarray(s, dtype=float)

    def _prim2_s(self, s):
        # an antiderivative of _prim_s
        f = self.family
        if f == "exponential":
            return np.exp(-s)
        if f == "ramp":
            p = self.params[0]
            return np.power(s, p + 1.0) / (p + 1.0)
        if f == "sine":
            a = self.params[0]
            return -0.5 * np.sin(a * s) / a
        return 0.5 * self.params[0] * np.asarray(s, dtype=float) ** 2

    def pdf(self, lam):
        lam = np.asarray(lam, dtype=float)
        s = lam - self.shift
        inside = (s >= self.lo) & (s <= self.hi)
        out = np.zeros_like(s)
        if np.any(inside):
            out[inside] = self._pdf_s(s[inside])
        return out

    def total(self) -> float:
        if np.isfinite(self.hi):
            return float(self._prim_s(self.hi) - self._prim_s(self.lo))
        if self.family == "exponential":
            return float(math.exp(-self.lo))
        return math.nan

    def cdf(self, lam):
        s = np.clip(np.asarray(lam, dtype=float) - self.shift, self.lo, self.hi)
        return self._prim_s(s) - self._prim_s(self.lo)

    def cdf_integral(self, y):
        """Integral of the distribution function from the lower end to ``y``."""
        y = np.asarray(y, dtype=float) - self.shift
        lo, hi = self.lo, self.hi
        p_lo = self._prim_s(lo)
        yc = np.clip(y, lo, hi)
        inner = (self._prim2_s(yc) - self._prim2_s(lo)) - p_lo * (yc - lo)
        if np.isfinite(hi):
            inner = inner + np.where(y > hi, (self._prim_s(hi) - p_lo) * (y - hi), 0.0)
        return np.where(y <= lo, 0.0, inner)

    def breaks(self) -> list[float]:
        out = [self.a]
        if np.isfinite(self.b):
            out.append(self.b)
        return out

    def laplace(self, z):
        """Integral of exp(-lambda z) against the density (Re z > 0 unless bounded)."""
        z = np.asarray(z)
        if np.iscomplexobj(z) and np.any(z.imag != 0):
            return _laplace_numeric(self, z)
        x = z.real.astype(float)
        f, lo, hi, sh = self.family, self.lo, self.hi, self.shift
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            if f == "exponential":
                r = 1.0 + x
                top = 0.0 if not np.isfinite(hi) else np.exp(-hi * r)
                out = np.where(np.abs(r) > 1e-12,
                               (np.exp(-lo * r) - top) / np.where(r == 0, 1, r),
                               (hi - lo) if np.isfinite(hi) else np.inf)
            elif f == "ramp":
                p = self.params[0]
                big = x > 1e-3
                xs = np.where(big, x, 1.0)
                out = sps.gamma(p + 1.0) * (sps.gammainc(p, xs * hi) - sps.gammainc(p, xs * lo)) / xs ** p
                if not np.all(big):
                    if not np.isfinite(hi):
                        out = np.where(big, out, np.inf)
                    else:
                        nodes, w = self.nodes(30, width=max(hi - lo, 1e-300))
                        small = np.exp(-np.outer(np.where(big, 0.0, x), nodes - sh)) @ w
                        out = np.where(big, out, small)
            elif f == "sine":
                a = self.params[0]
                # antiderivative of (a/2) sin(a s) e^{-s x}
                def anti(s):
                    return -0.5 * a * np.exp(-s * x) * (x * np.sin(a * s) + a * np.cos(a * s)) / (a * a + x * x)
                top = 0.0 if not np.isfinite(hi) else anti(hi)
                out = np.where(x > 0 if not np.isfinite(hi) else True, top - anti(lo), np.nan)
            else:
                c = self.params[0]
                top = 0.0 if not np.isfinite(hi) else np.exp(-hi * x)
                out = np.where(np.abs(x) > 1e-12, c * (np.exp(-lo * x) - top) / np.where(x == 0, 1, x),
                               c * (hi - lo))
        return out * np.exp(-sh * x)

    def nodes(self, order: int = 20, upper: float | None = None, width: float = 2.0):
        """Composite Gauss nodes on the support with weights multiplied by the pdf."""
        a = self.a
        b = self.b
        if not np.isfinite(b):
            if self.family == "exponential":
                b = a + 45.0
            elif upper is None:
                raise MeasureError("non-decaying density needs an explicit upper cut")
        if upper is not None:
            b = min(b, upper)
        if b <= a:
            return np.zeros(0), np.zeros(0)
        n = max(1, int(math.ceil((b - a) / width)))
        br = np.linspace(a, b, n + 1)
        if self.singular_at_lo:
            br = np.concatenate([nm.geometric_breaks(a, br[1], floor=1e-16)[:-1], br[1:]])
        x, w = nm.composite_gauss(br, order)
        return x, w * self.pdf(x)


def _laplace_numeric(d: Density, z):
    z = np.atleast_1d(np.asarray(z))
    out = np.empty(z.shape, dtype=complex)
    pts = d.breaks()
    for i, zi in np.ndenumerate(z):
        f = lambda s, zi=zi: complex(d.pdf(s) * np.exp(-s * zi))
        if np.isfinite(d.b):
            out[i] = nm.integrate_complex(f, d.a, d.b, points=pts)
        else:
            out[i] = nm.integrate_complex(f, d.a, np.inf, points=pts)
    return out if np.iscomplexobj(z) and np.any(z.imag != 0) else out.real


@dataclass(frozen=True)
class Measure:
    atoms: tuple[tuple[float, float], ...] = ()
    densities: tuple[Density, ...] = ()
    label: str = ""

    def __post_init__(self):
        if not self.atoms and not self.densities:
            raise MeasureError("empty measure")
        for loc, _ in self.atoms:
            if not np.isfinite(loc):
                raise MeasureError("atom locations must be finite")

    @property
    def support_lower_bound(self) -> float:
        locs = [loc for loc, mass in self.atoms if mass != 0]
        locs += [d.a for d in self.densities]
        return float(min(locs))

    def breaks(self) -> list[float]:
        out = [loc for loc, _ in self.atoms]
        for d in self.densities:
            out += d.breaks()
        return sorted(set(out))

    def shifted(self, s: float) -> "Measure":
        atoms = tuple((loc + s, mass) for loc, mass in self.atoms)
        dens = tuple(replace(d, shift=d.shift + s) for d in self.densities)
        return Measure(atoms, dens, f"{self.label} shifted by {s:g}" if self.label else "")

    def __str__(self):
        return self.label or to_text(self)


# ---------------------------------------------------------------------------
# built-in families

def dirac(loc: float = 0.0, mass: float = 1.0) -> Measure:
    return Measure(((float(loc), float(mass)),), (), f"dirac({loc:g})")


def exponential() -> Measure:
    return Measure((), (Density("exponential"),), "exponential")


def ramp(p: float = 2.0) -> Measure:
    return Measure((), (Density("ramp", (float(p),), 0.0, 1.0),), f"ramp({p:g})")


def sine(a: float = 1.0) -> Measure:
    return Measure((), (Density("sine", (float(a),), 0.0, math.inf),), f"sine({a:g})")


# ---------------------------------------------------------------------------
# evaluation

def distribution(m: Measure, x):
    """m((-inf, x]), right-continuous."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for loc, mass in m.atoms:
        out = out + np.where(x >= loc, mass, 0.0)
    for d in m.densities:
        out = out + d.cdf(x)
    return out if out.ndim else float(out)


def distribution_integral(m: Measure, y):
    """Integral of the distribution function from -inf to ``y``."""
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    for loc, mass in m.atoms:
        out = out + mass * np.maximum(y - loc, 0.0)
    for d in m.densities:
        out = out + d.cdf_integral(y)
    return out if out.ndim else float(out)


def f_mu(m: Measure, z):
    """Truncated Laplace transform: integral of exp(-lambda z) dm for Re z > 0, else 0."""
    z = np.asarray(z)
    cplx = np.iscomplexobj(z)
    zz = z.astype(complex) if cplx else z.astype(float)
    pos = zz.real > 0
    out = np.zeros(zz.shape, dtype=complex if cplx else float)
    if np.any(pos):
        zp = zz[pos]
        val = np.zeros(zp.shape, dtype=out.dtype)
        for loc, mass in m.atoms:
            val = val + mass * np.exp(-loc * zp)
        for d in m.densities:
            val = val + d.laplace(zp)
        out[pos] = val
    if out.ndim == 0:
        return complex(out) if cplx else float(out)
    return out


def f_mu_ibp(m: Measure, z, tol: nm.Tolerance = nm.DEFAULT_TOL):
    """Integration-by-parts route: integral of z exp(-lambda z) m(lambda) d lambda."""
    z = complex(z)
    if z.real <= 0:
        return 0.0
    lo = m.support_lower_bound
    pts = m.breaks()

    def fn(lam):
        return z * np.exp(-lam * z) * distribution(m, lam)

    val = nm.integrate_complex(fn, lo, np.inf, tol, pts)
    return val.real if z.imag == 0 else val


def f_mu_tilde(m: Measure, z):
    z = np.asarray(z)
    return f_mu(m, z) - f_mu(m, -z)


def f_mu_tail_integral(m: Measure, X: float) -> float:
    """Integral of f_mu over (X, inf) for X > 0: the integral of exp(-lambda X)/lambda dm."""
    total = 0.0
    for loc, mass in m.atoms:
        if loc <= 0 and mass != 0:
            raise DivergenceError("atom at a nonpositive location: f_mu is not integrable at infinity")
        total += mass * math.exp(-loc * X) / loc
    for d in m.densities:
        if d.a <= 0 and d.family != "ramp":
            raise DivergenceError("density reaching 0: f_mu is not integrable at infinity")
        if d.family == "ramp" and d.a <= 0 and d.params[0] <= 1:
            raise DivergenceError("ramp with p <= 1: f_mu is not integrable at infinity")
        fn = lambda lam: float(d.pdf(lam) * math.exp(-lam * X) / lam) if lam > 0 else 0.0
        upper = d.b if np.isfinite(d.b) else np.inf
        total += nm.integrate(fn, max(d.a, 0.0), upper, points=d.breaks())
    return total


# ---------------------------------------------------------------------------
# hypotheses

HOLDS, FAILS, UNDETERMINED = "holds", "fails", "undetermined"


@dataclass
class HypothesisReport:
    h1: str = UNDETERMINED
    h1_prime: str = UNDETERMINED
    h2: str = UNDETERMINED
    h3: str = UNDETERMINED
    h4: str = UNDETERMINED
    support: str | None = None
    witnesses: list[tuple[str, float, float]] = field(default_factory=list)

    def flags(self) -> dict[str, str]:
        out = {"H1": self.h1, "H1'": self.h1_prime, "H2": self.h2, "H3": self.h3, "H4": self.h4}
        if self.support is not None:
            out["support"] = self.support
        return out

    def failing(self, names: Iterable[str] | None = None) -> list[str]:
        fl = self.flags()
        keys = list(fl) if names is None else list(names)
        return [k for k in keys if fl.get(k) != HOLDS]

    def require(self, *names: str) -> None:
        bad = self.failing(names)
        if bad:
            wit = [w for w in self.witnesses if w[0] in bad]
            raise HypothesisError(
                "hypothesis not satisfied: " + ", ".join(f"{k} ({self.flags()[k]})" for k in bad)
                + (f"; witness {wit[0][0]} at x={wit[0][1]:.6g} value {wit[0][2]:.6g}" if wit else ""),
                bad,
            )


def _h2_grid(m: Measure) -> NDArray:
    lo = m.support_lower_bound
    span = max(10.0, max((b for b in m.breaks()), default=lo) - lo + 10.0)
    grid = np.linspace(lo - 1.0, lo + span, 10_000)
    extra = []
    for d in m.densities:
        if d.family == "sine":
            a = d.params[0]
            k = np.arange(0, 64)
            extra.append(d.a + (2 * k + 1) * np.pi / a)
    pts = np.concatenate([grid, np.asarray(m.breaks())] + extra)
    return np.sort(pts)


def check_hypotheses(m: Measure, e_type_bound: float | None = None) -> HypothesisReport:
    rep = HypothesisReport()
    lo = m.support_lower_bound
    rep.h1 = HOLDS if np.isfinite(lo) else FAILS
    rep.h1_prime = HOLDS if lo >= 0 else FAILS
    if rep.h1_prime == FAILS:
        rep.witnesses.append(("H1'", lo, 1.0))

    grid = _h2_grid(m)
    vals = np.asarray(distribution(m, grid))
    bad = (vals < -1e-12) | (vals > 1 + 1e-12)
    if np.any(bad):
        i = int(np.argmax(np.abs(vals - 0.5) * bad))
        rep.h2 = FAILS
        rep.witnesses.append(("H2", float(grid[i]), float(vals[i])))
    else:
        rep.h2 = HOLDS

    ys = 2.0 ** np.arange(4, 15)
    shifted = ys + max(0.0, lo)
    avg = np.asarray(distribution_integral(m, shifted)) / shifted
    extrap = 2.0 * avg[1:] - avg[:-1]
    osc = float(np.max(np.abs(np.diff(extrap[-4:]))))
    limit = float(extrap[-1])
    if osc > 1e-3:
        rep.h3 = UNDETERMINED
    elif abs(limit - 1.0) <= 1e-6:
        rep.h3 = HOLDS
    else:
        rep.h3 = FAILS
        rep.witnesses.append(("H3", float(shifted[-1]), float(avg[-1])))

    rep.h4 = _check_h4(m, rep)
    if e_type_bound is not None:
        rep.support = HOLDS if lo >= -e_type_bound - 1e-15 else FAILS
        if rep.support == FAILS:
            rep.witnesses.append(("support", lo, -e_type_bound))
    return rep


def _check_h4(m: Measure, rep: HypothesisReport) -> str:
    lo = m.support_lower_bound
    if lo > 0:
        return HOLDS
    if lo < 0 or float(distribution(m, 0.0)) != 0.0:
        rep.witnesses.append(("H4", 0.0, float(distribution(m, 0.0))))
        return FAILS
    pts = [p for p in m.breaks() if p > 0]

    def part(eps):
        return nm.integrate(lambda s: float(distribution(m, s)) / (s * s), eps, 1.0, nm.Tolerance(1e-10, 1e-14), pts)

    i4, i6, i8 = part(1e-4), part(1e-6), part(1e-8)
    d1, d2 = i6 - i4, i8 - i6
    if d2 <= 1e-5:
        return HOLDS
    if d2 >= 0.5 * d1:
        rep.witnesses.append(("H4", 1e-8, float(distribution(m, 1e-8))))
        return FAILS
    return UNDETERMINED


@dataclass(frozen=True)
class LimitEstimate:
    value: float
    status: str


def f_mu_limit_at_zero(m: Measure) -> LimitEstimate:
    """Right limit of f_mu at 0 by Richardson extrapolation along x = 2^-k."""
    xs = 2.0 ** -np.arange(10, 22, dtype=float)
    vals = np.asarray(f_mu(m, xs), dtype=float)
    extrap = 2.0 * vals[1:] - vals[:-1]
    status = check_hypotheses(m).h3
    return LimitEstimate(float(extrap[-1]), status)


# ---------------------------------------------------------------------------
# text formats

_FAMILY_NPARAMS = {"exponential": 0, "ramp": 1, "sine": 1, "uniform": 1}


def _num(tok: str) -> float:
    try:
        return float(tok)
    except ValueError as exc:
        raise MeasureError(f"not a number: {tok!r}") from exc


def parse_measure_text(text: str) -> Measure:
    """Parse lines ``dirac <loc> <mass>`` | ``density <family> <params> <lo> <hi>``."""
    atoms, dens = [], []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if tok[0] == "dirac":
            if len(tok) != 3:
                raise MeasureError(f"bad dirac line: {raw!r}")
            atoms.append((_num(tok[1]), _num(tok[2])))
        elif tok[0] == "density":
            if len(tok) < 2 or tok[1] not in _FAMILY_NPARAMS:
                raise MeasureError(f"bad density line: {raw!r}")
            k = _FAMILY_NPARAMS[tok[1]]
            if len(tok) != 4 + k:
                raise MeasureError(f"density {tok[1]} expects {k} parameter(s) and a support: {raw!r}")
            params = tuple(_num(t) for t in tok[2:2 + k])
            dens.append(Density(tok[1], params, _num(tok[2 + k]), _num(tok[3 + k])))
        else:
            raise MeasureError(f"unknown measure line: {raw!r}")
    if not atoms and not dens:
        raise MeasureError("measure description is empty")
    return Measure(tuple(atoms), tuple(dens))


def to_text(m: Measure) -> str:
    lines = [f"dirac {loc!r} {mass!r}" for loc, mass in m.atoms]
    for d in m.densities:
        if d.shift != 0:
            raise MeasureError("shifted densities have no text form")
        par = " ".join(repr(p) for p in d.params)
        lines.append(f"density {d.family} {par + ' ' if par else ''}{d.lo!r} {d.hi!r}".replace("inf", "inf"))
    return "\n".join(lines)


_SHORT = re.compile(r"^(?P<name>[a-z]+)(?::(?P<arg>.*))?$")


def parse_measure_spec(spec: str) -> Measure:
    """Short forms used on the command line: ``dirac:0``, ``ramp:2``, ``sine:a=1``,
    ``exponential``, or ``@file`` for the line format."""
    spec = spec.strip()
    if spec.startswith("@"):
        with open(spec[1:], encoding="utf-8") as fh:
            return parse_measure_text(fh.read())
    mt = _SHORT.match(spec)
    if not mt:
        raise MeasureError(f"bad measure spec {spec!r}")
    name, arg = mt.group("name"), mt.group("arg")

    def value(default=None, key=None):
        if arg is None or arg == "":
            if default is None:
                raise MeasureError(f"{name} needs a parameter")
            return default
        a = arg
        if "=" in a:
            k, a = a.split("=", 1)
            if key is not None and k.strip() != key:
                raise MeasureError(f"{name} expects {key}=..., got {k}")
        return _num(a)

    if name == "dirac":
        return dirac(value(0.0, "loc"))
    if name == "ramp":
        return ramp(value(2.0, "p"))
    if name == "sine":
        return sine(value(1.0, "a"))
    if name == "exponential":
        if arg:
            raise MeasureError("exponential takes no parameter")
        return exponential()
    raise MeasureError(f"unknown measure {name!r}")
