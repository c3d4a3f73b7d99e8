"""Named invariant checks behind ``extremal-kit verify``.

Each check returns (value, expected, tolerance); it passes when
|value - expected| <= tolerance * tol_scale, or, for one-sided checks,
when value >= expected - tolerance * tol_scale.  ``tol_scale`` exists so the
harness can be exercised with impossible tolerances.
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import debranges as db
from . import lp
from . import measure as ms
from . import numerics as nm
from . import opuc
from . import periodic as per


@dataclass
class CheckResult:
    name: str
    status: str
    value: float
    expected: float
    tolerance: float
    seconds: float = 0.0
    note: str = ""


@dataclass
class VerifyReport:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return 5 if any(c.status == "fail" for c in self.checks) else 0

    def table(self) -> str:
        w = max([len(c.name) for c in self.checks] + [4])
        lines = [f"{'name':<{w}}  status  {'value':>24}  {'expected':>24}  {'tolerance':>10}"]
        for c in self.checks:
            lines.append(f"{c.name:<{w}}  {c.status:<6}  {c.value:>24.17g}  {c.expected:>24.17g}  {c.tolerance:>10.3g}"
                         + (f"  {c.note}" if c.note else ""))
        return "\n".join(lines)


_REGISTRY: dict[str, tuple] = {}


def check(name, mode="abs"):
    def deco(fn):
        _REGISTRY[name] = (fn, mode)
        return fn
    return deco


def names() -> list[str]:
    return list(_REGISTRY)


def select(only: list[str] | None) -> list[str]:
    if not only:
        return names()
    out = []
    for key in only:
        hits = [n for n in _REGISTRY if n == key or n.startswith(key + ".")]
        if not hits:
            raise KeyError(f"no check named {key!r}")
        out += [h for h in hits if h not in out]
    return out


# ---------------------------------------------------------------------------
# numerics

@check("numerics.bessel_zeros")
def _bessel_zeros():
    worst = 0.0
    for nu in (-0.5, 0.0, 0.5, 1.0, 2.5):
        z = nm.bessel_zeros(nu, 40)
        worst = max(worst, float(np.max(np.abs(nm.bessel_j(nu, z)))))
    return worst, 0.0, 1e-12


@check("numerics.integrate")
def _integrate():
    v = nm.integrate(lambda x: math.exp(-x) * x, 0.0, math.inf)
    return v, 1.0, 1e-12


@check("numerics.roots_on_circle")
def _roots():
    n = 9
    c = np.zeros(n + 1)
    c[0], c[-1] = -1.0, 1.0
    r = np.sort(nm.roots_on_circle(c))
    return float(np.max(np.abs(r - np.arange(n) / n))), 0.0, 1e-12


# ---------------------------------------------------------------------------
# measure

@check("measure.distribution_bounds", mode="lower")
def _dist_bounds():
    x = np.linspace(-1.0, 50.0, 10_000)
    lo = math.inf
    for m in (ms.dirac(0.0), ms.ramp(2.0), ms.ramp(0.5), ms.exponential(), ms.sine(1.0)):
        v = np.asarray(ms.distribution(m, x))
        lo = min(lo, float(v.min()), float(1.0 - v.max()))
    return lo, 0.0, 1e-12


@check("measure.f_mu_routes")
def _f_routes():
    z = np.array([0.3, 1.0, 2.5 + 1j])
    worst = 0.0
    for m in (ms.ramp(2.0), ms.exponential()):
        a = np.asarray(ms.f_mu(m, z))
        b = np.array([ms.f_mu_ibp(m, zi) for zi in z])
        worst = max(worst, float(np.max(np.abs(a - b))))
    return worst, 0.0, 1e-10


@check("measure.hypotheses")
def _hyp():
    good = ms.check_hypotheses(ms.ramp(2.0)).failing(["H1", "H1'", "H2", "H3", "H4"])
    bad = ms.check_hypotheses(ms.sine(1.0)).failing(["H3"])
    return float(len(good) + (1 - len(bad))), 0.0, 0.0


# ---------------------------------------------------------------------------
# frequency functions

def _sin2():
    return lp.PeriodicSquareLP(np.pi, [0.0])


@check("lp.g_sign", mode="lower")
def _g_sign():
    F = _sin2()
    g = F.freq(F.default_abscissa())
    t = np.linspace(-5, 5, 1000)
    return float(np.min(g.value(t))), 0.0, 1e-12


@check("lp.g_monotone", mode="lower")
def _g_mono():
    F = _sin2()
    g = F.freq(F.default_abscissa())
    t = np.linspace(-5, 5, 1000)
    return float(np.min(np.diff(g.deriv(t)))), 0.0, 1e-9


@check("lp.g_lipschitz", mode="lower")
def _g_lip():
    # g' against the distribution function equals g against d mu
    F = _sin2()
    t = np.linspace(-5, 5, 1000)
    lo = math.inf
    for m in (ms.dirac(0.0), ms.ramp(2.0)):
        v = lp.interpolant(F, m).G(np.concatenate([[0.0], t]))
        d = np.abs(v[1:] - v[0])
        lo = min(lo, float(np.min(2 * np.abs(t) / F.second_derivative_at_zero() - d)))
    return lo, 0.0, 1e-9


@check("lp.g_contour")
def _g_contour():
    F = _sin2()
    c = 0.5
    t = np.array([-1.0, -0.25, 0.25, 1.0, 2.0])
    a = F.freq(c).value(t)
    b = np.array([lp.g_contour(F, c, ti) for ti in t])
    return float(np.max(np.abs(a - b) / np.abs(b))), 0.0, 1e-6


@check("lp.closed_form")
def _g_closed():
    t = np.linspace(-3, 3, 1000)
    worst = 0.0
    for F in (lp.HadamardLP(0, 0.3, 2.0, [1.5]), lp.HadamardLP(2, -0.2, 0.7)):
        c = F.default_abscissa()
        a = lp.g_closed_form(F, c, t)
        b = lp.residue_freq(F, c).value(t)
        worst = max(worst, float(np.max(np.abs(a - b))))
    return worst, 0.0, 1e-12


# ---------------------------------------------------------------------------
# de Branges spaces

@check("debranges.hermite_biehler", mode="lower")
def _hb():
    X, Y = np.meshgrid(np.linspace(-20, 20, 41), np.linspace(0.05, 5, 12))
    z = X + 1j * Y
    lo = math.inf
    for sp in (db.PaleyWiener(1.0), db.Homogeneous(0.0), db.Homogeneous(0.5)):
        r = np.abs(sp.E_star(z)) / np.abs(sp.E(z))
        lo = min(lo, float(np.min(1.0 - r)))
    return lo, 0.0, 0.0


@check("debranges.kernel_diag")
def _kdiag():
    x = np.linspace(-6, 6, 61) + 0.013
    worst = 0.0
    for sp in (db.PaleyWiener(1.0), db.Homogeneous(0.0)):
        a = np.asarray(sp.kernel(x, x)).real
        b = np.asarray(sp.kernel_diag(x))
        worst = max(worst, float(np.max(np.abs(a - b) / np.abs(b))))
    return worst, 0.0, 1e-8


@check("debranges.equality")
def _equality():
    worst = 0.0
    x = np.linspace(-30, 30, 1000) + 1e-3
    for sp in (db.PaleyWiener(1.0), db.Homogeneous(0.0)):
        for kind in ("truncated", "odd"):
            p = db.extremal_pair(sp, ms.ramp(2.0), kind)
            gap = np.asarray(p.majorant(x)).real - np.asarray(p.minorant(x)).real
            ref = p.gap_identity(x)
            worst = max(worst, float(np.max(np.abs(gap - ref) / (1 + np.abs(ref)))))
    return worst, 0.0, 1e-8


@check("debranges.one_sided", mode="lower")
def _one_sided():
    lo = math.inf
    x = np.concatenate([np.linspace(-40, 40, 4001), np.geomspace(1e-8, 1e-2, 30), -np.geomspace(1e-8, 1e-2, 30)])
    for sp in (db.PaleyWiener(1.0), db.Homogeneous(0.0)):
        for m in (ms.dirac(0.0), ms.ramp(2.0)):
            for kind in ("truncated", "odd"):
                p = db.extremal_pair(sp, m, kind)
                f = p.target(x)
                lo = min(lo, float(np.min(f - np.asarray(p.minorant(x)).real)),
                         float(np.min(np.asarray(p.majorant(x)).real - f)))
    return lo, 0.0, 1e-9


@check("debranges.delta_nu")
def _delta():
    worst = 0.0
    for nu in (-0.5, 0.0, 0.5, 1.0):
        for d in (1.0, 2.0, 2 * math.pi):
            a, b = db.delta_nu(nu, d), db.delta_nu_reconstructed(nu, d)
            worst = max(worst, abs(a - b) / abs(a))
    return worst, 0.0, 1e-6


@check("debranges.corollary_gap")
def _cor():
    sp = db.PaleyWiener(1.0)
    m = ms.ramp(2.0)
    return db.majorant_integral(sp, m) - db.minorant_integral(sp, m), math.pi, 1e-8


# ---------------------------------------------------------------------------
# circle

def _thetas():
    return (opuc.lebesgue(), opuc.jacobi(1.0, 1.0))


@check("opuc.orthonormality")
def _orth():
    worst = 0.0
    for th in _thetas():
        b = opuc.opuc_basis(th, 24)
        G = np.array([[opuc.inner(th, p, q) for q in b.phi] for p in b.phi])
        worst = max(worst, float(np.max(np.abs(G - np.eye(len(G))))))
    return worst, 0.0, 1e-8


@check("opuc.parseval")
def _parseval():
    rng = np.random.default_rng(7)
    worst = 0.0
    for th in _thetas():
        b = opuc.opuc_basis(th, 16)
        Q = rng.normal(size=17) + 1j * rng.normal(size=17)
        lhs = opuc.inner(th, Q, Q).real
        rhs = sum(abs(opuc.inner(th, Q, p)) ** 2 for p in b.phi[:17])
        worst = max(worst, abs(lhs - rhs) / lhs)
    return worst, 0.0, 1e-8


@check("opuc.ladder")
def _ladder():
    worst = 0.0
    for th in _thetas():
        for N in (4, 16, 32):
            r = opuc.quadrature_rule(opuc.opuc_basis(th, N), "B")
            k = np.arange(0, N + 1)
            q = np.exp(2j * np.pi * np.outer(k, r.nodes)) @ r.weights
            exact = np.conj(th.moments(N)[N:])
            worst = max(worst, float(np.max(np.abs(q - exact))))
    return worst, 0.0, 1e-8


@check("opuc.nodes")
def _nodes():
    bad = 0.0
    for th in _thetas():
        for N in (0, 3, 17, 32):
            r = opuc.quadrature_rule(opuc.opuc_basis(th, N), "B")
            bad += float(r.nodes[0] != 0.0) + float(np.any(r.weights <= 0)) + float(abs(r.weights.sum() - 1) > 1e-9)
            bad += float(len(r.nodes) != N + 1)
    return bad, 0.0, 0.0


@check("opuc.szego")
def _szego():
    th = opuc.jacobi(1.0, 1.0)
    b = opuc.opuc_basis(th, 12)
    monic = opuc.szego_recursion(b.verblunsky(), 12)
    ref = b.phi[12] / b.phi[12][-1]
    return float(np.max(np.abs(monic - ref))), 0.0, 1e-10


# ---------------------------------------------------------------------------
# periodic

@check("periodic.sawtooth")
def _saw():
    th = opuc.lebesgue()
    worst = 0.0
    for N in range(1, 17):
        p = per.periodic_extremal(th, ms.dirac(0.0), N, "odd", grid=2000)
        worst = max(worst, abs(p.majorant.integral(th) - 1 / (N + 1)), abs(p.minorant.integral(th) + 1 / (N + 1)),
                    abs(float(p.majorant(0.0)) - 1), abs(float(p.minorant(0.0)) + 1))
    return worst, 0.0, 1e-10


@check("periodic.one_sided", mode="lower")
def _per_one():
    lo = math.inf
    for th in _thetas():
        for m, kind in ((ms.ramp(2.0), "truncated"), (ms.ramp(2.0), "odd"), (ms.exponential().shifted(0.5), "truncated")):
            for N in (0, 5, 12):
                p = per.periodic_extremal(th, m, N, kind, verify=True)
                lo = min(lo, p.check["min_gap_minorant"], p.check["min_gap_majorant"])
    return lo, 0.0, 1e-8


@check("periodic.theorem_sums")
def _per_sums():
    th = opuc.jacobi(1.0, 1.0)
    p = per.periodic_extremal(th, ms.ramp(2.0), 12, "truncated")
    s = p.theorem_sums()
    return max(abs(p.minorant.integral(th) - s[0]), abs(p.majorant.integral(th) - s[1])), 0.0, 1e-8


@check("periodic.poisson")
def _per_poisson():
    rep = per.poisson_crosscheck(opuc.lebesgue(), ms.ramp(2.0), 8, "truncated", grid=2000)
    return max(rep.max_dev_minorant, rep.max_dev_majorant), 0.0, 1e-6


# ---------------------------------------------------------------------------
# plumbing

@check("cli.deterministic")
def _det():
    from . import cli
    r = opuc.quadrature_rule(opuc.opuc_basis(opuc.jacobi(1.0, 1.0), 8), "B")
    a = cli.dumps_json({"nodes": r.nodes, "weights": r.weights}) + r.to_csv()
    r2 = opuc.quadrature_rule(opuc.opuc_basis(opuc.jacobi(1.0, 1.0), 8), "B")
    b = cli.dumps_json({"nodes": r2.nodes, "weights": r2.weights}) + r2.to_csv()
    return float(a != b), 0.0, 0.0


def _run_one(name: str, tol_scale: float) -> CheckResult:
    fn, mode = _REGISTRY[name]
    t0 = time.perf_counter()
    try:
        value, expected, tol = fn()
    except Exception as exc:  # a crashing check is a failed check
        return CheckResult(name, "fail", math.nan, math.nan, math.nan, time.perf_counter() - t0,
                           f"{type(exc).__name__}: {exc}")
    tol_eff = tol * tol_scale
    if mode == "lower":
        ok = value >= expected - tol_eff
    else:
        ok = abs(value - expected) <= tol_eff
    return CheckResult(name, "pass" if ok else "fail", float(value), float(expected), float(tol_eff),
                       time.perf_counter() - t0)


def thread_cap() -> int:
    raw = os.environ.get("EXTREMAL_KIT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run(only: list[str] | None = None, tol_scale: float = 1.0, skip: list[str] | None = None) -> VerifyReport:
    chosen = select(only)
    skip = set(skip or ())
    todo = [n for n in chosen if n not in skip]
    with ThreadPoolExecutor(max_workers=thread_cap()) as ex:
        results = dict(zip(todo, ex.map(lambda n: _run_one(n, tol_scale), todo)))
    rep = VerifyReport()
    for n in chosen:
        rep.checks.append(results[n] if n in results else CheckResult(n, "skip", math.nan, math.nan, math.nan))
    return rep
