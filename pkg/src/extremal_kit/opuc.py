"""Orthogonal polynomials on the unit circle, their kernels and quadrature.

Polynomials are coefficient arrays in ascending order.  For a probability
measure theta on R/Z the monic orthogonal polynomials come from the Toeplitz
moment system, with moments m_k = integral of e(-k x) d theta(x).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.typing import NDArray
from scipy import integrate as sint
from scipy import special as sps

from . import numerics as nm


class CircleMeasureError(ValueError):
    """Malformed circle measure."""


class TrivialMeasureError(ValueError):
    """The measure is supported on too few points for the requested degree."""


@dataclass(frozen=True)
class CircleMeasure:
    """Probability measure on R/Z: atoms plus an optional density.

    ``density`` is ``"lebesgue"`` or ``"jacobi"``; the Jacobi family is
    proportional to (1 - cos 2 pi x)^a (1 + cos 2 pi x)^b and is normalised
    to carry ``density_mass``.
    """

    atoms: tuple = ()
    density: str | None = None
    params: tuple = ()
    density_mass: float = 0.0

    def __post_init__(self):
        for xi, mass in self.atoms:
            if not 0 <= xi < 1:
                raise CircleMeasureError(f"atom location {xi} outside [0, 1)")
            if not mass > 0:
                raise CircleMeasureError("atom masses must be positive")
        if self.density not in (None, "lebesgue", "jacobi"):
            raise CircleMeasureError(f"unknown density {self.density!r}")
        if self.density == "jacobi":
            if len(self.params) != 2 or min(self.params) <= -0.5:
                raise CircleMeasureError("jacobi needs two exponents greater than -1/2")
        if self.density is not None and not self.density_mass > 0:
            raise CircleMeasureError("density mass must be positive")
        total = self.density_mass + sum(m for _, m in self.atoms)
        if abs(total - 1.0) > 1e-10:
            raise CircleMeasureError(f"total mass {total!r} is not 1")

    def __str__(self):
        parts = [f"atom({xi:g},{m:g})" for xi, m in self.atoms]
        if self.density == "lebesgue":
            parts.append(f"{self.density_mass:g}*lebesgue")
        elif self.density == "jacobi":
            parts.append(f"{self.density_mass:g}*jacobi({self.params[0]:g},{self.params[1]:g})")
        return " + ".join(parts)

    @property
    def support_size(self) -> float:
        return math.inf if self.density else len(self.atoms)

    def _jacobi_norm(self) -> float:
        a, b = self.params
        return 2.0 ** (a + b) * sps.beta(a + 0.5, b + 0.5) / math.pi

    def pdf(self, x):
        """Density of the absolutely continuous part (zero if absent)."""
        x = np.asarray(x, dtype=float)
        if self.density is None:
            return np.zeros_like(x)
        if self.density == "lebesgue":
            return np.full_like(x, self.density_mass)
        a, b = self.params
        c = np.cos(2 * np.pi * x)
        return self.density_mass * (1 - c) ** a * (1 + c) ** b / self._jacobi_norm()

    def moment(self, k: int) -> complex:
        return _moment(self, int(k))

    def moments(self, K: int) -> NDArray:
        """m_{-K}, ..., m_K as an array indexed by k + K."""
        pos = np.array([self.moment(k) for k in range(K + 1)])
        return np.concatenate([np.conj(pos[:0:-1]), pos])

    def integrate(self, fn) -> complex:
        """Integral of fn against theta (fn takes arrays of x in [0, 1))."""
        tot = sum(m * complex(np.asarray(fn(np.array([xi])))[0]) for xi, m in self.atoms)
        if self.density is not None:
            re = sint.quad(lambda x: float(np.real(fn(np.array([x]))[0]) * self.pdf(x)), 0, 1,
                           points=[0.5], limit=400, epsabs=1e-14, epsrel=1e-12)[0]
            im = sint.quad(lambda x: float(np.imag(fn(np.array([x]))[0]) * self.pdf(x)), 0, 1,
                           points=[0.5], limit=400, epsabs=1e-14, epsrel=1e-12)[0]
            tot += re + 1j * im
        return tot


@lru_cache(maxsize=4096)
def _moment(theta: CircleMeasure, k: int) -> complex:
    if k < 0:
        return complex(np.conj(_moment(theta, -k)))
    val = sum(m * complex(nm.e(-k * xi)) for xi, m in theta.atoms)
    if theta.density == "lebesgue":
        val += theta.density_mass if k == 0 else 0.0
    elif theta.density == "jacobi":
        # the density is even about 0 and 1/2, so the moment is real; on
        # [0, 1/2] it is x^{2a} (1/2 - x)^{2b} times a smooth factor
        a, b = theta.params

        def smooth(x):
            s0 = 2.0 * (np.pi * np.sinc(x)) ** 2
            s1 = 2.0 * (np.pi * np.sinc(0.5 - x)) ** 2
            return s0 ** a * s1 ** b * np.cos(2 * np.pi * k * x)

        re = sint.quad(smooth, 0.0, 0.5, weight="alg", wvar=(2 * a, 2 * b), limit=400,
                       epsabs=1e-14, epsrel=1e-12)[0]
        val += 2.0 * theta.density_mass * re / theta._jacobi_norm()
    return complex(val)


def lebesgue() -> CircleMeasure:
    return CircleMeasure(density="lebesgue", density_mass=1.0)


def jacobi(a: float, b: float, mass: float = 1.0, atoms=()) -> CircleMeasure:
    return CircleMeasure(atoms=tuple(atoms), density="jacobi", params=(float(a), float(b)), density_mass=mass)


def parse_circle_text(text: str) -> CircleMeasure:
    """Lines ``atom <xi> <mass>``, ``density jacobi <a> <b> [mass]`` or ``density lebesgue [mass]``.

    A density without explicit mass takes whatever the atoms leave.
    """
    atoms, dens, params, dmass = [], None, (), None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            if tok[0] == "atom" and len(tok) == 3:
                atoms.append((float(tok[1]), float(tok[2])))
            elif tok[0] == "density" and len(tok) >= 2 and tok[1] == "lebesgue" and len(tok) <= 3:
                dens = "lebesgue"
                dmass = float(tok[2]) if len(tok) == 3 else None
            elif tok[0] == "density" and len(tok) >= 4 and tok[1] == "jacobi" and len(tok) <= 5:
                dens, params = "jacobi", (float(tok[2]), float(tok[3]))
                dmass = float(tok[4]) if len(tok) == 5 else None
            else:
                raise CircleMeasureError(f"cannot parse line {raw!r}")
        except ValueError as exc:
            if isinstance(exc, CircleMeasureError):
                raise
            raise CircleMeasureError(f"bad number in line {raw!r}") from None
    if dens is not None and dmass is None:
        dmass = 1.0 - sum(m for _, m in atoms)
    return CircleMeasure(tuple(atoms), dens, params, dmass or 0.0)


def to_text(theta: CircleMeasure) -> str:
    lines = [f"atom {xi!r} {m!r}" for xi, m in theta.atoms]
    if theta.density == "lebesgue":
        lines.append(f"density lebesgue {theta.density_mass!r}")
    elif theta.density == "jacobi":
        lines.append(f"density jacobi {theta.params[0]!r} {theta.params[1]!r} {theta.density_mass!r}")
    return "\n".join(lines) + "\n"


def parse_theta_spec(spec: str) -> CircleMeasure:
    """``lebesgue``, ``jacobi:a,b`` or ``@path`` to a text file."""
    spec = spec.strip()
    if spec.startswith("@"):
        with open(spec[1:], encoding="utf-8") as fh:
            return parse_circle_text(fh.read())
    name, _, rest = spec.partition(":")
    if name == "lebesgue" and not rest:
        return lebesgue()
    if name == "jacobi":
        try:
            a, b = (float(v) for v in rest.split(","))
        except ValueError:
            raise CircleMeasureError(f"jacobi needs two exponents: {spec!r}") from None
        return jacobi(a, b)
    raise CircleMeasureError(f"unknown circle measure {spec!r}")


# ---------------------------------------------------------------------------
# polynomials

def conjugate_poly(Q, n: int) -> NDArray:
    """Q^{*,n}(z) = z^n conj(Q(1/conj z)): pad to degree n, reverse, conjugate."""
    q = np.asarray(Q, dtype=complex)
    q = np.trim_zeros(q, "b") if np.any(q) else np.zeros(1, dtype=complex)
    if len(q) - 1 > n:
        raise ValueError(f"degree {len(q) - 1} exceeds {n}")
    return np.conj(np.pad(q, (0, n + 1 - len(q)))[::-1])


def inner(theta: CircleMeasure, Q, R) -> complex:
    """<Q, R> = integral of Q(e(x)) conj(R(e(x))) d theta."""
    q = np.asarray(Q, dtype=complex)
    r = np.asarray(R, dtype=complex)
    K = max(len(q), len(r))
    mom = theta.moments(K)
    i = np.arange(len(q))[:, None]
    j = np.arange(len(r))[None, :]
    return complex(np.sum(q[:, None] * np.conj(r)[None, :] * mom[(j - i) + K]))


@dataclass
class OpucBasis:
    theta: CircleMeasure
    N: int
    phi: list = field(repr=False)          # phi[n] ascending coefficients, n = 0..N+1
    monic_norms: NDArray = field(repr=False)

    def eval(self, n: int, z):
        return nm.poly_eval(self.phi[n], z)

    def phi_star(self, n: int | None = None) -> NDArray:
        n = self.N + 1 if n is None else n
        return conjugate_poly(self.phi[n], n)

    def verblunsky(self) -> NDArray:
        """alpha_n = -conj(Phi_{n+1}(0)) for n = 0..N."""
        return np.array([-np.conj(self.phi[n + 1][0] / self.phi[n + 1][-1]) for n in range(self.N + 1)])


def opuc_basis(theta: CircleMeasure, N: int) -> OpucBasis:
    """Orthonormal phi_0..phi_{N+1}, normalised so that phi_n(1) > 0."""
    if N < 0:
        raise ValueError("degree must be nonnegative")
    if theta.support_size <= N + 1:
        raise TrivialMeasureError(f"measure with {theta.support_size} support points is trivial for degree {N}")
    M = N + 1
    mom = theta.moments(M)
    phi, norms = [], []
    for n in range(M + 1):
        if n == 0:
            c = np.ones(1, dtype=complex)
        else:
            j = np.arange(n)[:, None]
            i = np.arange(n)[None, :]
            T = mom[(j - i) + M]
            rhs = -mom[(np.arange(n) - n) + M]
            try:
                sol = nm.solve_dense(T, rhs)
            except nm.SingularMatrixError as exc:
                raise TrivialMeasureError(f"moment matrix of order {n} is singular: {exc}") from None
            c = np.concatenate([sol, [1.0]]).astype(complex)
        nrm2 = float(np.real(np.sum(c * mom[(n - np.arange(n + 1)) + M])))
        if not nrm2 > 1e-12:
            raise TrivialMeasureError(f"monic polynomial of degree {n} has norm {nrm2:.3g}")
        v = c / math.sqrt(nrm2)
        at1 = complex(np.sum(v))
        v = v * (np.conj(at1) / abs(at1))
        phi.append(v)
        norms.append(math.sqrt(nrm2))
    return OpucBasis(theta, N, phi, np.array(norms))


def szego_recursion(alphas, n: int) -> NDArray:
    """Monic Phi_n from Verblunsky coefficients: Phi_{k+1} = z Phi_k - conj(alpha_k) Phi_k^*."""
    P = np.ones(1, dtype=complex)
    for k in range(n):
        Ps = conjugate_poly(P, k)
        P = np.concatenate([[0.0], P]) - np.conj(alphas[k]) * np.concatenate([Ps, [0.0]])
    return P


def cd_kernel(basis: OpucBasis, w, z):
    """K_N(w, z) by the Christoffel-Darboux formula; the sum form near the diagonal of the circle."""
    w = np.asarray(w, dtype=complex)
    z = np.asarray(z, dtype=complex)
    w, z = np.broadcast_arrays(w, z)
    n = basis.N + 1
    ph, ps = basis.phi[n], basis.phi_star(n)
    den = 1.0 - np.conj(w) * z
    near = np.abs(den) < 1e-6
    out = np.empty(z.shape, dtype=complex)
    if np.any(~near):
        zz, ww = z[~near], w[~near]
        num = (nm.poly_eval(ps, zz) * np.conj(nm.poly_eval(ps, ww))
               - nm.poly_eval(ph, zz) * np.conj(nm.poly_eval(ph, ww)))
        out[~near] = num / den[~near]
    if np.any(near):
        out[near] = cd_kernel_sum(basis, w[near], z[near])
    return out if out.ndim else out[()]


def cd_kernel_sum(basis: OpucBasis, w, z):
    """K_N(w, z) = sum_{j <= N} phi_j(z) conj(phi_j(w))."""
    w = np.asarray(w, dtype=complex)
    z = np.asarray(z, dtype=complex)
    return sum(basis.eval(j, z) * np.conj(basis.eval(j, w)) for j in range(basis.N + 1))


def cd_kernel_diag_circle(basis: OpucBasis, w):
    """Limit of the CD formula at z = w on the circle: w (phi' conj(phi) - phi*' conj(phi*))."""
    w = np.asarray(w, dtype=complex)
    n = basis.N + 1
    ph, ps = basis.phi[n], basis.phi_star(n)
    dph = np.polynomial.polynomial.polyder(ph)
    dps = np.polynomial.polynomial.polyder(ps)
    val = w * (nm.poly_eval(dph, w) * np.conj(nm.poly_eval(ph, w))
               - nm.poly_eval(dps, w) * np.conj(nm.poly_eval(ps, w)))
    return val.real


def companions(basis: OpucBasis) -> tuple[NDArray, NDArray]:
    """(A, B) = ((phi* + phi)/2, i(phi* - phi)/2) for phi = phi_{N+1}."""
    n = basis.N + 1
    ph, ps = basis.phi[n], basis.phi_star(n)
    return 0.5 * (ps + ph), 0.5j * (ps - ph)


@dataclass
class QuadratureRule:
    nodes: NDArray
    weights: NDArray
    N: int
    which: str
    basis: OpucBasis = field(repr=False)

    def to_csv(self) -> str:
        rows = ["node,weight"] + [f"{x:.17g},{w:.17g}" for x, w in zip(self.nodes, self.weights)]
        return "\n".join(rows) + "\n"


def quadrature_rule(basis: OpucBasis, which: str = "B") -> QuadratureRule:
    """Nodes at the circle zeros of the chosen companion, weights 1/K_N(node, node)."""
    A, B = companions(basis)
    if which not in ("A", "B"):
        raise ValueError("which is 'A' or 'B'")
    poly = B if which == "B" else A
    nodes = np.sort(nm.roots_on_circle(poly))
    if which == "B":
        # B(1) = 0 exactly; pin the node that rounding may have put at 1 - eps
        nodes = np.where(nodes > 1 - 1e-12, 0.0, nodes)
        nodes[np.abs(nodes) < 1e-12] = 0.0
        nodes = np.sort(nodes)
    z = nm.e(nodes)
    k = np.real(cd_kernel(basis, z, z))
    return QuadratureRule(nodes, 1.0 / k, basis.N, which, basis)


def quadrature_apply(rule: QuadratureRule, W) -> complex:
    """Sum of weight * W(node); W is a trigonometric polynomial of degree <= N."""
    deg = getattr(W, "N", None)
    if deg is not None and deg > rule.N:
        raise ValueError(f"degree {deg} exceeds the exactness degree {rule.N}")
    vals = np.asarray(W(rule.nodes))
    return complex(np.dot(rule.weights, vals))
