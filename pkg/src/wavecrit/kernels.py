"""Exact solution formulas for the inhomogeneous wave equation in 1+1 dimensions.

In double-null coordinates u = (t-r)/2, v = (t+r)/2 the spherically symmetric
wave equation for psi = r*phi reads d_u d_v psi = F.  With vanishing data and
psi = 0 on the axis u = v,

    psi(u, v)   = int_{u0}^{u} du' int_{u}^{v} dv' F(u', v')
    d_v psi     = int_{u0}^{u} F(u', v) du'
    d_u psi     = int_{u}^{v} F(u, v') dv' - int_{u0}^{u} F(u', u) du'

for F supported in {u > u0}.  These serve as the oracle for the simulator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple

import numpy as np

from .exponents import as_fraction

_GL_HI = np.polynomial.legendre.leggauss(20)
_GL_LO = np.polynomial.legendre.leggauss(10)


@dataclass(frozen=True)
class ForcingSpec:
    """Forcing ``c v^{-sigma} u^{-z}`` on ``u > u0``, or an arbitrary closure.

    A closure must accept broadcastable numpy arrays ``(u, v)``.
    """

    c: float = 1.0
    sigma: float = 0.0
    z: float = 0.0
    u0: float = 1.0
    func: Callable | None = None

    @property
    def parametric(self) -> bool:
        return self.func is None

    def __call__(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if self.func is not None:
            return np.where(u > self.u0, self.func(u, v), 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = self.c * np.power(v, -self.sigma) * np.power(u, -self.z)
        return np.where(u > self.u0, val, 0.0)

    def closure(self) -> "ForcingSpec":
        """Same forcing routed through the quadrature path."""
        if self.func is not None:
            return self
        c, s, z = self.c, self.sigma, self.z
        return ForcingSpec(u0=self.u0, func=lambda u, v: c * v ** (-s) * u ** (-z))


ZERO = ForcingSpec(c=0.0)


# ---------------------------------------------------------------------------
# adaptive Gauss-Legendre on geometric panels


def _breakpoints(a: float, b: float) -> np.ndarray:
    """Panels of bounded length ratio so power laws are resolved on each."""
    if b <= a:
        return np.array([a, b])
    pts = [a]
    x = a
    while x < b:
        step = max(abs(x), 1.0)
        x = min(b, x + step)
        pts.append(x)
    return np.asarray(pts)


def _panel(f, a, b, rule):
    x, w = rule
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    vals = f(mid + half * x)
    return half * (vals @ w)


def integrate(f: Callable, a: float, b: float, rtol: float = 1e-10,
              max_depth: int = 40):
    """Integral of a vectorized ``f`` over ``[a, b]``.

    ``f`` maps an array of nodes to an array whose last axis runs over the
    nodes, so vector-valued integrands are supported.  Each panel is accepted
    when the 20-point and 10-point Gauss-Legendre rules agree.
    """
    if b == a:
        return 0.0 * _panel(f, a, a + 1.0, _GL_LO)
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    edges = _breakpoints(a, b)
    stack = [(lo, hi, 0) for lo, hi in zip(edges[:-1], edges[1:])]
    pending = []
    while stack:
        lo, hi, depth = stack.pop()
        hi_val = _panel(f, lo, hi, _GL_HI)
        lo_val = _panel(f, lo, hi, _GL_LO)
        err = np.max(np.abs(hi_val - lo_val))
        scale = np.max(np.abs(hi_val))
        if err <= rtol * scale + 1e-300 or depth >= max_depth:
            pending.append(hi_val)
        else:
            mid = 0.5 * (lo + hi)
            stack.append((lo, mid, depth + 1))
            stack.append((mid, hi, depth + 1))
    return sign * sum(pending)


def _power_integral(p: float, a: float, b: float) -> float:
    """int_a^b x^{-p} dx for 0 < a <= b."""
    if p == 1:
        return math.log(b / a)
    return (b ** (1 - p) - a ** (1 - p)) / (1 - p)


def _check(F: ForcingSpec, u: float, v: float) -> bool:
    """False when the parametric integrand is not integrable at u0 = 0."""
    if u > v:
        raise ValueError("kernel needs u <= v")
    return not (F.parametric and F.u0 <= 0 and F.z >= 1 and u > F.u0)


def kernel_value(F: ForcingSpec, u: float, v: float, rtol: float = 1e-8,
                 exact: bool = True) -> float:
    """psi(u, v); ``exact=False`` forces quadrature for parametric forcings.

    Returns ``inf`` when a parametric forcing is not integrable.
    """
    if not _check(F, u, v):
        return math.inf
    lo = F.u0
    if u <= lo:
        return 0.0
    if F.parametric and exact:
        if F.c == 0:
            return 0.0
        return F.c * _power_integral(F.z, lo, u) * _power_integral(F.sigma, u, v)

    def outer(U):
        inner = integrate(lambda V: F(U[:, None], V[None, :]), u, v, rtol=rtol * 1e-2)
        return inner

    return float(integrate(outer, lo, u, rtol=rtol))


def kernel_dv(F: ForcingSpec, u: float, v: float, rtol: float = 1e-8,
              exact: bool = True) -> float:
    if not _check(F, u, v):
        return math.inf
    if u <= F.u0:
        return 0.0
    if F.parametric and exact:
        return F.c * v ** (-F.sigma) * _power_integral(F.z, F.u0, u)
    return float(integrate(lambda U: F(U, v), F.u0, u, rtol=rtol))


def kernel_du(F: ForcingSpec, u: float, v: float, rtol: float = 1e-8,
              exact: bool = True) -> float:
    if not _check(F, u, v):
        return math.inf
    if u <= F.u0:
        return 0.0
    if F.parametric and exact:
        return F.c * (u ** (-F.z) * _power_integral(F.sigma, u, v)
                      - u ** (-F.sigma) * _power_integral(F.z, F.u0, u))
    along_v = integrate(lambda V: F(u, V), u, v, rtol=rtol)
    along_u = integrate(lambda U: F(U, u), F.u0, u, rtol=rtol)
    return float(along_v - along_u)


# ---------------------------------------------------------------------------
# rate predictions


class Rates(NamedTuple):
    psi: float
    dv: float
    du: float


def lemma_rates(sigma: float, z: float) -> Rates:
    """Growth exponents along r/t fixed for forcing v^{-sigma} u^{-z}.

    psi ~ t^{1 - sigma + max(0, 1-z)} and d_v psi ~ t^{-sigma + max(0, 1-z)};
    d_u psi picks up the larger of that and the boundary term t^{1-sigma-z}.
    """
    gain = max(0.0, 1.0 - z)
    return Rates(1 - sigma + gain, -sigma + gain, max(-sigma + gain, 1 - sigma - z))


def null_rates(sigma: float) -> Rates:
    """Growth exponents along u fixed, v -> infinity."""
    return Rates(max(0.0, 1 - sigma), -sigma, 0.0)


class TailBound(NamedTuple):
    t_rate: int
    u_rate: Fraction
    log: bool


def lower_bound_tail(c, q, s, u0=1) -> TailBound:
    """Tail from forcing ``c v^{-q} u^{-s}``: phi >~ t^{-1} u^{-(q - 1 - max(1 - s, 0))}.

    Logarithms appear when q = 1 or s = 1.
    """
    if c <= 0:
        raise ValueError("amplitude must be positive")
    q, s = as_fraction(q), as_fraction(s)
    return TailBound(1, q - 1 - max(1 - s, Fraction(0)), q == 1 or s == 1)


class JohnBound(NamedTuple):
    alpha: Fraction  # supremum of admissible v-rates (exclusive)
    beta: Fraction
    log: bool


def john_bound(gamma, delta, n: int) -> JohnBound:
    """Interior decay for forcing ~ v^{-gamma} u^{-delta}: beta = gamma - (n+3)/2 + min(1, delta)."""
    gamma, delta = as_fraction(gamma), as_fraction(delta)
    beta = gamma - Fraction(n + 3, 2) + min(Fraction(1), delta)
    return JohnBound(Fraction(n - 1, 2), beta, delta == 1)
