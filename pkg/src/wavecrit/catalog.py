"""Closed-form critical exponents and critical curves.

Exponents that are roots of quadratics are kept as exact elements
``p + q*sqrt(r)`` of a real quadratic field so that comparisons on a critical
point never depend on floating-point ties.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .exponents import as_fraction

STABLE, CRITICAL, UNSTABLE = "stable-side", "critical", "unstable-side"


def _squarefree(r: int) -> tuple[int, int]:
    """Split r = k^2 * m with m squarefree; returns (k, m)."""
    k, m, f = 1, r, 2
    while f * f <= m:
        while m % (f * f) == 0:
            m //= f * f
            k *= f
        f += 1
    return k, m


@dataclass(frozen=True)
class QuadSurd:
    """Exact ``p + q * sqrt(r)`` with rational p, q and squarefree r >= 1."""

    p: Fraction
    q: Fraction = Fraction(0)
    r: int = 1

    def __post_init__(self):
        p, q, r = as_fraction(self.p), as_fraction(self.q), int(self.r)
        if r < 1:
            raise ValueError("radicand must be positive")
        k, m = _squarefree(r)
        q *= k
        if m == 1:
            p, q = p + q, Fraction(0)
        if q == 0:
            m = 1
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "r", m)

    @classmethod
    def lift(cls, x) -> "QuadSurd":
        return x if isinstance(x, QuadSurd) else cls(as_fraction(x))

    def _common(self, other) -> tuple["QuadSurd", "QuadSurd", int]:
        other = QuadSurd.lift(other)
        if self.r == 1:
            return self, other, other.r
        if other.r in (1, self.r):
            return self, other, self.r
        raise ValueError("elements of different quadratic fields")

    def __add__(self, other):
        a, b, r = self._common(other)
        return QuadSurd(a.p + b.p, a.q + b.q, r)

    __radd__ = __add__

    def __neg__(self):
        return QuadSurd(-self.p, -self.q, self.r)

    def __sub__(self, other):
        return self + (-QuadSurd.lift(other))

    def __rsub__(self, other):
        return QuadSurd.lift(other) - self

    def __mul__(self, other):
        a, b, r = self._common(other)
        return QuadSurd(a.p * b.p + a.q * b.q * r, a.p * b.q + a.q * b.p, r)

    __rmul__ = __mul__

    def inverse(self) -> "QuadSurd":
        norm = self.p * self.p - self.q * self.q * self.r
        if norm == 0:
            raise ZeroDivisionError("zero surd")
        return QuadSurd(self.p / norm, -self.q / norm, self.r)

    def __truediv__(self, other):
        return self * QuadSurd.lift(other).inverse()

    def __rtruediv__(self, other):
        return QuadSurd.lift(other) * self.inverse()

    def sign(self) -> int:
        sp = (self.p > 0) - (self.p < 0)
        sq = (self.q > 0) - (self.q < 0)
        if sq == 0 or sp == sq:
            return sp if sp else sq
        if sp == 0:
            return sq
        # opposite signs: compare p^2 against q^2 r
        diff = self.p * self.p - self.q * self.q * self.r
        return sp * ((diff > 0) - (diff < 0))

    def _cmp(self, other) -> int:
        return (self - other).sign()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __eq__(self, other):
        if not isinstance(other, (QuadSurd, Fraction, int)):
            return NotImplemented
        return self._cmp(other) == 0

    def __hash__(self):
        return hash((self.p, self.q, self.r))

    def __float__(self):
        return float(self.p) + float(self.q) * math.sqrt(self.r)

    def __repr__(self):
        if self.q == 0:
            return f"QuadSurd({self.p})"
        return f"QuadSurd({self.p} + {self.q}*sqrt({self.r}))"


def _positive_root(a, b, c) -> QuadSurd:
    """Larger root of a x^2 + b x + c = 0 (a > 0, real roots)."""
    a, b, c = (as_fraction(v) for v in (a, b, c))
    disc = b * b - 4 * a * c
    if disc < 0:
        raise ValueError("no real root")
    # sqrt(num/den) = sqrt(num*den)/den
    rad = disc.numerator * disc.denominator
    return QuadSurd(-b / (2 * a), Fraction(1, 2 * a * disc.denominator), rad)


def _check_n(n: int):
    if n < 2:
        raise ValueError("dimension must be at least 2")


def strauss_exponent(n: int) -> QuadSurd:
    """Positive root of (n-1) q^2 - (n+1) q - 2 = 0."""
    _check_n(n)
    return _positive_root(n - 1, -(n + 1), -2)


def glassey_exponent(n: int) -> Fraction:
    _check_n(n)
    return 1 + Fraction(2, n - 1)


def dv_exponent(n: int) -> QuadSurd:
    """Root of q(q-1)(n+1)/2 = 1; in two dimensions the tail cap moves it to 3/2."""
    _check_n(n)
    if n == 2:
        return QuadSurd(Fraction(3, 2))
    return _positive_root(n + 1, -(n + 1), -2)


def _trichotomy(*slacks) -> str:
    """Stable if every slack is positive, unstable if any is negative."""
    signs = [QuadSurd.lift(s).sign() for s in slacks]
    if any(s < 0 for s in signs):
        return UNSTABLE
    if all(s > 0 for s in signs):
        return STABLE
    return CRITICAL


def _q(x):
    return QuadSurd.lift(x)


def two_strauss_on_curve(q1, q2, n: int) -> str:
    """Position relative to max((q1+2+1/q2), (q2+2+1/q1))/(q1 q2 - 1) = (n-1)/2.

    ``above`` is the stable side.
    """
    _check_n(n)
    q1, q2 = _q(q1), _q(q2)
    if q1 <= 1 or q2 <= 1:
        raise ValueError("powers must exceed 1")
    den = q1 * q2 - 1
    m = max((q1 + 2 + 1 / q2) / den, (q2 + 2 + 1 / q1) / den)
    c = (m - Fraction(n - 1, 2)).sign()
    return {-1: "above", 0: "on", 1: "below"}[c]


def two_strauss_curve(q1, q2, n: int) -> str:
    return {"above": STABLE, "on": CRITICAL, "below": UNSTABLE}[two_strauss_on_curve(q1, q2, n)]


def strauss_glassey_scalar_curve(q1, q2, n: int) -> str:
    """Box phi = |d_t phi|^q1 + |phi|^q2.

    Stable side: q1 above the Glassey exponent, q2 above the Strauss exponent,
    and (q2-1)((n-1) q1 - 2) > 4.  Stated for n = 2, 3.
    """
    _check_n(n)
    q1, q2 = _q(q1), _q(q2)
    return _trichotomy(q1 - glassey_exponent(n), q2 - strauss_exponent(n),
                       (q2 - 1) * ((n - 1) * q1 - 2) - 4)


def strauss_glassey_system_curve(q1, q2, n: int) -> str:
    """Box phi1 = |phi2|^q1, Box phi2 = |d_t phi1|^q2.

    With a = A(q1-1)-1, b = A(q2-1)-1 and A = (n-1)/2: for a > 0 the curve is
    q2(a+1) - 1 - q2 + q1 q2 b = 0; for a < 0 the growth of phi1 at null
    infinity is -a and the curve becomes q1 q2 (b + q2 a) = 1 together with
    b + q2 a > 0.
    """
    _check_n(n)
    q1, q2 = _q(q1), _q(q2)
    A = Fraction(n - 1, 2)
    a, b = A * (q1 - 1) - 1, A * (q2 - 1) - 1
    sa = a.sign()
    if sa > 0:
        return _trichotomy(q2 * (a + 1) - 1 - q2 + q1 * q2 * b)
    if sa < 0:
        return _trichotomy(b + q2 * a, q1 * q2 * (b + q2 * a) - 1)
    # a = 0: both branch formulas meet here
    return _trichotomy(q2 - 1 - q2 + q1 * q2 * b, q1 * q2 * b - 1, 0)


def strauss_null_curve(q1, q2, n: int) -> str:
    """Box phi = |psi|^q1, Box psi = |d_t phi|^((n+1)/(n-1)) + |phi|^q2.

    In three dimensions the curve is q1 q2 = 2 q2 + 3.  With a, b as for the
    Strauss pair: a > 0 is needed for phi to stay bounded at null infinity;
    for b >= 0 the derivative coupling adds q1 >= 1 + 4n/(n^2-1) and
    (n-1)/2 (q1 q2 - 1) - 2 q2 > 2; for b < 0 the curve is q2(a - 1 + q1 b) = 1.
    """
    _check_n(n)
    q1, q2 = _q(q1), _q(q2)
    A = Fraction(n - 1, 2)
    a, b = A * (q1 - 1) - 1, A * (q2 - 1) - 1
    if b.sign() >= 0:
        return _trichotomy(a, Fraction(n + 1, n - 1) * a - 1,
                           A * (q1 * q2 - 1) - 2 * q2 - 2)
    return _trichotomy(a, q2 * (a - 1 + q1 * b) - 1)


def kitamura_condition(q, alpha, beta, n: int) -> str:
    """Box phi = t^alpha u^beta |d_t phi|^q."""
    _check_n(n)
    q, alpha, beta = _q(q), as_fraction(alpha), as_fraction(beta)
    first = (q - 1) * Fraction(n - 1, 2) - 1 - alpha
    return _trichotomy(first, q * first + q - 1 - beta)


def initial_tail_condition(q1, q_data, n: int) -> str:
    """Box phi = |phi|^q1 with data whose radiation field decays like u^(1-q_data)."""
    _check_n(n)
    q1, qd = _q(q1), _q(q_data)
    if qd < 1:
        raise ValueError("tail exponent below 1 is outside the stated domain")
    A = Fraction(n - 1, 2)
    a = A * (q1 - 1) - 1
    lead = min(a, qd - 1)
    return _trichotomy(a, (a - lead - 1) + q1 * lead)


CURVES = {
    "two_strauss": two_strauss_curve,
    "strauss_glassey_scalar": strauss_glassey_scalar_curve,
    "strauss_glassey_system": strauss_glassey_system_curve,
    "strauss_null": strauss_null_curve,
}

EXPONENTS = {
    "strauss": strauss_exponent,
    "glassey": glassey_exponent,
    "dv": dv_exponent,
}
