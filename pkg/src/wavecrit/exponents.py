"""Exact fixed-point algebra for decay-exponent systems.

Two equation shapes appear:

* min systems  x_i = min_t ( a_t , a_t + b_t + g_t * x_j(t) )
* max systems  s_i = max( 0 , max_t ( c_t + g_t * s_j(t) ) )

Everything is computed over ``fractions.Fraction``.  Monotone iteration is the
fast path; Fourier-Motzkin elimination on the associated inequality system is
the exact authority.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from graphlib import CycleError, TopologicalSorter
from typing import Iterable, Sequence

import gmpy2

Q = Fraction
_mpq = gmpy2.mpq


def _fraction(v) -> Fraction:
    return Fraction(int(v.numerator), int(v.denominator))


def as_fraction(value) -> Fraction:
    """Convert ints, Fractions, decimal strings and ``p/q`` strings exactly."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        # shortest repr round-trips, so 2.2 becomes 11/5 rather than a binary expansion
        return Fraction(repr(value))
    return Fraction(value)


@dataclass(frozen=True)
class MinTerm:
    """One entry pair ``min(alpha, alpha + beta + gamma * x[target])``.

    ``gamma == 0`` marks a pure constant ``min(alpha, alpha + beta)``; such
    terms never create dependency edges.
    """

    alpha: Fraction
    beta: Fraction
    gamma: Fraction
    target: int

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")

    @property
    def affine(self) -> bool:
        return self.gamma > 0

    def value(self, x: Sequence[Fraction]) -> Fraction:
        if not self.affine:
            return min(self.alpha, self.alpha + self.beta)
        return min(self.alpha, self.alpha + self.beta + self.gamma * x[self.target])


@dataclass(frozen=True)
class MinMaxSystem:
    equations: tuple[tuple[MinTerm, ...], ...]

    def __post_init__(self):
        eqs = tuple(tuple(eq) for eq in self.equations)
        object.__setattr__(self, "equations", eqs)
        for i, eq in enumerate(eqs):
            if not eq:
                raise ValueError(f"equation {i} has no terms")
            for term in eq:
                if not 0 <= term.target < len(eqs):
                    raise ValueError(f"equation {i} targets unknown index {term.target}")

    @property
    def d(self) -> int:
        return len(self.equations)

    def apply(self, x: Sequence[Fraction]) -> tuple[Fraction, ...]:
        return tuple(min(t.value(x) for t in eq) for eq in self.equations)

    def terms(self) -> Iterable[tuple[int, MinTerm]]:
        for i, eq in enumerate(self.equations):
            for t in eq:
                yield i, t


@dataclass(frozen=True)
class MaxTerm:
    """Candidate ``c + gamma * s[target]``; ``gamma == 0`` is a constant."""

    c: Fraction
    gamma: Fraction
    target: int

    def __post_init__(self):
        object.__setattr__(self, "c", as_fraction(self.c))
        object.__setattr__(self, "gamma", as_fraction(self.gamma))
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")

    def value(self, s: Sequence[Fraction]) -> Fraction:
        if self.gamma == 0:
            return self.c
        return self.c + self.gamma * s[self.target]


@dataclass(frozen=True)
class MaxSystem:
    equations: tuple[tuple[MaxTerm, ...], ...]

    def __post_init__(self):
        eqs = tuple(tuple(eq) for eq in self.equations)
        object.__setattr__(self, "equations", eqs)
        for i, eq in enumerate(eqs):
            for term in eq:
                if not 0 <= term.target < len(eqs):
                    raise ValueError(f"equation {i} targets unknown index {term.target}")

    @property
    def d(self) -> int:
        return len(self.equations)

    def apply(self, s: Sequence[Fraction]) -> tuple[Fraction, ...]:
        return tuple(max([Q(0)] + [t.value(s) for t in eq]) for eq in self.equations)


@dataclass
class FixedPointReport:
    status: str  # "solvable" | "unsolvable" | "undecided"
    solution: tuple[Fraction, ...] | None = None
    graph: list[tuple[int, int]] = field(default_factory=list)
    has_loop: bool = False
    robust: bool | None = None
    iterations_used: int = 0

    @property
    def solvable(self) -> bool:
        return self.status == "solvable"

    @property
    def decided(self) -> bool:
        return self.status != "undecided"


# ---------------------------------------------------------------------------
# scalar lemma


def solve_scalar_minmax(a, b, c) -> tuple[bool, Fraction | None]:
    """Solve ``x = a + min(0, b + c x)`` for ``c > 1``.

    A solution exists iff ``b + c a >= 0``, and it is then ``x = a``.
    """
    a, b, c = as_fraction(a), as_fraction(b), as_fraction(c)
    if c <= 1:
        raise ValueError("scalar lemma needs c > 1")
    if b + c * a >= 0:
        return True, a
    return False, None


def scalar_system(a, b, c) -> MinMaxSystem:
    """Embed the scalar lemma equation as a one-unknown min system."""
    return MinMaxSystem(((MinTerm(a, b, c, 0),),))


# ---------------------------------------------------------------------------
# Fourier-Motzkin over the rationals

Constraint = tuple[tuple[tuple[int, Fraction], ...], Fraction]  # sum a_v x_v <= b


def _normalize(coeffs: dict[int, Fraction], bound: Fraction) -> Constraint | None:
    coeffs = {v: a for v, a in coeffs.items() if a != 0}
    if not coeffs:
        return None if bound >= 0 else ((), _mpq(-1))
    scale = max(abs(a) for a in coeffs.values())
    return tuple(sorted((v, a / scale) for v, a in coeffs.items())), bound / scale


def _prune(constraints: Iterable[Constraint]) -> list[Constraint]:
    tightest: dict[tuple, Fraction] = {}
    for lhs, b in constraints:
        if lhs in tightest:
            tightest[lhs] = min(tightest[lhs], b)
        else:
            tightest[lhs] = b
    return [(lhs, b) for lhs, b in tightest.items()]


def _eliminate(constraints: list[Constraint], var: int) -> list[Constraint] | None:
    """Project out ``var``; returns None if a contradiction appears."""
    pos, neg, rest = [], [], []
    for lhs, b in constraints:
        a = dict(lhs).get(var, 0)
        (pos if a > 0 else neg if a < 0 else rest).append((dict(lhs), b, a))
    out: list[Constraint] = [(tuple(sorted(c.items())), b) for c, b, _ in rest]
    for (cp, bp, ap), (cn, bn, an) in itertools.product(pos, neg):
        combo: dict[int, Fraction] = {}
        for v in set(cp) | set(cn):
            combo[v] = cp.get(v, 0) * (-an) + cn.get(v, 0) * ap
        norm = _normalize(combo, bp * (-an) + bn * ap)
        if norm is None:
            continue
        if norm[0] == ():
            return None
        out.append(norm)
    return _prune(out)


def _min_constraints(sys: MinMaxSystem) -> list[Constraint]:
    # elimination runs on gmpy2 rationals; results convert back to Fraction
    one = _mpq(1)
    cons: list[Constraint] = []
    for i, t in sys.terms():
        alpha, beta, gamma = _mpq(t.alpha), _mpq(t.beta), _mpq(t.gamma)
        if not t.affine:
            cons.append((((i, one),), min(alpha, alpha + beta)))
            continue
        cons.append((((i, one),), alpha))
        coeffs = {i: one}
        coeffs[t.target] = coeffs.get(t.target, _mpq(0)) - gamma
        norm = _normalize(coeffs, alpha + beta)
        if norm is not None:
            cons.append(norm)
    return _prune(cons)


def _feasible(cons: list[Constraint], d: int) -> bool:
    if any(lhs == () for lhs, _ in cons):
        return False
    for var in range(d):
        cons = _eliminate(cons, var)
        if cons is None:
            return False
    return all(b >= 0 for _, b in cons)


def _coordinate_extreme(cons: list[Constraint], d: int, var: int, upper: bool) -> Fraction | None:
    """Sup (``upper``) or inf of coordinate ``var`` over a nonempty polyhedron."""
    for other in range(d):
        if other == var:
            continue
        cons = _eliminate(cons, other)
        if cons is None:
            raise ValueError("polyhedron is empty")
    bounds = []
    for lhs, b in cons:
        if not lhs:
            continue
        (_, a), = lhs
        if upper and a > 0:
            bounds.append(b / a)
        if not upper and a < 0:
            bounds.append(b / a)
    if not bounds:
        return None
    return _fraction(min(bounds) if upper else max(bounds))


def check_feasibility_exact(sys: MinMaxSystem) -> bool:
    """Exact decision: does ``x = F(x)`` have a solution?

    Because F is monotone, a fixed point exists iff ``x <= F(x)`` is
    feasible; that is a conjunction of two-variable linear inequalities.
    """
    return _feasible(_min_constraints(sys), sys.d)


def maximal_solution_exact(sys: MinMaxSystem) -> tuple[Fraction, ...] | None:
    """Greatest fixed point, coordinate by coordinate, or None if unsolvable."""
    cons = _min_constraints(sys)
    if not _feasible(cons, sys.d):
        return None
    x = tuple(_coordinate_extreme(cons, sys.d, i, upper=True) for i in range(sys.d))
    assert sys.apply(x) == x
    return x


# ---------------------------------------------------------------------------
# monotone iteration


def default_min_bound(sys: MinMaxSystem) -> Fraction:
    big = max([abs(t.alpha) for _, t in sys.terms()] or [Q(0)])
    bigb = max([abs(t.beta) for _, t in sys.terms()] or [Q(0)])
    return -10**4 * (1 + big + bigb) * sys.d


def build_dependency_graph(sys: MinMaxSystem, x: Sequence[Fraction]) -> list[tuple[int, int]]:
    """Edges ``(j, i)`` where equation i's minimum is attained by the affine entry on j.

    A tie between the constant and affine entries records the edge.
    """
    x = tuple(as_fraction(v) for v in x)
    if sys.apply(x) != x:
        raise ValueError("vector is not a solution of the system")
    edges = []
    for i, t in sys.terms():
        if t.affine and t.alpha + t.beta + t.gamma * x[t.target] == x[i]:
            edges.append((t.target, i))
    return sorted(set(edges))


def detect_loops(edges: Iterable[tuple[int, int]]) -> bool:
    ts = TopologicalSorter()
    for j, i in edges:
        if i == j:
            return True
        ts.add(i, j)
    try:
        ts.prepare()
    except CycleError:
        return True
    return False


def solve_min_system(sys: MinMaxSystem, max_iter: int = 1000, divergence_bound=None,
                     epsilon=None) -> FixedPointReport:
    """Monotone iteration from the constants; decreasing until fixed or divergent.

    ``undecided`` means the caller should consult :func:`check_feasibility_exact`.
    If ``epsilon`` is given the report also carries the robustness verdict.
    """
    bound = default_min_bound(sys) if divergence_bound is None else as_fraction(divergence_bound)
    bound = _mpq(bound)
    # iterate on gmpy2 rationals: (alpha, alpha + beta, gamma, target) per entry
    eqs = [[(_mpq(t.alpha), _mpq(t.alpha + t.beta), _mpq(t.gamma), t.target) for t in eq]
           for eq in sys.equations]
    x = [min(e[0] for e in eq) for eq in eqs]
    for it in range(1, max_iter + 1):
        nxt = [min(min(a, ab + g * x[j]) if g else min(a, ab) for a, ab, g, j in eq)
               for eq in eqs]
        assert all(a <= b for a, b in zip(nxt, x)), "iteration must be non-increasing"
        if nxt == x:
            x = tuple(_fraction(v) for v in x)
            graph = build_dependency_graph(sys, x)
            report = FixedPointReport("solvable", x, graph, detect_loops(graph), iterations_used=it)
            if epsilon is not None:
                report.robust = robustness_margin(sys, epsilon)
            return report
        if min(nxt) < bound:
            report = FixedPointReport("unsolvable", iterations_used=it)
            if epsilon is not None:
                report.robust = False
            return report
        x = nxt
    return FixedPointReport("undecided", iterations_used=max_iter)


def analyze_min_system(sys: MinMaxSystem, epsilon=None, max_iter: int = 1000) -> FixedPointReport:
    """Iteration with exact fallback; always decided."""
    report = solve_min_system(sys, max_iter=max_iter)
    if report.status == "solvable":
        if epsilon is not None:
            report.robust = robustness_margin(sys, epsilon)
        return report
    if report.status == "unsolvable":
        if epsilon is not None:
            report.robust = False
        return report
    x = maximal_solution_exact(sys)
    if x is None:
        return FixedPointReport("unsolvable", robust=False if epsilon is not None else None,
                                iterations_used=report.iterations_used)
    graph = build_dependency_graph(sys, x)
    out = FixedPointReport("solvable", x, graph, detect_loops(graph),
                           iterations_used=report.iterations_used)
    if epsilon is not None:
        out.robust = robustness_margin(sys, epsilon)
    return out


# ---------------------------------------------------------------------------
# robustness

CORNER_CAP = 24


def _perturbed(sys: MinMaxSystem, eps: Fraction, signs: Sequence[int]) -> MinMaxSystem:
    signs = iter(signs)
    eqs = []
    for eq in sys.equations:
        new = []
        for t in eq:
            if t.affine:
                g = max(Q(0), t.gamma + next(signs) * eps)
                new.append(MinTerm(t.alpha - eps, t.beta - eps, g, t.target))
            else:
                new.append(MinTerm(t.alpha - eps, t.beta, Q(0), t.target))
        eqs.append(tuple(new))
    return MinMaxSystem(tuple(eqs))


def robustness_margin(sys: MinMaxSystem, epsilon, seed: int = 0, samples: int = 256) -> bool:
    """Solvable for every coefficient perturbation of size ``epsilon``?

    Lowering alpha or beta lowers F, so those sit at ``-epsilon``.  The gamma
    direction depends on the sign of x, so both gamma corners are enumerated
    while the coefficient count stays within ``CORNER_CAP``; beyond that a
    seeded sample of corners is checked.
    """
    eps = as_fraction(epsilon)
    if eps < 0:
        raise ValueError("epsilon must be non-negative")
    if eps == 0:
        return check_feasibility_exact(sys)
    n_aff = sum(1 for _, t in sys.terms() if t.affine)
    if 3 * n_aff <= CORNER_CAP:
        corners: Iterable[Sequence[int]] = itertools.product((-1, 1), repeat=n_aff)
    else:
        rng = random.Random(seed)
        corners = [(-1,) * n_aff, (1,) * n_aff] + [
            tuple(rng.choice((-1, 1)) for _ in range(n_aff)) for _ in range(samples)]
    return all(check_feasibility_exact(_perturbed(sys, eps, c)) for c in corners)


# ---------------------------------------------------------------------------
# max systems


def default_max_bound(sys: MaxSystem) -> Fraction:
    big = max([abs(t.c) for eq in sys.equations for t in eq] or [Q(0)])
    return 10**4 * (1 + big) * max(sys.d, 1)


def _max_constraints(sys: MaxSystem) -> list[Constraint]:
    # s_i >= 0 and s_i >= c + g s_j, written as <= constraints
    cons: list[Constraint] = [(((i, _mpq(-1)),), _mpq(0)) for i in range(sys.d)]
    for i, eq in enumerate(sys.equations):
        for t in eq:
            coeffs = {i: _mpq(-1)}
            if t.gamma != 0:
                coeffs[t.target] = coeffs.get(t.target, _mpq(0)) + _mpq(t.gamma)
            norm = _normalize(coeffs, -_mpq(t.c))
            if norm is not None:
                cons.append(norm)
    return _prune(cons)


@dataclass
class MaxReport:
    status: str  # "bounded" | "unbounded" | "undecided"
    solution: tuple[Fraction, ...] | None = None
    iterations_used: int = 0

    @property
    def bounded(self) -> bool:
        return self.status == "bounded"

    @property
    def decided(self) -> bool:
        return self.status != "undecided"


def solve_max_system(sys: MaxSystem, max_iter: int = 1000, divergence_bound=None) -> MaxReport:
    """Upward iteration from zero; the exact fixed point is the least solution."""
    bound = default_max_bound(sys) if divergence_bound is None else as_fraction(divergence_bound)
    bound, zero = _mpq(bound), _mpq(0)
    eqs = [[(_mpq(t.c), _mpq(t.gamma), t.target) for t in eq] for eq in sys.equations]
    s = [zero] * sys.d
    for it in range(1, max_iter + 1):
        nxt = [max([zero] + [c + g * s[j] if g else c for c, g, j in eq]) for eq in eqs]
        assert all(a >= b for a, b in zip(nxt, s)), "iteration must be non-decreasing"
        if nxt == s:
            return MaxReport("bounded", tuple(_fraction(v) for v in s), it)
        if max(nxt) > bound:
            return MaxReport("unbounded", iterations_used=it)
        s = nxt
    return MaxReport("undecided", iterations_used=max_iter)


def least_solution_exact(sys: MaxSystem) -> tuple[Fraction, ...] | None:
    cons = _max_constraints(sys)
    if not _feasible(cons, sys.d):
        return None
    s = tuple(_coordinate_extreme(cons, sys.d, i, upper=False) for i in range(sys.d))
    assert sys.apply(s) == s
    return s


def analyze_max_system(sys: MaxSystem, max_iter: int = 1000) -> MaxReport:
    report = solve_max_system(sys, max_iter=max_iter)
    if report.decided:
        return report
    s = least_solution_exact(sys)
    if s is None:
        return MaxReport("unbounded", iterations_used=report.iterations_used)
    return MaxReport("bounded", s, report.iterations_used)


def max_system_robust(sys: MaxSystem, epsilon) -> bool:
    """Still bounded after raising every constant and every slope by ``epsilon``?

    Solutions are non-negative, so raising both is the worst case.
    """
    eps = as_fraction(epsilon)
    worse = MaxSystem(tuple(
        tuple(MaxTerm(t.c + eps, t.gamma + eps if t.gamma else t.gamma, t.target) for t in eq)
        for eq in sys.equations))
    return least_solution_exact(worse) is not None
