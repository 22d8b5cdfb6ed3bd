"""Decay-exponent calculus for systems of semilinear wave equations.

With A = (n-1)/2 and psi = t^A phi, every power term |d phi_j|^q feeding
equation i contributes

* a growth candidate at null infinity:   1 - A(q-1) + alpha + q G
* a tail candidate at timelike infinity: A(q-1) - 1 - alpha + min(-q G, q H - 1 - beta)

where G is the growth of the differentiated source near null infinity and H
its tail exponent (one order better for derivatives).  The growth exponents
solve a max system, the tails a min system; a system is expected to be stable
when both have solutions that survive small perturbations.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from fractions import Fraction
from typing import Sequence

from .exponents import (
    MaxSystem, MaxTerm, MinMaxSystem, MinTerm, analyze_max_system, analyze_min_system,
    as_fraction, least_solution_exact, max_system_robust, robustness_margin,
)

DERIVATIVES = ("none", "dt", "du", "dv")
DEFAULT_EPSILON = Fraction(1, 10**9)


class Sentinel(Enum):
    INF = "inf"

    def __repr__(self):
        return "INF"


INF = Sentinel.INF


class OutOfScope(ValueError):
    """The system relies on structure the exponent calculus cannot see."""


@dataclass(frozen=True)
class NonlinearTerm:
    equation: int
    source: int
    derivative: str = "none"
    power: Fraction = Fraction(2)
    coefficient: float = 1.0
    t_weight: Fraction = Fraction(0)
    u_weight: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "power", as_fraction(self.power))
        object.__setattr__(self, "t_weight", as_fraction(self.t_weight))
        object.__setattr__(self, "u_weight", as_fraction(self.u_weight))
        if self.derivative not in DERIVATIVES + ("null",):
            raise ValueError(f"unknown derivative kind {self.derivative!r}")
        if self.power <= 1:
            raise ValueError("power must exceed 1")


@dataclass(frozen=True)
class DataSpec:
    kind: str = "compact"
    tail_exponent: Fraction | None = None
    amplitude: float = 1.0
    radius: float = 1.0
    profile: str = "velocity"

    def __post_init__(self):
        if self.kind not in ("compact", "tail"):
            raise ValueError(f"unknown data kind {self.kind!r}")
        if self.kind == "tail":
            if self.tail_exponent is None:
                raise ValueError("tail data needs a tail exponent")
            object.__setattr__(self, "tail_exponent", as_fraction(self.tail_exponent))
            if self.tail_exponent <= 0:
                raise ValueError("tail exponent must be positive")


@dataclass(frozen=True)
class WaveSystem:
    n: int
    fields: tuple[str, ...]
    terms: tuple[NonlinearTerm, ...]
    data: dict = field(default_factory=dict)  # field name -> DataSpec

    def __post_init__(self):
        object.__setattr__(self, "fields", tuple(self.fields))
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.n < 2:
            raise ValueError("dimension must be at least 2")
        if len(set(self.fields)) != len(self.fields):
            raise ValueError("field names must be distinct")
        for t in self.terms:
            for idx in (t.equation, t.source):
                if not 0 <= idx < len(self.fields):
                    raise ValueError(f"term references missing field index {idx}")
        for name in self.data:
            if name not in self.fields:
                raise ValueError(f"data given for undeclared field {name!r}")

    def data_for(self, i: int) -> DataSpec | None:
        return self.data.get(self.fields[i])

    def active_terms(self) -> list[NonlinearTerm]:
        return [t for t in self.terms if t.coefficient != 0]


@dataclass
class DecayPrediction:
    fields: tuple[str, ...]
    sigma: tuple | None
    s: tuple | None
    verdict: str  # expected-stable | expected-unstable | borderline
    log_flags: dict = field(default_factory=dict)
    graph: list = field(default_factory=list)
    has_loop: bool = False
    robust: bool = False
    sigma_bounded: bool = False
    s_solvable: bool = False

    def as_dict(self) -> dict:
        def fmt(v):
            return "inf" if v is INF else str(v)
        return {
            "verdict": self.verdict,
            "fields": list(self.fields),
            "sigma": None if self.sigma is None else [fmt(v) for v in self.sigma],
            "s": None if self.s is None else [fmt(v) for v in self.s],
            "sigma_bounded": self.sigma_bounded,
            "s_solvable": self.s_solvable,
            "robust": self.robust,
            "graph": [[self.fields[j], self.fields[i]] for j, i in self.graph],
            "has_loop": self.has_loop,
            "log_flags": {k: sorted(v) for k, v in self.log_flags.items() if v},
        }


# ---------------------------------------------------------------------------


def _half(n: int) -> Fraction:
    return Fraction(n - 1, 2)


def _shift(term: NonlinearTerm) -> tuple[int, int]:
    """(growth shift of G, tail shift of H) for the derivative kind."""
    g = -1 if term.derivative == "dv" else 0
    h = 0 if term.derivative == "none" else 1
    return g, h


@lru_cache(maxsize=4096)
def term_contributions(term: NonlinearTerm, n: int):
    """Affine data of the two candidates contributed by one term.

    Returns ``(sigma_entry, s_entry)`` where
    ``sigma_entry = (c, q)`` means ``c + q * sigma_j`` and
    ``s_entry(sigma_j)`` is a function giving ``(alpha, beta, q)`` with
    candidate ``alpha + min(0, beta + q * s_j)``.
    """
    if term.derivative == "null":
        raise OutOfScope("null-form products are outside the exponent calculus")
    A, q = _half(n), term.power
    g, h = _shift(term)
    c_sigma = 1 - A * (q - 1) + term.t_weight + q * g
    const = A * (q - 1) - 1 - term.t_weight

    def s_entry(sigma_j: Fraction):
        G = sigma_j + g
        return const - q * G, q * h - 1 - term.u_weight + q * G, q

    return (c_sigma, q), s_entry


def tail_from_forcing(region: str, Q, n: int) -> dict:
    """Leading decay of psi in each region for forcing ~ v^{-Q} in ``region``.

    Returns exponents for the keys ``N0``, ``NI``, ``Nplus`` (``None`` where
    the region is not reached, ``INF`` for no tail).
    """
    Q, A = as_fraction(Q), _half(n)
    if region == "N0":
        return {"N0": Q - A - 2, "NI": min(Fraction(0), Q - A - 2), "Nplus": Q - A - 2}
    if region == "NI":
        return {"N0": None, "NI": min(Fraction(0), Q - A - 1), "Nplus": Q - A - 1}
    if region == "Nplus":
        return {"N0": None, "NI": Fraction(0), "Nplus": Q - A - 2}
    if region == "compact":
        return {"N0": None, "NI": Fraction(0), "Nplus": INF if n % 2 else A}
    raise ValueError(f"unknown region {region!r}")


@dataclass
class DerivedSystems:
    sigma_system: MaxSystem
    s_system: MinMaxSystem | None
    s_index: tuple[int, ...]  # field index of each s unknown
    sigma: tuple[Fraction, ...] | None
    infinite: frozenset


def _sigma_system(sys: WaveSystem, c_shift: Fraction = Fraction(0)) -> MaxSystem:
    eqs: list[list[MaxTerm]] = [[] for _ in sys.fields]
    for t in sys.active_terms():
        (c, q), _ = term_contributions(t, sys.n)
        eqs[t.equation].append(MaxTerm(c + c_shift, q, t.source))
    for i in range(len(sys.fields)):
        spec = sys.data_for(i)
        if spec is not None and spec.kind == "tail":
            eqs[i].append(MaxTerm(1 - spec.tail_exponent + c_shift, 0, i))
    return MaxSystem(tuple(tuple(e) for e in eqs))


def _infinite_fields(sys: WaveSystem) -> frozenset:
    sourced = {t.equation for t in sys.active_terms()}
    out = set()
    for i, name in enumerate(sys.fields):
        if i in sourced:
            continue
        spec = sys.data_for(i)
        if spec is None:
            raise ValueError(f"field {name!r} has neither sourcing terms nor a data spec")
        if spec.kind == "compact" and sys.n % 2 == 1:
            out.add(i)
    return frozenset(out)


def _s_system(sys: WaveSystem, sigma: Sequence[Fraction], infinite: frozenset):
    index = tuple(i for i in range(len(sys.fields)) if i not in infinite)
    pos = {f: k for k, f in enumerate(index)}
    eqs: list[list[MinTerm]] = [[] for _ in index]
    for t in sys.active_terms():
        if t.equation in infinite:
            continue
        _, s_entry = term_contributions(t, sys.n)
        alpha, beta, q = s_entry(sigma[t.source])
        k = pos[t.equation]
        if t.source in infinite:
            eqs[k].append(MinTerm(alpha, 0, 0, k))
        else:
            eqs[k].append(MinTerm(alpha, beta, q, pos[t.source]))
    for i in index:
        spec = sys.data_for(i)
        if spec is not None and spec.kind == "tail":
            eqs[pos[i]].append(MinTerm(spec.tail_exponent - 1, 0, 0, pos[i]))
        if sys.n % 2 == 0:
            eqs[pos[i]].append(MinTerm(_half(sys.n), 0, 0, pos[i]))
    if not index:
        return None, index
    return MinMaxSystem(tuple(tuple(e) for e in eqs)), index


def derive_systems(sys: WaveSystem) -> DerivedSystems:
    """Assemble the growth system and, when it is bounded, the tail system."""
    for t in sys.active_terms():
        if t.derivative == "null":
            raise OutOfScope("null-form products are outside the exponent calculus")
    infinite = _infinite_fields(sys)
    sigma_sys = _sigma_system(sys)
    rep = analyze_max_system(sigma_sys)
    if not rep.bounded:
        return DerivedSystems(sigma_sys, None, (), None, infinite)
    s_sys, index = _s_system(sys, rep.solution, infinite)
    return DerivedSystems(sigma_sys, s_sys, index, rep.solution, infinite)


def _relaxed(sys: MinMaxSystem, eps: Fraction) -> MinMaxSystem:
    return MinMaxSystem(tuple(
        tuple(MinTerm(t.alpha + eps, t.beta + eps if t.affine else t.beta, t.gamma, t.target)
              for t in eq) for eq in sys.equations))


def _log_flags(sys: WaveSystem, sigma, s) -> dict:
    flags: dict[str, set] = {name: set() for name in sys.fields}
    for t in sys.active_terms():
        (c, q), s_entry = term_contributions(t, sys.n)
        name = sys.fields[t.equation]
        if c + q * sigma[t.source] == 0:
            flags[name].add("scri")  # forcing ~ 1/v near null infinity
        if s is not None and s[t.source] is not INF:
            _, h = _shift(t)
            if q * (s[t.source] + h) - t.u_weight == 1:
                flags[name].add("corner")  # forcing ~ 1/u in the interior
    for i, name in enumerate(sys.fields):
        spec = sys.data_for(i)
        if spec is not None and spec.kind == "tail" and spec.tail_exponent == 1:
            flags[name].add("data")
    return flags


def classify(sys: WaveSystem, epsilon=DEFAULT_EPSILON, seed: int = 0) -> DecayPrediction:
    """Verdict from the growth and tail systems.

    ``borderline`` marks exact equalities: the outcome changes under an
    ``epsilon`` perturbation in one direction but not the other.
    """
    eps = as_fraction(epsilon)
    derived = derive_systems(sys)
    names = sys.fields
    if derived.sigma is None:
        # unbounded growth; borderline if lowering every constant rescues it
        rescued = least_solution_exact(_sigma_system(sys, -eps)) is not None
        return DecayPrediction(names, None, None, "borderline" if rescued else "expected-unstable")
    sigma = derived.sigma
    sigma_robust = max_system_robust(derived.sigma_system, eps)
    if derived.s_system is None:
        s = tuple(INF for _ in names)
        verdict = "expected-stable" if sigma_robust else "borderline"
        return DecayPrediction(names, sigma, s, verdict, _log_flags(sys, sigma, s),
                               robust=sigma_robust, sigma_bounded=True, s_solvable=True)
    rep = analyze_min_system(derived.s_system)
    if not rep.solvable:
        rescued = analyze_min_system(_relaxed(derived.s_system, eps)).solvable
        verdict = "borderline" if rescued else "expected-unstable"
        return DecayPrediction(names, sigma, None, verdict, _log_flags(sys, sigma, None),
                               sigma_bounded=True)
    s_full = [INF] * len(names)
    for k, i in enumerate(derived.s_index):
        s_full[i] = rep.solution[k]
    s_robust = robustness_margin(derived.s_system, eps, seed=seed)
    robust = sigma_robust and s_robust
    graph = [(derived.s_index[j], derived.s_index[i]) for j, i in rep.graph]
    verdict = "expected-stable" if robust else "borderline"
    return DecayPrediction(names, sigma, tuple(s_full), verdict,
                           _log_flags(sys, sigma, s_full), graph, rep.has_loop, robust,
                           sigma_bounded=True, s_solvable=True)


# ---------------------------------------------------------------------------
# ready-made systems for the worked examples


def strauss(q, n=3) -> WaveSystem:
    return WaveSystem(n, ("phi",), (NonlinearTerm(0, 0, "none", q),))


def glassey(q, n=3) -> WaveSystem:
    return WaveSystem(n, ("phi",), (NonlinearTerm(0, 0, "dt", q),))


def dv_problem(q, n=3) -> WaveSystem:
    return WaveSystem(n, ("phi",), (NonlinearTerm(0, 0, "dv", q),))


def weighted_glassey(q, alpha, beta, n=3) -> WaveSystem:
    return WaveSystem(n, ("phi",), (NonlinearTerm(0, 0, "dt", q, 1.0, alpha, beta),))


def two_strauss(q1, q2, n=3) -> WaveSystem:
    return WaveSystem(n, ("phi", "psi"), (NonlinearTerm(0, 1, "none", q1),
                                          NonlinearTerm(1, 0, "none", q2)))


def strauss_glassey_scalar(q1, q2, n=3) -> WaveSystem:
    """Box phi = |d_t phi|^q1 + |phi|^q2."""
    return WaveSystem(n, ("phi",), (NonlinearTerm(0, 0, "dt", q1),
                                    NonlinearTerm(0, 0, "none", q2)))


def strauss_glassey_system(q1, q2, n=3) -> WaveSystem:
    """Box phi1 = |phi2|^q1, Box phi2 = |d_t phi1|^q2."""
    return WaveSystem(n, ("phi1", "phi2"), (NonlinearTerm(0, 1, "none", q1),
                                            NonlinearTerm(1, 0, "dt", q2)))


def strauss_null(q1, q2, n=3) -> WaveSystem:
    """Box phi = |psi|^q1, Box psi = |d_t phi|^((n+1)/(n-1)) + |phi|^q2."""
    return WaveSystem(n, ("phi", "psi"), (
        NonlinearTerm(0, 1, "none", q1),
        NonlinearTerm(1, 0, "dt", Fraction(n + 1, n - 1)),
        NonlinearTerm(1, 0, "none", q2)))


def strauss_with_tail(q, q_data, n=3) -> WaveSystem:
    return WaveSystem(n, ("phi",), (NonlinearTerm(0, 0, "none", q),),
                      {"phi": DataSpec("tail", q_data)})


def critical_system() -> WaveSystem:
    """Box phi1 = phi3^3, Box phi2 = (d_t phi1)^2, Box phi3 = (d_t phi2)^2 + phi1^3."""
    return WaveSystem(3, ("phi1", "phi2", "phi3"), (
        NonlinearTerm(0, 2, "none", 3),
        NonlinearTerm(1, 0, "dt", 2),
        NonlinearTerm(2, 1, "dt", 2),
        NonlinearTerm(2, 0, "none", 3)))


def weak_null_chain_system() -> WaveSystem:
    """Box phi_{k+1} = phi_k^2 for k = 1, 2, 3."""
    return WaveSystem(3, ("phi1", "phi2", "phi3", "phi4"),
                      tuple(NonlinearTerm(k + 1, k, "none", 2) for k in range(3)),
                      {"phi1": DataSpec()})
