"""Cyclic ODE comparison systems  x_i' = c_i t^{-alpha_i} x_{i-1}^{p_i}  (x_0 := x_n).

Such a system with positive data, prod p_i > 1 and sum alpha_i <= n has no
global solution.  The integrator works in s = log t on z = log x, where
dz_i/ds = c_i exp((1 - alpha_i) s + p_i z_{i-1} - z_i) stays moderate until
the very end.  Once some x exceeds ``BLOWUP_LEVEL`` the remaining time is
bounded by the scalar comparison  y' = k y^{1+m}  in s.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp

BLOWUP_LEVEL = 1e12
_LOG_LEVEL = math.log(BLOWUP_LEVEL)


@dataclass(frozen=True)
class GronwallSystem:
    c: tuple[float, ...]
    alpha: tuple[float, ...]
    p: tuple[float, ...]
    x0: tuple[float, ...]
    t0: float = 1.0

    def __post_init__(self):
        k = len(self.c)
        if not (len(self.alpha) == len(self.p) == len(self.x0) == k) or k == 0:
            raise ValueError("c, alpha, p and x0 must have the same positive length")
        if any(ci <= 0 for ci in self.c):
            raise ValueError("coefficients must be positive")
        if any(pi < 1 for pi in self.p):
            raise ValueError("powers must be at least 1")
        if self.t0 < 1:
            raise ValueError("start time must be at least 1")

    @property
    def n(self) -> int:
        return len(self.c)

    def rate_exponent(self) -> float:
        """m in the terminal comparison y' = k y^{1+m}.

        With the powers sorted so that p_1 is the largest, m = (p_1^{1/n} - 1) / Q
        and Q = sum_{i<n} p_1^{i/n}.  For a single equation this is p - 1.
        """
        p1 = max(self.p)
        Q = sum(p1 ** (i / self.n) for i in range(self.n))
        return (p1 ** (1 / self.n) - 1) / Q


def check_hypotheses(sys: GronwallSystem) -> bool:
    return (math.prod(sys.p) > 1 and sum(sys.alpha) <= sys.n
            and all(x > 0 for x in sys.x0))


@dataclass
class GronwallRun:
    blowup_time: float | None
    t: np.ndarray
    x: np.ndarray  # (samples, n); inf beyond float range
    steps: int


@dataclass
class GronwallResult:
    verdict: str  # "blowup" | "inconclusive" | "none"
    blowup_time: float | None
    coarse_time: float | None
    refinement_ok: bool
    hypotheses: bool
    trajectory: GronwallRun

    def as_dict(self) -> dict:
        return {"verdict": self.verdict, "blowup_time": self.blowup_time,
                "coarse_time": self.coarse_time, "refinement_ok": self.refinement_ok,
                "hypotheses": self.hypotheses}

    def trajectory_csv(self) -> str:
        tr = self.trajectory
        head = "t," + ",".join(f"x{i + 1}" for i in range(tr.x.shape[1]))
        rows = [",".join(f"{v:.12e}" for v in (t, *xs)) for t, xs in zip(tr.t, tr.x)]
        return "\n".join([head, *rows]) + "\n"


def _rhs(sys: GronwallSystem):
    c = np.log(np.asarray(sys.c, dtype=float))
    a = 1.0 - np.asarray(sys.alpha, dtype=float)
    p = np.asarray(sys.p, dtype=float)

    def f(s, z):
        arg = c + a * s + p * np.roll(z, 1) - z
        return np.exp(np.minimum(arg, 700.0))

    return f


def _rk4(f, s, z, ds):
    k1 = f(s, z)
    k2 = f(s + ds / 2, z + ds / 2 * k1)
    k3 = f(s + ds / 2, z + ds / 2 * k2)
    k4 = f(s + ds, z + ds * k3)
    return z + ds / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def run(sys: GronwallSystem, t_max: float = 1e10, rtol: float = 1e-6,
        max_steps: int = 200_000) -> GronwallRun:
    """One adaptive integration; RK4 with step doubling for the error estimate."""
    f = _rhs(sys)
    m = sys.rate_exponent()
    s, s_end = math.log(sys.t0), math.log(t_max)
    z = np.log(np.asarray(sys.x0, dtype=float))
    ds = 1e-3
    ts, zs = [s], [z.copy()]
    steps = 0
    while s < s_end and steps < max_steps:
        steps += 1
        ds = min(ds, s_end - s)
        with np.errstate(over="ignore", invalid="ignore"):
            big = _rk4(f, s, z, ds)
            half = _rk4(f, s + ds / 2, _rk4(f, s, z, ds / 2), ds / 2)
        err = np.max(np.abs(big - half)) if np.all(np.isfinite(half)) else math.inf
        if not err <= rtol:
            ds = ds / 2 if not math.isfinite(err) else ds * max(0.1, 0.9 * (rtol / err) ** 0.2)
            if ds < 1e-15 * max(1.0, abs(s)):
                return GronwallRun(math.exp(s), np.exp(ts), _expx(zs), steps)
            continue
        s += ds
        z = half + (half - big) / 15
        ts.append(s)
        zs.append(z.copy())
        if z.max() > _LOG_LEVEL:
            rate = f(s, z)[np.argmax(z)]
            remaining = 1.0 / (m * rate)
            if remaining < ds:
                return GronwallRun(math.exp(s + remaining), np.exp(ts), _expx(zs), steps)
        ds *= min(2.0, 0.9 * (rtol / max(err, 1e-300)) ** 0.2)
    return GronwallRun(None, np.exp(ts), _expx(zs), steps)


def _expx(zs) -> np.ndarray:
    with np.errstate(over="ignore"):
        return np.exp(np.asarray(zs))


def integrate(sys: GronwallSystem, t_max: float = 1e10, rtol: float = 1e-6,
              agreement: float = 0.05) -> GronwallResult:
    """Blow-up verdict with a refinement check at ``rtol`` and ``rtol/10``.

    Without blow-up by ``t_max`` the verdict is ``inconclusive`` when the
    hypotheses hold (blow-up is guaranteed, just later) and ``none`` otherwise.
    """
    hyp = check_hypotheses(sys)
    coarse = run(sys, t_max, rtol)
    fine = run(sys, t_max, rtol / 10)
    if coarse.blowup_time is not None and fine.blowup_time is not None:
        ok = abs(coarse.blowup_time - fine.blowup_time) <= agreement * fine.blowup_time
        return GronwallResult("blowup", fine.blowup_time, coarse.blowup_time, ok, hyp, fine)
    verdict = "inconclusive" if hyp else "none"
    return GronwallResult(verdict, None, coarse.blowup_time, coarse.blowup_time is None, hyp, fine)


# ---------------------------------------------------------------------------
# second-order moment form


@dataclass(frozen=True)
class SecondOrderSystem:
    """H_i'' = c_i t^{-alpha_i} S_i^{p_i}, with S_i = H_{i-1} or H_{i-1}' (cyclic)."""

    c: tuple[float, ...]
    alpha: tuple[float, ...]
    p: tuple[float, ...]
    derivative_source: tuple[bool, ...]
    h0: tuple[float, ...]
    dh0: tuple[float, ...]
    t0: float = 1.0

    @property
    def m(self) -> int:
        return len(self.c)

    def components(self) -> list[tuple[str, int]]:
        """Order of the first-order unknowns: ("d", i) is H_i', ("v", i) is H_i."""
        out = []
        for i in range(self.m):
            out.append(("d", i))
            if not self.derivative_source[(i + 1) % self.m]:
                out.append(("v", i))
        return out

    def first_order(self) -> GronwallSystem:
        """Interleave into a cycle; H_i is dropped when nothing reads its value."""
        comps = self.components()
        c, alpha, p, x0 = [], [], [], []
        for kind, i in comps:
            if kind == "d":
                c.append(self.c[i]), alpha.append(self.alpha[i]), p.append(self.p[i])
                x0.append(self.dh0[i])
            else:
                c.append(1.0), alpha.append(0.0), p.append(1.0)
                x0.append(self.h0[i])
        return GronwallSystem(tuple(c), tuple(alpha), tuple(p), tuple(x0), self.t0)

    def solve_direct(self, t_max: float = 1e10, rtol: float = 1e-9,
                     level: float = 1e100) -> float | None:
        """Time at which a stock ODE solver sees some unknown exceed ``level`` (None if never).

        With powers close to 1 the approach to blow-up is slow, so ``level``
        must be large for this to approximate the blow-up time.
        """
        m = self.m

        def rhs(s, y):
            t = math.exp(s)
            H, D = y[:m], y[m:]
            out = np.empty(2 * m)
            out[:m] = t * D
            for i in range(m):
                j = (i - 1) % m
                src = D[j] if self.derivative_source[i] else H[j]
                out[m + i] = t * self.c[i] * t ** (-self.alpha[i]) * min(max(src, 0.0), 1e150) ** self.p[i]
            return out

        def event(s, y):
            return np.max(y) - level if np.all(np.isfinite(y)) else 1.0

        event.terminal = True
        sol = solve_ivp(rhs, (math.log(self.t0), math.log(t_max)),
                        np.concatenate([self.h0, self.dh0]), method="DOP853",
                        rtol=rtol, atol=1e-12, events=event)
        if sol.t_events[0].size:
            return float(math.exp(sol.t_events[0][0]))
        return None if sol.status == 0 else float(math.exp(sol.t[-1]))


def strauss_glassey_comparison(q1: float, q2: float, eps: float = 0.1,
                               c: Sequence[float] = (1.0, 1.0),
                               data: Sequence[float] = (1.0, 1.0, 1.0),
                               t0: float = 1.0) -> SecondOrderSystem:
    """Moment comparison for Box phi1 = |phi2|^q1, Box phi2 = |d_t phi1|^q2 below the curve.

    The tail lower bound phi2 >~ t^{-1} <u>^{-s2}, s2 = q2 - 2 + q2 (q1 - 2),
    trades q - 1 - eps powers of each moment for explicit time growth.
    ``data`` is (H1'(t0), H2(t0), H2'(t0)).
    """
    s2 = q2 - 2 + q2 * (q1 - 2)
    a1 = 3 * (q1 - 1) - (q1 - 1 - eps) * (2 - s2)
    a2 = 3 * (q2 - 1) - (q2 - 1 - eps) * (4 - s2 * q1 - q1)
    return SecondOrderSystem(tuple(c), (a1, a2), (1 + eps, 1 + eps), (False, True),
                             h0=(0.0, data[1]), dh0=(data[0], data[2]), t0=t0)


# ---------------------------------------------------------------------------
# comparison constants from simulated moments


@dataclass
class CoupledComparison:
    applicable: bool
    reason: str
    system: SecondOrderSystem | None = None
    t0: float | None = None
    fitted: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {"applicable": self.applicable, "reason": self.reason, "t0": self.t0}
        out.update(self.fitted)
        return out


@dataclass(frozen=True)
class MomentCoupling:
    """H_i'' >~ t^{-alpha} S^{p} with S = H_{i-1} (or H_{i-1}' if ``derivative``)."""

    p: float
    derivative: bool = False


def _derivatives(t, H):
    d1 = np.gradient(H, t, edge_order=2)
    return d1, np.gradient(d1, t, edge_order=2)


def couple_from_moments(series: Sequence, template: Sequence[MomentCoupling],
                        epsilon: float = 0.0, min_window: int = 6) -> CoupledComparison:
    """Fit a comparison system to moment series H_i(t) (objects with ``t``, ``values``).

    For each start sample t0 the ratio H_i'' / S^p must stay positive on the
    rest of the window; its log-log slope gives alpha_i and the smallest
    rescaled ratio gives c_i, so the inequality holds on every later sample.
    With ``epsilon > 0`` the excess power p - 1 - epsilon is traded against
    the fitted growth t^g of the source.  The first t0 whose system meets the
    hypotheses is returned.
    """
    m = len(template)
    if len(series) != m:
        raise ValueError("one moment series per coupling is required")
    t = np.asarray(series[0].t, dtype=float)
    if any(len(s.t) != len(t) or np.any(np.asarray(s.t) != t) for s in series):
        raise ValueError("moment series must share sample times")
    H = [np.asarray(s.values, dtype=float) for s in series]
    if all(np.all(h == 0) for h in H):
        return CoupledComparison(False, "moments vanish identically")
    D1, D2 = zip(*(_derivatives(t, h) for h in H))
    last_reason = "no start time leaves a long enough window"
    for k0 in range(0, len(t) - min_window):
        sl = slice(k0, None)
        tw = t[sl]
        c, alpha, p = [], [], []
        ok = True
        for i, cp in enumerate(template):
            j = (i - 1) % m
            S = (D1[j] if cp.derivative else H[j])[sl]
            lhs = D2[i][sl]
            if np.any(S <= 0) or np.any(lhs <= 0):
                ok, last_reason = False, "comparison constants not positive on the window"
                break
            ratio = lhs / S ** cp.p
            a = -float(np.polyfit(np.log(tw), np.log(ratio), 1)[0])
            ci = float(np.min(ratio * tw ** a))
            pe = cp.p
            if epsilon > 0 and cp.p > 1 + epsilon:
                g = float(np.polyfit(np.log(tw), np.log(S), 1)[0])
                C = float(np.min(S * tw ** (-g)))
                ci *= C ** (cp.p - 1 - epsilon)
                a -= (cp.p - 1 - epsilon) * g
                pe = 1 + epsilon
            c.append(ci), alpha.append(a), p.append(pe)
        if not ok:
            continue
        h0 = tuple(float(h[k0]) for h in H)
        dh0 = tuple(float(d[k0]) for d in D1)
        if any(x <= 0 for x in dh0) or any(
                x <= 0 for i, x in enumerate(h0) if not template[(i + 1) % m].derivative):
            last_reason = "initial data not positive"
            continue
        so = SecondOrderSystem(tuple(c), tuple(alpha), tuple(p),
                               tuple(cp.derivative for cp in template), h0, dh0, float(t[k0]))
        if check_hypotheses(so.first_order()):
            return CoupledComparison(True, "ok", so, float(t[k0]),
                                     {"c": c, "alpha": alpha, "p": p})
        last_reason = "hypotheses fail at every sampled start time"
    return CoupledComparison(False, last_reason)
