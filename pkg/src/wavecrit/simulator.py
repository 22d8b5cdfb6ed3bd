"""Double-null characteristic evolution of spherically symmetric systems in 3+1.

Each field is evolved as psi = r*phi on a tensor lattice in (u, v) with
u = (t-r)/2, v = (t+r)/2, so that d_u d_v psi = r * F.  Cells are updated by

    psi_NE = psi_NW + psi_SE - psi_SW + du * dv * S(center)

which is exact for the homogeneous equation.  Nodes with equal index sum
depend only on the two previous index diagonals, so each diagonal is one
vectorized update.  The lattice is uniform with step h near the origin and,
optionally, stretched geometrically beyond ``uniform_radius`` so that runs
to v ~ 1e4 and much further stay small.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import trapezoid
from scipy.interpolate import RegularGridInterpolator

from .decay import DataSpec, WaveSystem
from .fitting import DecayFit, fit_decay


class ConfigurationError(ValueError):
    pass


class NumericalInstability(RuntimeError):
    pass


@dataclass(frozen=True)
class Grid:
    """Lattice geometry.

    ``stretch`` is the asymptotic relative spacing beyond ``uniform_radius``
    (0 keeps the lattice uniform).
    """

    h: float = 2.0 ** -5
    u_max: float = 16.0
    v_max: float = 32.0
    stretch: float = 0.0
    uniform_radius: float = 4.0
    memory_limit: float = 1.5e9  # bytes

    def __post_init__(self):
        if self.h <= 0:
            raise ConfigurationError("step must be positive")
        if self.v_max <= self.u_max:
            raise ConfigurationError("v_max must exceed u_max")
        if self.stretch < 0:
            raise ConfigurationError("stretch must be non-negative")

    def refined(self, factor: int = 2) -> "Grid":
        return replace(self, h=self.h / factor, stretch=self.stretch / factor)

    def nodes(self, radius: float) -> tuple[np.ndarray, int]:
        """Coordinates shared by u and v, and the index of the origin."""
        h = self.h
        m_neg = int(math.ceil((radius / 2) / h)) + 2
        core = max(self.uniform_radius, radius + 2 * h)
        pos = [0.0]
        x = 0.0
        while x < self.v_max - 1e-12:
            step = h + self.stretch * max(0.0, x - core)
            x = min(self.v_max, x + step)
            if self.v_max - x < 0.25 * step:
                x = self.v_max
            pos.append(x)
        g = np.concatenate([-h * np.arange(m_neg, 0, -1), np.asarray(pos)])
        return g, m_neg


@dataclass
class BlowupEvent:
    trigger: str  # "threshold" | "nan"
    u: float
    v: float
    t: float


@dataclass
class BlowupCertificate:
    trigger: str
    u: float
    v: float
    times: tuple[float, float, float]
    ratio: float
    label: str = "numerical"

    def as_dict(self) -> dict:
        return {"trigger": self.trigger, "u": self.u, "v": self.v,
                "blowup_time_estimates": list(self.times), "convergence_ratio": self.ratio,
                "label": self.label}


@dataclass
class Probe:
    kind: str
    param: float
    field: str
    quantity: str
    t: np.ndarray
    values: np.ndarray

    def to_csv(self) -> str:
        lines = ["t,value"]
        lines += [f"{a:.12e},{b:.12e}" for a, b in zip(self.t, self.values)]
        return "\n".join(lines) + "\n"

    def fit(self, **kw) -> DecayFit:
        return fit_decay(self.t, self.values, **kw)


# ---------------------------------------------------------------------------
# initial data


def bump(r, radius: float = 1.0):
    """Smooth bump equal to 1 at r = 0 and supported in r < radius."""
    x = np.asarray(r, dtype=float) / radius
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - x[inside] ** 2))
    return out


def shell(r, radius: float = 1.0):
    """Bump centred at radius/2, vanishing near the axis."""
    return bump(2.0 * (np.asarray(r, dtype=float) - radius / 2), radius)


def data_profiles(spec: DataSpec) -> tuple[Callable, Callable]:
    """(phi0, phi1) as functions of r for a compact data spec."""
    c, R = spec.amplitude, spec.radius
    if spec.kind != "compact":
        raise ConfigurationError("the simulator needs compactly supported data")
    zero = lambda r: np.zeros_like(np.asarray(r, dtype=float))
    if spec.profile == "velocity":
        return zero, lambda r: c * bump(r, R)
    if spec.profile == "bump":
        return lambda r: c * bump(r, R), zero
    if spec.profile == "outgoing":
        # d_v(r phi) = 0 at t = 0: phi1 = -(r phi0)' / r
        f0 = lambda r: c * shell(r, R)

        def f1(r):
            r = np.asarray(r, dtype=float)
            e = 1e-6 * R
            rp = np.abs(r)
            d = ((rp + e) * f0(rp + e) - (rp - e) * f0(rp - e)) / (2 * e)
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(rp > 0, -d / np.maximum(rp, 1e-300), 0.0)

        return f0, f1
    raise ConfigurationError(f"unknown data profile {spec.profile!r}")


# ---------------------------------------------------------------------------
# sources


@dataclass(frozen=True)
class _Term:
    eq: int
    src: int
    kind: str
    q: float
    coef: float
    alpha: float
    beta: float


def _terms(sys: WaveSystem) -> list[_Term]:
    out = []
    for t in sys.active_terms():
        if t.derivative not in ("none", "dt", "du", "dv"):
            raise ConfigurationError(f"derivative kind {t.derivative!r} cannot be simulated")
        out.append(_Term(t.equation, t.source, t.derivative, float(t.power),
                         float(t.coefficient), float(t.t_weight), float(t.u_weight)))
    return out


def _source(terms, psi, dpu, dpv, r, t, u, nf, forcing, uc, vc):
    S = np.zeros((nf,) + r.shape)
    for tm in terms:
        if tm.kind == "none":
            X = psi[tm.src] / r
        elif tm.kind == "dt":
            X = 0.5 * (dpu[tm.src] + dpv[tm.src]) / r
        elif tm.kind == "du":
            X = dpu[tm.src] / r + psi[tm.src] / (r * r)
        else:
            X = dpv[tm.src] / r - psi[tm.src] / (r * r)
        val = tm.coef * r * np.abs(X) ** tm.q
        if tm.alpha:
            val = val * t ** tm.alpha
        if tm.beta:
            val = val * (1.0 + np.abs(u)) ** tm.beta
        S[tm.eq] += val
    if forcing is not None:
        for i, F in enumerate(forcing):
            if F is not None:
                S[i] += F(uc, vc)
    return S


# ---------------------------------------------------------------------------


@dataclass
class Evolution:
    fields: tuple[str, ...]
    grid: Grid
    g: np.ndarray
    origin: int
    psi: np.ndarray  # (fields, Nu, Nv); NaN marks nodes never computed
    blowup: BlowupEvent | None = None
    amplitude: float = 1.0
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def nu(self) -> int:
        return self.psi.shape[1]

    @property
    def nv(self) -> int:
        return self.psi.shape[2]

    def field_index(self, name) -> int:
        return name if isinstance(name, int) else self.fields.index(name)

    def _grid_values(self, quantity: str, i: int) -> np.ndarray:
        key = (quantity, i)
        if key in self._cache:
            return self._cache[key]
        gu, gv = self.g[:self.nu], self.g[:self.nv]
        P = self.psi[i].copy()
        # odd extension across the axis keeps bilinear cells straddling it consistent
        n = min(self.nu, self.nv)
        lower = np.tril_indices(n, -1)
        P[lower] = -P[lower[1], lower[0]]
        r = gv[None, :] - gu[:, None]
        rmin = self.grid.h / 2
        if quantity == "psi":
            out = P
        elif quantity == "phi":
            out = P / np.maximum(np.abs(r), rmin)
        elif quantity == "dv_psi":
            out = np.gradient(P, gv, axis=1)
        elif quantity == "dv_phi":
            out = np.gradient(P / np.maximum(np.abs(r), rmin), gv, axis=1)
        elif quantity == "du_psi":
            out = np.gradient(P, gu, axis=0)
        else:
            raise ValueError(f"unknown quantity {quantity!r}")
        self._cache[key] = out
        return out

    def sample(self, u, v, field=0, quantity: str = "psi") -> np.ndarray:
        i = self.field_index(field)
        vals = self._grid_values(quantity, i)
        interp = RegularGridInterpolator((self.g[:self.nu], self.g[:self.nv]), vals,
                                         bounds_error=False, fill_value=np.nan)
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return interp(np.stack([u, v], axis=-1))

    def probe(self, kind: str, param: float, field=0, quantity: str = "psi",
              samples: int = 64, t_min: float = 1.0, t_max: float | None = None) -> Probe:
        """Log-spaced series along a fixed-r, fixed-r/t or outgoing (scri) curve."""
        i = self.field_index(field)
        vmax, umax = self.g[self.nv - 1], self.g[self.nu - 1]
        if kind == "fixed_rho":
            rho = param
            top = min(2 * vmax / (1 + rho), 2 * umax / (1 - rho))
            t = np.geomspace(t_min, t_max or top, samples)
            u, v = t * (1 - rho) / 2, t * (1 + rho) / 2
        elif kind == "fixed_r":
            top = min(2 * vmax - param, 2 * umax + param)
            t = np.geomspace(max(t_min, param + 1e-9), t_max or top, samples)
            u, v = (t - param) / 2, (t + param) / 2
        elif kind == "scri":
            t = np.geomspace(max(t_min, param + 1e-9), t_max or vmax, samples)
            u, v = np.full_like(t, param), t
        else:
            raise ValueError(f"unknown probe kind {kind!r}")
        vals = self.sample(u, v, i, quantity)
        ok = np.isfinite(vals)
        return Probe(kind, param, self.fields[i], quantity, t[ok], vals[ok])

    def radiation_field(self, field=0, samples: int = 200) -> Probe:
        """psi along the last outgoing ray v = v_max, as a function of u."""
        i = self.field_index(field)
        vmax = self.g[self.nv - 1]
        u = np.linspace(self.g[0], self.g[self.nu - 1], samples)
        vals = self.sample(u, np.full_like(u, vmax), i)
        ok = np.isfinite(vals)
        return Probe("radiation", vmax, self.fields[i], "psi", u[ok], vals[ok])

    def moment(self, field=0, samples: int = 48, t_min: float = 1.0, radius: float = 1.0,
               t_max: float | None = None) -> Probe:
        """H(t) = int_0^{t+R} psi(t, r) dr by the trapezoid rule."""
        i = self.field_index(field)
        vmax, umax = self.g[self.nv - 1], self.g[self.nu - 1]
        top = min(vmax - radius / 2, 2 * umax) * 0.999
        ts = np.geomspace(t_min, t_max or top, samples)
        out_t, out_h = [], []
        for t in ts:
            rr = np.unique(np.concatenate([
                np.linspace(0, t + radius, 801),
                np.clip(t + np.linspace(-radius, radius, 401), 0, t + radius)]))
            vals = self.sample((t - rr) / 2, (t + rr) / 2, i)
            if not np.all(np.isfinite(vals)):
                break
            out_t.append(t)
            out_h.append(trapezoid(vals, rr))
        return Probe("moment", 0.0, self.fields[i], "psi", np.asarray(out_t), np.asarray(out_h))

    def write_snapshot(self, path) -> None:
        """Flat binary: magic, version, field count, h, then rows of every field."""
        with open(path, "wb") as fh:
            fh.write(b"WCRT")
            fh.write(struct.pack("<I", 1))
            fh.write(struct.pack("<I", len(self.fields)))
            fh.write(struct.pack("<d", self.grid.h))
            fh.write(struct.pack("<II", self.nu, self.nv))
            fh.write(self.g[:self.nv].astype("<f8").tobytes())
            fh.write(np.nan_to_num(self.psi, nan=0.0).astype("<f8").tobytes(order="C"))


def read_snapshot(path) -> dict:
    with open(path, "rb") as fh:
        if fh.read(4) != b"WCRT":
            raise ValueError("not a snapshot file")
        version, nf = struct.unpack("<II", fh.read(8))
        (h,) = struct.unpack("<d", fh.read(8))
        nu, nv = struct.unpack("<II", fh.read(8))
        g = np.frombuffer(fh.read(8 * nv), dtype="<f8")
        psi = np.frombuffer(fh.read(8 * nf * nu * nv), dtype="<f8").reshape(nf, nu, nv)
    return {"version": version, "h": h, "g": g, "psi": psi}


def _data_radius(sys: WaveSystem) -> float:
    radii = [spec.radius for spec in sys.data.values() if spec.kind == "compact"]
    return max(radii, default=1.0)


def evolve(sys: WaveSystem, grid: Grid, forcing: Sequence[Callable | None] | None = None,
           threshold: float = 1e6, stop_on_blowup: bool = True) -> Evolution:
    """March the lattice diagonal by diagonal.

    ``forcing`` adds a prescribed source F_i(u, v) to the psi equations (used
    for checks against the exact kernels).  The run stops when |phi| exceeds
    ``threshold`` times the data amplitude or a non-finite value appears.
    """
    if sys.n != 3:
        raise ConfigurationError("the simulator is restricted to three space dimensions")
    terms = _terms(sys)
    nf = len(sys.fields)
    R = _data_radius(sys)
    g, i0 = grid.nodes(R)
    nu = int(np.searchsorted(g, grid.u_max, side="right"))
    nv = len(g)
    if 8.0 * nf * nu * nv > grid.memory_limit:
        raise ConfigurationError(f"lattice {nf}x{nu}x{nv} exceeds the memory limit")
    psi = np.full((nf, nu, nv), np.nan)
    psi[:, 0, :] = 0.0  # u below the causal future of the data
    # axis
    k = np.arange(min(nu, nv))
    psi[:, k, k] = 0.0

    amps = [spec.amplitude for spec in sys.data.values()] or [1.0]
    amplitude = max(abs(a) for a in amps) or 1.0
    h = grid.h

    # data on t = 0 and t = h (uniform part of the lattice)
    profiles = {}
    for i, name in enumerate(sys.fields):
        spec = sys.data.get(name)
        profiles[i] = data_profiles(spec) if spec is not None else None
    m = np.arange(0, i0 + 1)
    r0 = 2 * m * h
    r1 = (2 * m + 1) * h
    gl_x, gl_w = np.polynomial.legendre.leggauss(6)
    data0, data1 = np.zeros((nf, len(m))), np.zeros((nf, len(m)))
    phi0 = np.zeros((nf, len(m)))
    dphi = {}
    for i in range(nf):
        if profiles[i] is None:
            continue
        f0, f1 = profiles[i]
        Psi0 = lambda x, f0=f0: x * f0(np.abs(x))
        Psi1 = lambda x, f1=f1: x * f1(np.abs(x))
        data0[i] = Psi0(r0)
        nodes = r1[:, None] + h * gl_x[None, :]
        data1[i] = 0.5 * (Psi0(r1 + h) + Psi0(r1 - h)) + 0.5 * h * (Psi1(nodes) @ gl_w)
        phi0[i] = f0(r1)
        e = 1e-6
        dphi[i] = (f0(r1 + e) - f0(np.abs(r1 - e))) / (2 * e), f1(r1)
    if terms:
        # second-order Taylor correction h^2/2 * r F at t = 0
        psi_c = phi0 * r1
        dpu = np.zeros_like(psi_c)
        dpv = np.zeros_like(psi_c)
        for i in dphi:
            dr, f1v = dphi[i]
            dpsi_dr = phi0[i] + r1 * dr
            dpsi_dt = r1 * f1v
            dpu[i] = dpsi_dt - dpsi_dr
            dpv[i] = dpsi_dt + dpsi_dr
        S = _source(terms, psi_c, dpu, dpv, r1, np.full_like(r1, 1e-300), -r1 / 2, nf,
                    None, None, None)
        data1 += 0.5 * h * h * S
    a0 = i0 - m
    valid0 = a0 >= 1
    psi[:, a0[valid0], (i0 + m)[valid0]] = data0[:, valid0]
    b1 = i0 + m + 1
    valid1 = (a0 >= 1) & (b1 < nv) & (a0 < nu)
    psi[:, a0[valid1], b1[valid1]] = data1[:, valid1]

    has_derivs = any(tm.kind != "none" for tm in terms)
    homogeneous = not terms and forcing is None
    data_scale = max(np.nanmax(np.abs(data0)), np.nanmax(np.abs(data1)), 1e-300)
    du_all = np.diff(g)
    blowup = None
    limit = threshold * amplitude

    for K in range(2 * i0 + 2, (nu - 1) + (nv - 1) + 1):
        lo = max(1, K - (nv - 1))
        hi = min(nu - 1, (K - 1) // 2)
        if lo > hi:
            continue
        A = np.arange(lo, hi + 1)
        B = K - A
        NW, SE, SW = psi[:, A - 1, B], psi[:, A, B - 1], psi[:, A - 1, B - 1]
        du, dv = du_all[A - 1], du_all[B - 1]
        uc = 0.5 * (g[A - 1] + g[A])
        vc = 0.5 * (g[B - 1] + g[B])
        r, t = vc - uc, uc + vc
        base = NW + SE - SW
        if terms or forcing is not None:
            pc = 0.5 * (NW + SE)
            S = _source(terms, pc, (SE - SW) / du, (NW - SW) / dv, r, t, uc, nf, forcing, uc, vc)
            NE = base + du * dv * S
            if has_derivs:
                dpu = 0.5 * ((SE - SW) + (NE - NW)) / du
                dpv = 0.5 * ((NW - SW) + (NE - SE)) / dv
                S = _source(terms, pc, dpu, dpv, r, t, uc, nf, forcing, uc, vc)
                NE = base + du * dv * S
        else:
            NE = base
        psi[:, A, B] = NE
        if homogeneous and np.nanmax(np.abs(NE)) > 1e3 * data_scale:
            raise NumericalInstability("homogeneous evolution grew beyond the data scale")
        rr = np.maximum(g[B] - g[A], h / 2)
        mag = np.abs(NE) / rr
        bad = ~np.isfinite(NE)
        if bad.any() or np.any(mag > limit):
            trig = "nan" if bad.any() else "threshold"
            hit = np.flatnonzero((bad | (mag > limit)).any(axis=0))
            tt = g[A[hit]] + g[B[hit]]
            j = hit[np.argmin(tt)]
            blowup = BlowupEvent(trig, float(g[A[j]]), float(g[B[j]]), float(g[A[j]] + g[B[j]]))
            if stop_on_blowup:
                psi[:, A, B] = np.where(np.isfinite(NE), NE, np.nan)
                break
    return Evolution(tuple(sys.fields), grid, g, i0, psi, blowup, amplitude)


def detect_blowup(sys: WaveSystem, grid: Grid, threshold: float = 1e6,
                  agreement: float = 0.1) -> BlowupCertificate | None:
    """Blow-up certificate from runs at h, h/2 and h/4 that agree within ``agreement``."""
    times, events = [], []
    g = grid
    for _ in range(3):
        ev = evolve(sys, g, threshold=threshold).blowup
        if ev is None:
            return None
        times.append(ev.t)
        events.append(ev)
        g = g.refined()
    t1, t2, t3 = times
    if abs(t1 - t2) > agreement * t2 or abs(t2 - t3) > agreement * t3:
        return None
    ratio = (t1 - t2) / (t2 - t3) if t2 != t3 else math.inf
    last = events[-1]
    return BlowupCertificate(last.trigger, last.u, last.v, (t1, t2, t3), ratio)


# ---------------------------------------------------------------------------
# quadratic chain


@dataclass
class ChainReport:
    amplitude: float
    growth_psi4: DecayFit  # r*phi4 along r/t = rho
    growth_phi4: DecayFit
    growth_dv_psi4: DecayFit
    growth_dv_phi4: DecayFit
    obstruction: tuple[float, float, float] | None  # (u, v, t) of first |d_v (r phi4)| >= 1
    rho: float

    def as_dict(self) -> dict:
        return {"amplitude": self.amplitude, "rho": self.rho,
                "r_phi4": self.growth_psi4.as_dict(), "phi4": self.growth_phi4.as_dict(),
                "dv_r_phi4": self.growth_dv_psi4.as_dict(),
                "dv_phi4": self.growth_dv_phi4.as_dict(),
                "obstruction": None if self.obstruction is None else list(self.obstruction)}


def chain_grid() -> Grid:
    return Grid(h=2.0 ** -4, u_max=1e32, v_max=4e32, stretch=1 / 16, uniform_radius=4.0)


def weak_null_chain(amplitude: float, grid: Grid | None = None, rho: float = 0.25,
                    fit_window: tuple[float, float] = (1e2, 1e6)) -> ChainReport:
    """Evolve Box phi_{k+1} = phi_k^2 (k = 1..3) from velocity data on phi_1.

    Rates are fitted along r/t = rho inside ``fit_window``; the obstruction
    point is the earliest lattice node where |d_v (r phi_4)| reaches 1.
    """
    from .decay import weak_null_chain_system

    base = weak_null_chain_system()
    sys = WaveSystem(3, base.fields, base.terms, {"phi1": DataSpec(amplitude=amplitude)})
    grid = grid or chain_grid()
    ev = evolve(sys, grid, threshold=math.inf)
    lo, hi = fit_window
    fits = []
    for q in ("psi", "phi", "dv_psi", "dv_phi"):
        p = ev.probe("fixed_rho", rho, "phi4", q, samples=80, t_min=lo / 10, t_max=hi)
        fits.append(p.fit())
    dv = ev._grid_values("dv_psi", 3)
    gu, gv = ev.g[:ev.nu], ev.g[:ev.nv]
    T = gu[:, None] + gv[None, :]
    mask = np.isfinite(dv) & (np.abs(dv) >= 1) & (gv[None, :] > gu[:, None]) & (T > 0)
    obstruction = None
    if mask.any():
        idx = np.argwhere(mask)
        k = np.argmin(T[mask])
        a, b = idx[k]
        obstruction = (float(gu[a]), float(gv[b]), float(gu[a] + gv[b]))
    return ChainReport(amplitude, *fits, obstruction, rho)
