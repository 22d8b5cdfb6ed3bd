"""Power-law (times log-power) rate fits for time series."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class FitError(ValueError):
    pass


@dataclass
class DecayFit:
    exponent: float  # s in |value| ~ c t^{-s} log^k t; negative means growth
    log_power: int
    r2: float
    sign_change: bool
    samples: int

    def as_dict(self) -> dict:
        return {"exponent": self.exponent, "log_power": self.log_power, "r2": self.r2,
                "sign_change": self.sign_change, "samples": self.samples}


def _dyadic_envelope(t: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    bins = np.floor(np.log2(t)).astype(int)
    ts, ys = [], []
    for b in np.unique(bins):
        sel = np.flatnonzero(bins == b)
        k = sel[np.argmax(np.abs(y[sel]))]
        ts.append(t[k])
        ys.append(abs(y[k]))
    return np.asarray(ts), np.asarray(ys)


def fit_decay(t, values, transient_decades: float = 1.0, min_samples: int = 12,
              min_decades: float = 2.0, log_powers=(0, 1, 2, 3)) -> DecayFit:
    """Least-squares fit of ``log|value| = log c - s log t + k log log t``.

    The first ``transient_decades`` of the series are dropped before fitting;
    ``k`` is the candidate with the smallest residual (smallest k on ties).
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise FitError("t and values must be 1-d arrays of equal length")
    if len(t) < min_samples:
        raise FitError(f"need at least {min_samples} samples")
    if np.any(np.diff(t) <= 0) or t[0] <= 0:
        raise FitError("sample times must be positive and strictly increasing")
    if np.log10(t[-1] / t[0]) < min_decades - 1e-9:
        raise FitError(f"samples must span at least {min_decades} decades")
    keep = t >= t[0] * 10.0 ** transient_decades
    keep &= t > np.e  # log log t must be defined and positive
    t, y = t[keep], y[keep]
    if len(t) < 3:
        raise FitError("too few samples left after the transient window")
    sign_change = bool(np.any(y == 0) or (np.any(y > 0) and np.any(y < 0)))
    if sign_change:
        t, y = _dyadic_envelope(t, y)
        if len(t) < 3:
            raise FitError("envelope has too few points")
    ly, lt, llt = np.log(np.abs(y)), np.log(t), np.log(np.log(t))
    design = np.column_stack([np.ones_like(lt), lt])
    best = None
    for k in log_powers:
        target = ly - k * llt
        coef, *_ = np.linalg.lstsq(design, target, rcond=None)
        resid = target - design @ coef
        ss = float(resid @ resid)
        tot = float(((target - target.mean()) ** 2).sum())
        # an exact fit of a flat series leaves only rounding noise in both sums
        r2 = 1.0 if ss <= 1e-20 * len(t) else 1.0 - ss / tot
        if best is None or ss < best[0] * (1 - 1e-9) - 1e-14:
            best = (ss, k, -float(coef[1]), r2)
    _, k, s, r2 = best
    return DecayFit(s, k, r2, sign_change, len(t))


def loglog_slope(t, values) -> float:
    """Plain least-squares slope of log|value| against log t."""
    t = np.asarray(t, dtype=float)
    y = np.abs(np.asarray(values, dtype=float))
    return float(np.polyfit(np.log(t), np.log(y), 1)[0])
