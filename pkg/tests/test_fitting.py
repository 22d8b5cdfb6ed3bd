import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wavecrit.fitting import FitError, fit_decay, loglog_slope

T = np.geomspace(1.0, 1e6, 200)


@settings(max_examples=50, deadline=None)
@given(st.floats(-3.0, 3.0), st.floats(1e-3, 1e3))
def test_recovers_pure_power(s, c):
    fit = fit_decay(T, c * T ** -s)
    assert abs(fit.exponent - s) < 1e-8
    assert fit.log_power == 0 and fit.r2 > 0.999999


@pytest.mark.parametrize("k", [1, 2, 3])
def test_recovers_log_power(k):
    fit = fit_decay(T, T ** -1.5 * np.log(T) ** k)
    assert fit.log_power == k
    assert abs(fit.exponent - 1.5) < 1e-8


def test_oscillating_series_uses_envelope():
    y = T ** -2.0 * np.cos(3 * np.log(T))
    fit = fit_decay(T, y)
    assert fit.sign_change
    assert abs(fit.exponent - 2.0) < 0.1


def test_transient_is_dropped():
    y = T ** -1.0 + 50.0 * (T < 5)
    assert abs(fit_decay(T, y).exponent - 1.0) < 1e-6


@pytest.mark.parametrize("t,y", [
    (T[:5], T[:5]),
    (np.geomspace(1, 10, 50), np.ones(50)),
    (T[::-1], T),
    (T, T[:-1]),
])
def test_rejects_bad_series(t, y):
    with pytest.raises(FitError):
        fit_decay(t, y)


def test_loglog_slope():
    assert abs(loglog_slope(T, 4 * T ** 0.75) - 0.75) < 1e-12
