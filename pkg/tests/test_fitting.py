import numpy as np
import pytest
from hypothesis import given, strategies as st

from carpetlab.fitting import (
    CONVERGENT,
    DIVERGENT,
    UNDECIDED,
    final_decade_increment,
    fit_growth,
    geometric_schedule,
    verdict,
)


@given(st.floats(-2.0, 3.0), st.floats(0.1, 10.0))
def test_exact_power_recovered(p, scale):
    ns = geometric_schedule(10_000)
    fit = fit_growth(ns, scale * ns.astype(float) ** p)
    assert fit.exponent == pytest.approx(p, abs=1e-9)
    if abs(p) > 1e-3:
        assert fit.r2 == pytest.approx(1.0)


def test_window_is_last_two_decades():
    ns = geometric_schedule(10**6)
    fit = fit_growth(ns, ns.astype(float))
    assert fit.window == (10**4, 10**6)


def test_schedule_shape():
    ns = geometric_schedule(1000)
    assert ns[0] == 1 and ns[-1] == 1000
    assert np.all(np.diff(ns) > 0)


def test_too_few_points():
    with pytest.raises(ValueError, match="insufficient points"):
        fit_growth([1, 2], [1.0, 2.0])


def test_increment_and_verdicts():
    n = np.arange(1, 10_001)
    cum = np.cumsum(1.0 / n**3)
    inc = final_decade_increment(cum)
    assert inc == pytest.approx(1.0 / 1001**3, rel=1e-12)
    flat = fit_growth(n[::100], cum[::100])
    assert verdict(flat, inc) == CONVERGENT
    slow = np.cumsum(1.0 / n**2)
    slow_inc = final_decade_increment(slow)
    assert verdict(fit_growth(n[::100], slow[::100]), slow_inc) == UNDECIDED
    assert verdict(fit_growth(n[::100], slow[::100]), slow_inc, cauchy_tol=1e-5) == CONVERGENT
    grow = fit_growth(n[::100], np.cumsum(np.ones(10_000))[::100])
    assert verdict(grow, 1.0) == DIVERGENT
