import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats
from statsmodels.stats.diagnostic import acorr_ljungbox
from statsmodels.tsa.stattools import adfuller

from passive_risk.efficiency import (
    TestResult,
    adf_test,
    autocorrelation,
    default_adf_lags,
    efficiency_battery,
    ljung_box,
    moment_normality,
    normality_test,
    shapiro_wilk,
)
from passive_risk.errors import DegenerateInput, InsufficientData


def random_walk(rng, n, drift=0.0):
    return np.cumsum(drift + rng.normal(size=n))


def ar1(rng, n, phi):
    e = rng.normal(size=n)
    x = np.empty(n)
    x[0] = e[0]
    for t in range(1, n):
        x[t] = phi * x[t - 1] + e[t]
    return x


def test_default_lags():
    # R's tseries convention: trunc((length(x) - 1)^(1/3))
    assert default_adf_lags(3375) == 14
    assert default_adf_lags(3376) == 15
    assert default_adf_lags(28) == 3


@pytest.mark.parametrize("lags", [0, 1, 4, 12])
def test_adf_statistic_matches_statsmodels(rng, lags):
    x = random_walk(rng, 600)
    ours = adf_test(x, lags)
    ref = adfuller(x, maxlag=lags, regression="ct", autolag=None)
    assert ours.statistic == pytest.approx(ref[0], rel=1e-10)
    assert ours.lags_used == lags


def test_adf_pvalue_table_interpolation():
    # DF trend-case critical values at n = 500: 1% -3.98, 5% -3.42, 10% -3.13
    from passive_risk.efficiency import _df_pvalue
    assert _df_pvalue(-3.42, 500)[0] == pytest.approx(0.05, abs=2e-3)
    assert _df_pvalue(-3.98, 500)[0] == pytest.approx(0.01, abs=2e-3)
    p, clamped = _df_pvalue(-10.0, 500)
    assert p == 0.01 and clamped
    p, clamped = _df_pvalue(2.0, 500)
    assert p == 0.99 and clamped


def test_adf_random_walk_and_stationary(rng):
    assert adf_test(random_walk(np.random.default_rng(7), 2000)).p_value > 0.10
    res = adf_test(ar1(rng, 2000, 0.5))
    assert res.p_value <= 0.01 and res.clamped


@given(st.floats(0.01, 1e3), st.floats(-1e3, 1e3))
def test_adf_affine_invariance(a, b):
    x = random_walk(np.random.default_rng(3), 300)
    assert adf_test(a * x + b).statistic == pytest.approx(adf_test(x).statistic, abs=1e-8)


def test_adf_errors():
    with pytest.raises(InsufficientData):
        adf_test(np.arange(24.0))
    with pytest.raises(DegenerateInput):
        adf_test(np.ones(100))


def test_autocorrelation_uses_n_denominator(rng):
    x = rng.normal(size=50)
    d = x - x.mean()
    assert autocorrelation(x, 3)[2] == pytest.approx(d[3:] @ d[:-3] / (d @ d), rel=1e-14)


@pytest.mark.parametrize("H", [1, 5, 10, 20])
def test_ljung_box_matches_statsmodels(rng, H):
    x = ar1(rng, 500, 0.1)
    ours = ljung_box(x, H)
    ref = acorr_ljungbox(x, lags=[H])
    assert ours.statistic == pytest.approx(float(ref["lb_stat"].iloc[0]), rel=1e-12)
    assert ours.p_value == pytest.approx(float(ref["lb_pvalue"].iloc[0]), rel=1e-9, abs=1e-15)
    assert ours.lags_used == H


def test_ljung_box_zero_autocorrelation():
    # every lag-1 cross product is zero
    x = np.array([1.0, 0.0, -1.0, 0.0])
    r = autocorrelation(x, 1)
    assert r[0] == 0.0
    res = ljung_box(x, 1)
    assert res.statistic == 0.0 and res.p_value == 1.0


def test_ljung_box_monotone_in_H(rng):
    x = rng.normal(size=300)
    q = [ljung_box(x, H).statistic for H in range(1, 30)]
    assert q[0] >= 0
    assert np.all(np.diff(q) >= 0)


def test_ljung_box_degenerate():
    with pytest.raises(DegenerateInput):
        ljung_box(np.zeros(50), 5)


@pytest.mark.parametrize("n", [12, 20, 50, 200, 1000, 5000])
def test_shapiro_wilk_matches_scipy(n):
    x = np.random.default_rng(n).standard_t(5, size=n)
    w, p = shapiro_wilk(x)
    ref = stats.shapiro(x)
    assert w == pytest.approx(ref.statistic, abs=1e-6)
    assert p == pytest.approx(ref.pvalue, rel=1e-3, abs=1e-8)


def test_normality_switches_to_moment_test_above_5000(rng):
    x = rng.normal(size=6000)
    res = normality_test(x)
    assert res.method == "jarque-bera"
    jb, p = moment_normality(x)
    ref = stats.jarque_bera(x)
    assert jb == pytest.approx(ref.statistic, rel=1e-10)
    assert p == pytest.approx(ref.pvalue, rel=1e-8)


def test_normality_heavy_tails_rejected():
    rejections = sum(
        normality_test(np.random.default_rng(s).standard_t(3, size=1000)).p_value < 0.01
        for s in range(100))
    assert rejections >= 99


def test_normality_too_short():
    with pytest.raises(InsufficientData):
        normality_test(np.arange(11.0))


def test_test_result_decisions():
    r = TestResult(1.0, 0.03, 0, "h0", "x")
    assert r.reject(0.05) and not r.reject(0.01)
    assert r.decision_at[0.05] and not r.decision_at[0.01]
    with pytest.raises(ValueError):
        TestResult(1.0, 1.5, 0, "h0", "x")


def test_battery_on_geometric_random_walk():
    rng = np.random.default_rng(2024)
    prices = 100 * np.exp(np.cumsum(rng.normal(0.0003, 0.01, size=2000)))
    v = efficiency_battery(prices)
    assert v.prices_nonstationary and v.returns_stationary and v.returns_uncorrelated
    assert v.returns_gaussian
    assert v.verdict == "efficient-consistent"


def test_battery_on_autocorrelated_returns():
    rng = np.random.default_rng(5)
    prices = 100 * np.exp(np.cumsum(0.01 * ar1(rng, 2000, 0.3)))
    v = efficiency_battery(prices)
    assert not v.returns_uncorrelated
    assert v.verdict == "not-efficient"
    d = v.to_dict()
    assert d["verdict"] == "not-efficient" and set(d["steps"]) == set(v.steps)
