import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from passive_risk.errors import DomainError, EmptyWindow, ShapeError, ValidationError
from passive_risk.timeseries import (
    PriceSeries,
    ReturnPanel,
    compound,
    continuous_compound,
    gross_return_k,
    horizon_volatility,
    log_return,
    log_return_panel,
    net_return,
)

PRICES = [1000.0, 1040.0, 1035.0, 1050.0]
positive_prices = st.lists(st.floats(0.01, 1e6), min_size=2, max_size=60)


def test_net_return_single_period():
    assert net_return([1000, 1040]).values[0] == pytest.approx(0.04, abs=1e-15)
    assert net_return([100, 100]).values[0] == 0.0


def test_net_return_matches_ratio_oracle():
    expected = [PRICES[i + 1] / PRICES[i] - 1 for i in range(3)]
    np.testing.assert_allclose(net_return(PRICES).values, expected, rtol=0, atol=1e-15)
    assert net_return(PRICES).values[1] == pytest.approx(-0.004807692307, abs=1e-12)


def test_gross_return_k():
    assert gross_return_k(PRICES, 3) == 1.05
    assert gross_return_k(PRICES, 2) == pytest.approx(1050 / 1040, rel=1e-15)
    assert gross_return_k([5.0] * 6, 4) == 1.0


@pytest.mark.parametrize("k", [0, 4, -1])
def test_gross_return_k_out_of_range(k):
    with pytest.raises(IndexError):
        gross_return_k(PRICES, k)


def test_log_return_values():
    assert log_return([1000, 1040]).values[0] == pytest.approx(math.log(1.04), abs=1e-15)
    assert np.all(log_return([7.0] * 10).values == 0.0)


def test_too_few_prices():
    with pytest.raises(EmptyWindow):
        net_return([100.0])
    with pytest.raises(EmptyWindow):
        log_return([])


def test_nonpositive_price_rejected():
    with pytest.raises(DomainError):
        log_return([100.0, 0.0, 3.0])
    with pytest.raises(DomainError):
        net_return([100.0, -1.0])


def test_dates_must_increase():
    with pytest.raises(ValidationError):
        PriceSeries([1.0, 2.0], ["2024-01-02", "2024-01-02"])


def test_returns_dated_at_period_end():
    s = PriceSeries([1.0, 2.0, 4.0], ["2024-01-01", "2024-01-02", "2024-01-03"])
    r = log_return(s)
    assert list(r.dates.astype(str)) == ["2024-01-02", "2024-01-03"]


def test_small_return_taylor_bound():
    R = np.linspace(-0.099, 0.099, 2001)
    r = np.log1p(R)
    assert np.all(np.abs(r - R) <= R ** 2)


@given(positive_prices)
def test_sum_of_log_returns_is_log_gross(prices):
    r = log_return(prices).values
    gross = prices[-1] / prices[0]
    assert math.exp(r.sum()) == pytest.approx(gross, rel=1e-12)
    k = len(prices) - 1
    assert gross_return_k(prices, k) == pytest.approx(math.exp(r.sum()), rel=1e-12)


@given(positive_prices)
def test_net_return_bounded_below(prices):
    assert np.all(net_return(prices).values >= -1.0)


@given(st.floats(0, 10), st.integers(1, 10_000))
def test_horizon_variance_scales_with_k(sigma, k):
    assert horizon_volatility(sigma, k) ** 2 == pytest.approx(k * sigma ** 2, rel=1e-14, abs=0)


def test_horizon_volatility_examples():
    assert horizon_volatility(0.01, 1) == 0.01
    assert horizon_volatility(0.01, 4) == 0.02


def test_horizon_volatility_monte_carlo(rng):
    r = rng.normal(0.0, 0.01, size=(10_000, 252))
    sd = r.sum(axis=1).std(ddof=1)
    assert abs(sd / horizon_volatility(0.01, 252) - 1) < 0.05


def test_compound():
    assert compound(100, 0.07, 1, 1) == pytest.approx(107.0, abs=1e-12)
    assert compound(100, 0.0, 12, 5) == 100.0
    assert abs(compound(100, 0.05, 10 ** 6, 1) - 100 * math.exp(0.05)) < 1e-4
    assert continuous_compound(100, 0.05, 1) == pytest.approx(100 * math.exp(0.05))


def test_panel_validation():
    with pytest.raises(ShapeError):
        ReturnPanel(np.zeros((3, 2)), ("a",))
    with pytest.raises(ValidationError):
        ReturnPanel(np.zeros((3, 2)), ("a", "a"))
    with pytest.raises(ValidationError):
        ReturnPanel(np.array([[0.0, np.nan]]), ("a", "b"))


def test_log_return_panel():
    p = np.array([[1.0, 2.0], [2.0, 2.0], [4.0, 1.0]])
    panel = log_return_panel(p, ("a", "b"), ["2024-01-01", "2024-01-02", "2024-01-03"])
    assert panel.n == 2 and panel.P == 2
    np.testing.assert_allclose(panel.column("a"), [math.log(2)] * 2)
    np.testing.assert_allclose(panel.select(["b"]).matrix[:, 0], [0.0, -math.log(2)])
