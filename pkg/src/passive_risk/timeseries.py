"""Return algebra: net, gross and log returns, compounding, horizon volatility."""
from dataclasses import dataclass, field
import math

import numpy as np

from .errors import DomainError, EmptyWindow, ShapeError, ValidationError


def _as_dates(dates, n):
    if dates is None:
        return np.arange(n)
    dates = np.asarray(dates)
    if dates.dtype.kind in "OUS":
        dates = dates.astype("datetime64[D]")
    if len(dates) != n:
        raise ShapeError(f"{len(dates)} dates for {n} values")
    return dates


@dataclass(frozen=True)
class PriceSeries:
    """Dated sequence of positive prices for one asset.

    ``dates`` may be omitted, in which case an integer index is used.
    """

    values: np.ndarray
    dates: np.ndarray = None
    name: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise ShapeError("prices must be one-dimensional")
        dates = _as_dates(self.dates, len(values))
        if len(dates) > 1 and np.any(dates[1:] <= dates[:-1]):
            raise ValidationError("dates must be strictly increasing")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "dates", dates)

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class ReturnSeries:
    """Per-period returns dated at the end of each holding period."""

    values: np.ndarray
    dates: np.ndarray = None
    kind: str = "log"
    name: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise ShapeError("returns must be one-dimensional")
        if self.kind not in ("net", "log"):
            raise ValidationError(f"unknown return kind {self.kind!r}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "dates", _as_dates(self.dates, len(values)))

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class ReturnPanel:
    """n x P matrix of returns with a date index and asset labels.

    ``kind`` is ``"log-return"`` or ``"risk-premium"``.
    """

    matrix: np.ndarray
    assets: tuple
    dates: np.ndarray = None
    kind: str = "log-return"
    dropped_rows: int = field(default=0, compare=False)

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        if matrix.ndim == 1:
            matrix = matrix[:, None]
        if matrix.ndim != 2:
            raise ShapeError("panel matrix must be two-dimensional")
        assets = tuple(str(a) for a in self.assets)
        if len(assets) != matrix.shape[1]:
            raise ShapeError(f"{len(assets)} labels for {matrix.shape[1]} columns")
        if len(set(assets)) != len(assets):
            raise ValidationError("asset labels must be unique")
        if not np.all(np.isfinite(matrix)):
            raise ValidationError("panel has missing or non-finite cells")
        if self.kind not in ("log-return", "risk-premium"):
            raise ValidationError(f"unknown panel kind {self.kind!r}")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "assets", assets)
        object.__setattr__(self, "dates", _as_dates(self.dates, matrix.shape[0]))

    @property
    def n(self):
        return self.matrix.shape[0]

    @property
    def P(self):
        return self.matrix.shape[1]

    def column(self, asset):
        return self.matrix[:, self.assets.index(asset)]

    def select(self, assets):
        idx = [self.assets.index(a) for a in assets]
        return ReturnPanel(self.matrix[:, idx], tuple(assets), self.dates, self.kind)

    def rows(self, mask):
        return ReturnPanel(self.matrix[mask], self.assets, self.dates[mask], self.kind)


def _prices(series):
    if not isinstance(series, PriceSeries):
        series = PriceSeries(np.asarray(series, dtype=float))
    if len(series) < 2:
        raise EmptyWindow("at least two prices are needed for a return")
    return series


def net_return(series):
    """Single-period net returns ``P_t / P_{t-1} - 1``."""
    series = _prices(series)
    p = series.values
    if np.any(p <= 0):
        raise DomainError("prices must be positive")
    return ReturnSeries(p[1:] / p[:-1] - 1.0, series.dates[1:], kind="net", name=series.name)


def gross_return_k(series, k):
    """k-period gross return ``P_t / P_{t-k}`` ending at the last observation."""
    series = _prices(series)
    k = int(k)
    if k < 1 or k >= len(series):
        raise IndexError(f"k={k} outside [1, {len(series) - 1}]")
    p = series.values
    return float(p[-1] / p[-1 - k])


def log_return(series):
    """Single-period log returns ``log P_t - log P_{t-1}``."""
    series = _prices(series)
    p = series.values
    if np.any(p <= 0):
        raise DomainError("log returns need strictly positive prices")
    return ReturnSeries(np.diff(np.log(p)), series.dates[1:], kind="log", name=series.name)


def horizon_volatility(sigma_1, k):
    """Volatility of a k-period sum of iid returns, ``sqrt(k) * sigma_1``."""
    if sigma_1 < 0 or k < 1:
        raise ValidationError("need sigma_1 >= 0 and k >= 1")
    return math.sqrt(k) * sigma_1


def compound(value, rate, m, years):
    """Future value of ``value`` at annual ``rate`` compounded ``m`` times a year."""
    if value <= 0 or m < 1:
        raise ValidationError("need value > 0 and m >= 1")
    # log1p keeps large-m compounding accurate
    return value * math.exp(m * years * math.log1p(rate / m))


def continuous_compound(value, rate, years):
    return value * math.exp(rate * years)


def log_return_panel(prices, assets, dates=None):
    """Log-return panel from an aligned n x P price matrix."""
    prices = np.asarray(prices, dtype=float)
    if prices.ndim == 1:
        prices = prices[:, None]
    if prices.shape[0] < 2:
        raise EmptyWindow("at least two price rows are needed")
    if np.any(prices <= 0):
        raise DomainError("log returns need strictly positive prices")
    dates = _as_dates(dates, prices.shape[0])
    return ReturnPanel(np.diff(np.log(prices), axis=0), assets, dates[1:])
