"""Market-efficiency test battery.

Augmented Dickey-Fuller (constant + linear trend), Ljung-Box, and a
normality test (Shapiro-Wilk with Royston's approximation, falling back to a
skewness/kurtosis moment test above 5000 observations), plus the four-step
random-walk check applied to an index.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .errors import DegenerateInput, InsufficientData, ValidationError
from .special import chi2_sf, norm_ppf, norm_sf
from .timeseries import PriceSeries, ReturnSeries

LEVELS = (0.01, 0.05, 0.10)

# Dickey-Fuller tau critical values, regression with constant and trend
# rows: sample sizes; columns: lower-tail probabilities
DF_SAMPLE_SIZES = np.array([25.0, 50.0, 100.0, 250.0, 500.0, 100000.0])
DF_PROBS = np.array([0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99])
DF_TREND_TABLE = -np.array([
    [4.38, 3.95, 3.60, 3.24, 1.14, 0.80, 0.50, 0.15],
    [4.15, 3.80, 3.50, 3.18, 1.19, 0.87, 0.58, 0.24],
    [4.04, 3.73, 3.45, 3.15, 1.22, 0.90, 0.62, 0.28],
    [3.99, 3.69, 3.43, 3.13, 1.23, 0.92, 0.64, 0.31],
    [3.98, 3.68, 3.42, 3.13, 1.24, 0.93, 0.65, 0.32],
    [3.96, 3.66, 3.41, 3.12, 1.25, 0.94, 0.66, 0.33],
])


@dataclass
class TestResult:
    """Outcome of a single hypothesis test."""

    __test__ = False  # not a pytest class

    statistic: float
    p_value: float
    lags_used: int
    null_hypothesis: str
    method: str
    decision_at: dict = field(default_factory=dict)
    clamped: bool = False
    nobs: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p-value {self.p_value} outside [0, 1]")
        if not self.decision_at:
            self.decision_at = {a: bool(self.p_value <= a) for a in LEVELS}

    def reject(self, level=0.05):
        return bool(self.p_value <= level)

    def to_dict(self):
        return {
            "method": self.method,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "lags_used": self.lags_used,
            "nobs": self.nobs,
            "null_hypothesis": self.null_hypothesis,
            "clamped": self.clamped,
            "reject": {str(k): v for k, v in self.decision_at.items()},
        }


def _values(series):
    if isinstance(series, (PriceSeries, ReturnSeries)):
        return series.values
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ValidationError("series must be one-dimensional")
    return x


def default_adf_lags(nobs):
    """Lag order ``floor((n - 1) ** (1/3))`` for a series of ``nobs`` levels."""
    return int(math.floor((nobs - 1) ** (1.0 / 3.0) + 1e-12))


def adf_regression(x, lags):
    """Design and response of the augmented Dickey-Fuller regression.

    Regresses ``dx_t`` on a constant, a time trend, the lagged level
    ``x_{t-1}`` and ``lags`` lagged differences. Returns ``(X, y)`` with the
    lagged level in column 0.
    """
    dx = np.diff(x)
    n = len(dx)
    k = lags + 1
    rows = np.arange(k - 1, n)
    cols = [x[rows], np.ones(len(rows)), rows + 1.0]
    cols += [dx[rows - j] for j in range(1, k)]
    return np.column_stack(cols), dx[rows]


def _df_pvalue(stat, n):
    crit = np.array([np.interp(n, DF_SAMPLE_SIZES, DF_TREND_TABLE[:, j])
                     for j in range(len(DF_PROBS))])
    clamped = bool(stat < crit[0] or stat > crit[-1])
    return float(np.interp(stat, crit, DF_PROBS)), clamped


def adf_test(series, lag_order="auto"):
    """Augmented Dickey-Fuller unit-root test with constant and linear trend.

    Parameters
    ----------
    series : array_like, PriceSeries or ReturnSeries
        Levels to test (log-prices, or returns for the second step).
    lag_order : int or "auto"
        Number of lagged differences; ``"auto"`` uses ``floor((n-1)^(1/3))``.

    Returns
    -------
    TestResult
        ``statistic`` is the t-ratio on the lagged level. The p-value is
        interpolated in the Dickey-Fuller trend table and clamped to
        [0.01, 0.99]; ``clamped`` flags when that happened.
    """
    x = _values(series)
    if len(x) < 25:
        raise InsufficientData(f"ADF needs at least 25 observations, got {len(x)}")
    if np.ptp(x) == 0:
        raise DegenerateInput("constant series")
    lags = default_adf_lags(len(x)) if lag_order == "auto" else int(lag_order)
    if lags < 0:
        raise ValidationError("lag order must be non-negative")
    X, y = adf_regression(x, lags)
    if X.shape[0] <= X.shape[1]:
        raise InsufficientData("too many lags for the sample size")

    q, r = np.linalg.qr(X)
    if np.min(np.abs(np.diag(r))) <= 1e-12 * np.max(np.abs(np.diag(r))):
        raise DegenerateInput("ADF regression design is singular")
    coef = np.linalg.solve(r, q.T @ y)
    resid = y - X @ coef
    dof = X.shape[0] - X.shape[1]
    sigma2 = resid @ resid / dof
    rinv_row = np.linalg.solve(r.T, np.eye(r.shape[0])[:, 0])
    se = math.sqrt(sigma2 * (rinv_row @ rinv_row))
    if se == 0:
        raise DegenerateInput("perfect fit in ADF regression")
    stat = float(coef[0] / se)
    p, clamped = _df_pvalue(stat, len(x) - 1)
    return TestResult(stat, p, lags, "unit root (non-stationary)", "adf-trend",
                      clamped=clamped, nobs=len(x))


def autocorrelation(x, nlags):
    """Sample autocorrelations at lags 1..nlags with the n-denominator estimator."""
    x = np.asarray(x, dtype=float)
    d = x - x.mean()
    denom = d @ d
    if denom == 0:
        raise DegenerateInput("zero-variance series")
    return np.array([d[h:] @ d[:-h] / denom for h in range(1, nlags + 1)])


def ljung_box(series, H=10):
    """Ljung-Box portmanteau test of zero autocorrelation up to lag ``H``.

    ``Q = n (n + 2) sum_h rho_h^2 / (n - h)``, referred to a chi-square with
    ``H`` degrees of freedom.
    """
    x = _values(series)
    n = len(x)
    H = int(H)
    if H < 1 or n <= H:
        raise ValidationError(f"need 1 <= H < n, got H={H}, n={n}")
    rho = autocorrelation(x, H)
    q = float(n * (n + 2) * np.sum(rho ** 2 / (n - np.arange(1, H + 1))))
    return TestResult(q, min(1.0, chi2_sf(q, H)), H, "no autocorrelation up to lag H",
                      "ljung-box", nobs=n)


_SW_C1 = (0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056)
_SW_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_SW_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_SW_C6 = (-0.4803, -0.082676, 0.0030302)


def _poly(coef, x):
    return sum(c * x ** i for i, c in enumerate(coef))


def shapiro_wilk_coefficients(n):
    """Royston's approximation to the Shapiro-Wilk weights for sample size ``n``."""
    half = n // 2
    m = norm_ppf((np.arange(1, half + 1) - 0.375) / (n + 0.25))
    summ2 = 2.0 * m @ m
    ssumm2 = math.sqrt(summ2)
    rsn = 1.0 / math.sqrt(n)
    a1 = _poly(_SW_C1, rsn) - m[0] / ssumm2
    if n > 5:
        a2 = -m[1] / ssumm2 + _poly(_SW_C2, rsn)
        fac = math.sqrt((summ2 - 2 * m[0] ** 2 - 2 * m[1] ** 2)
                        / (1 - 2 * a1 ** 2 - 2 * a2 ** 2))
        a = -m / fac
        a[1] = a2
    else:
        fac = math.sqrt((summ2 - 2 * m[0] ** 2) / (1 - 2 * a1 ** 2))
        a = -m / fac
    a[0] = a1
    # antisymmetric weights for the ascending order statistics
    full = np.zeros(n)
    full[:half] = -a
    full[n - half:] = a[::-1]
    return full


def shapiro_wilk(x):
    """Shapiro-Wilk W and its p-value (Royston 1995), valid for 12 <= n <= 5000."""
    x = np.sort(np.asarray(x, dtype=float))
    n = len(x)
    if n < 12:
        raise InsufficientData("Shapiro-Wilk needs at least 12 observations")
    if np.ptp(x) == 0:
        raise DegenerateInput("constant series")
    a = shapiro_wilk_coefficients(n)
    xc = (x - x.mean()) / np.ptp(x)
    w = (a @ xc) ** 2 / ((a @ a) * (xc @ xc))
    w = min(w, 1.0)
    ln_n = math.log(n)
    mu = _poly(_SW_C5, ln_n)
    sd = math.exp(_poly(_SW_C6, ln_n))
    p = 1.0 if w >= 1.0 else norm_sf((math.log(1.0 - w) - mu) / sd)
    return float(w), float(p)


def moment_normality(x):
    """Skewness/kurtosis (Jarque-Bera) statistic with its chi-square(2) p-value."""
    x = np.asarray(x, dtype=float)
    d = x - x.mean()
    m2 = d @ d / len(x)
    if m2 == 0:
        raise DegenerateInput("constant series")
    skew = np.mean(d ** 3) / m2 ** 1.5
    kurt = np.mean(d ** 4) / m2 ** 2
    jb = len(x) / 6.0 * (skew ** 2 + (kurt - 3.0) ** 2 / 4.0)
    return float(jb), float(math.exp(-jb / 2.0))


def normality_test(series):
    """Test Gaussianity: Shapiro-Wilk up to n=5000, moment test beyond."""
    x = _values(series)
    n = len(x)
    if n < 12:
        raise InsufficientData("normality test needs at least 12 observations")
    if n <= 5000:
        w, p = shapiro_wilk(x)
        return TestResult(w, p, 0, "gaussian", "shapiro-wilk", nobs=n)
    jb, p = moment_normality(x)
    return TestResult(jb, p, 0, "gaussian", "jarque-bera", nobs=n)


@dataclass
class EfficiencyVerdict:
    prices_nonstationary: bool
    returns_stationary: bool
    returns_uncorrelated: bool
    returns_gaussian: bool
    steps: dict = field(default_factory=dict)
    level: float = 0.05

    @property
    def verdict(self):
        ok = self.prices_nonstationary and self.returns_stationary and self.returns_uncorrelated
        return "efficient-consistent" if ok else "not-efficient"

    def to_dict(self):
        return {
            "level": self.level,
            "prices_nonstationary": self.prices_nonstationary,
            "returns_stationary": self.returns_stationary,
            "returns_uncorrelated": self.returns_uncorrelated,
            "returns_gaussian": self.returns_gaussian,
            "verdict": self.verdict,
            "steps": {k: v.to_dict() for k, v in self.steps.items()},
        }


def efficiency_battery(prices, H=10, level=0.05, lag_order="auto"):
    """Run the four random-walk checks on an index price series.

    1. ADF on log-prices (expect no rejection: unit root present).
    2. ADF on log-returns (expect rejection: returns stationary).
    3. Ljung-Box on log-returns up to lag ``H`` (expect no rejection).
    4. Normality of log-returns (reported; does not enter the verdict).
    """
    p = _values(prices)
    if np.any(p <= 0):
        raise ValidationError("prices must be positive")
    logp = np.log(p)
    r = np.diff(logp)
    steps = {
        "log_price_unit_root": adf_test(logp, lag_order),
        "log_return_unit_root": adf_test(r, lag_order),
        "log_return_autocorrelation": ljung_box(r, H),
        "log_return_normality": normality_test(r),
    }
    return EfficiencyVerdict(
        prices_nonstationary=not steps["log_price_unit_root"].reject(level),
        returns_stationary=steps["log_return_unit_root"].reject(level),
        returns_uncorrelated=not steps["log_return_autocorrelation"].reject(level),
        returns_gaussian=not steps["log_return_normality"].reject(level),
        steps=steps,
        level=level,
    )
