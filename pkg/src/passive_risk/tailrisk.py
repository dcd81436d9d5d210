"""Empirical Value-at-Risk and Expected Shortfall.

Both are reported in return units, so losses are negative numbers and
``es <= var``. VaR is the lower order statistic ``r_(ceil(alpha n))`` with no
interpolation; ES averages every return at or below it.
"""
from dataclasses import dataclass
import math
import warnings

import numpy as np

from .errors import EmptyInput, ValidationError
from .timeseries import ReturnSeries


def order_index(p, n):
    """Zero-based index of the order statistic ``x_(ceil(p n))``, clipped to [0, n-1]."""
    # round first so that e.g. 0.07 * 100 is not pushed to the next integer
    k = math.ceil(round(p * n, 9))
    return min(max(k, 1), n) - 1


def _returns(returns, alpha):
    x = returns.values if isinstance(returns, ReturnSeries) else np.asarray(returns, dtype=float)
    x = np.ravel(x)
    if x.size == 0:
        raise EmptyInput("no returns")
    if not 0 < alpha < 1:
        raise ValidationError("alpha must lie in (0, 1)")
    if x.size < math.ceil(1 / alpha):
        warnings.warn(f"only {x.size} returns for alpha={alpha}; VaR is the sample minimum",
                      stacklevel=3)
    return x


def empirical_var(returns, alpha=0.05):
    """alpha-quantile of the empirical return distribution (lower order statistic)."""
    x = np.sort(_returns(returns, alpha))
    return float(x[order_index(alpha, len(x))])


def empirical_es(returns, alpha=0.05):
    """Mean of the returns at or below the empirical VaR."""
    x = _returns(returns, alpha)
    v = float(np.sort(x)[order_index(alpha, len(x))])
    return _tail_mean(x[x <= v], v)


def _tail_mean(tail, v):
    # summation rounding can push the mean of a flat tail just above v
    return min(float(tail.mean()), v)


@dataclass(frozen=True)
class TailRiskReport:
    alpha: float
    var_alpha: float
    es_alpha: float
    n_tail: int

    def to_dict(self):
        return {"alpha": self.alpha, "var": self.var_alpha, "es": self.es_alpha,
                "n_tail": self.n_tail}


def tail_risk(returns, alpha=0.05):
    x = _returns(returns, alpha)
    v = float(np.sort(x)[order_index(alpha, len(x))])
    tail = x[x <= v]
    return TailRiskReport(alpha, v, _tail_mean(tail, v), int(tail.size))
