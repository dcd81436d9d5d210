"""CAPM and k-factor regressions of asset risk premia on factor risk premia."""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .covariance import CovarianceEstimate
from .errors import InsufficientData, ShapeError, SingularDesign, ValidationError
from .timeseries import ReturnPanel

_RANK_TOL = 1e-10


@dataclass(frozen=True)
class FactorDesign:
    """n x (k+1) design matrix whose first column is the intercept."""

    matrix: np.ndarray
    factors: tuple = ("market",)
    risk_free_rate: float = 0.0

    def __post_init__(self):
        X = np.asarray(self.matrix, dtype=float)
        if X.ndim != 2:
            raise ShapeError("design must be two-dimensional")
        if not np.all(X[:, 0] == 1.0):
            raise ValidationError("first design column must be all ones")
        if len(self.factors) != X.shape[1] - 1:
            raise ShapeError("one label per factor column is required")
        if X.shape[0] <= X.shape[1]:
            raise InsufficientData(f"need n > k + 1, got n={X.shape[0]}, k+1={X.shape[1]}")
        object.__setattr__(self, "matrix", X)
        object.__setattr__(self, "factors", tuple(self.factors))

    @classmethod
    def from_factors(cls, factors, labels=None, risk_free_rate=0.0):
        f = np.asarray(factors, dtype=float)
        if f.ndim == 1:
            f = f[:, None]
        if labels is None:
            labels = ("market",) if f.shape[1] == 1 else tuple(f"f{i}" for i in range(f.shape[1]))
        return cls(np.column_stack([np.ones(len(f)), f]), tuple(labels), risk_free_rate)

    @property
    def n(self):
        return self.matrix.shape[0]

    @property
    def k(self):
        return self.matrix.shape[1] - 1

    @property
    def coefficient_names(self):
        if self.k == 1:
            return ("alpha", "beta")
        return ("alpha",) + tuple(f"beta_{f}" for f in self.factors)


@dataclass(frozen=True)
class FactorFit:
    """Per-asset OLS fit. Coefficients are stored one column per asset."""

    coefficients: np.ndarray
    stderr: np.ndarray
    residuals: np.ndarray
    sigma2: np.ndarray
    r_squared: np.ndarray
    assets: tuple
    coefficient_names: tuple
    dof: int

    @property
    def alpha(self):
        return self.coefficients[0]

    @property
    def beta(self):
        return self.coefficients[1]

    @property
    def slopes(self):
        return self.coefficients[1:]

    def fitted(self, design):
        return design.matrix @ self.coefficients

    def table(self):
        """Rows of (asset, coefficient, estimate, stderr)."""
        out = []
        for j, asset in enumerate(self.assets):
            for i, name in enumerate(self.coefficient_names):
                out.append((asset, name, float(self.coefficients[i, j]), float(self.stderr[i, j])))
        return out


def risk_premium(panel, risk_free_annual, periods_per_year=252):
    """Subtract the per-period risk-free rate ``risk_free_annual / periods_per_year``."""
    if panel.kind != "log-return":
        raise ValidationError("risk premia are built from a log-return panel")
    rf = risk_free_annual / periods_per_year
    return ReturnPanel(panel.matrix - rf, panel.assets, panel.dates, kind="risk-premium")


def market_design(panel, market, risk_free_annual=0.0, periods_per_year=252):
    """Split a risk-premium panel into a single-factor design and the asset panel."""
    others = tuple(a for a in panel.assets if a != market)
    design = FactorDesign.from_factors(panel.column(market), (market,),
                                       risk_free_annual / periods_per_year)
    return design, panel.select(others)


class _Factorization:
    # thin QR of the design shared by all asset columns
    def __init__(self, X):
        self.q, self.r = np.linalg.qr(X)
        d = np.abs(np.diag(self.r))
        if d.min() <= _RANK_TOL * d.max():
            raise SingularDesign("design matrix is rank deficient")
        self.rinv = np.linalg.solve(self.r, np.eye(self.r.shape[0]))

    def solve(self, Y):
        return self.rinv @ (self.q.T @ Y)


def ols(X, Y):
    """Least-squares coefficients via QR. ``Y`` may be a vector or a matrix."""
    return _Factorization(np.asarray(X, dtype=float)).solve(np.asarray(Y, dtype=float))


def fit_capm(design, panel):
    """Fit every asset column of ``panel`` on ``design`` by least squares.

    Residual variances use the unbiased divisor ``n - (k + 1)``; standard
    errors are the homoskedastic OLS ones.
    """
    Y = panel.matrix if isinstance(panel, ReturnPanel) else np.asarray(panel, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    assets = panel.assets if isinstance(panel, ReturnPanel) else tuple(
        f"asset{j}" for j in range(Y.shape[1]))
    X = design.matrix
    if Y.shape[0] != X.shape[0]:
        raise ShapeError("design and panel have different numbers of rows")
    fac = _Factorization(X)
    B = fac.solve(Y)
    resid = Y - X @ B
    dof = X.shape[0] - X.shape[1]
    sigma2 = np.sum(resid ** 2, axis=0) / dof
    xtx_inv_diag = np.sum(fac.rinv ** 2, axis=1)
    stderr = np.sqrt(np.outer(xtx_inv_diag, sigma2))
    centered = Y - Y.mean(axis=0)
    sst = np.sum(centered ** 2, axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = np.where(sst > 0, 1.0 - np.sum(resid ** 2, axis=0) / sst, 1.0)
    return FactorFit(B, stderr, resid, sigma2, r2, tuple(assets),
                     design.coefficient_names, dof)


class CovarianceDecomposition(NamedTuple):
    systematic: CovarianceEstimate
    idiosyncratic: CovarianceEstimate
    total: CovarianceEstimate


def decompose_covariance(fit, factor_cov):
    """Model-implied covariance ``B' Sigma_X B + diag(sigma_i^2)``.

    ``factor_cov`` is the k x k covariance of the factor columns (intercept
    excluded); ``B`` holds the slope rows of the fit.
    """
    sx = factor_cov.matrix if isinstance(factor_cov, CovarianceEstimate) else np.atleast_2d(
        np.asarray(factor_cov, dtype=float))
    slopes = fit.slopes
    if sx.shape != (slopes.shape[0], slopes.shape[0]):
        raise ShapeError(f"factor covariance {sx.shape} does not match {slopes.shape[0]} factors")
    systematic = slopes.T @ sx @ slopes
    systematic = 0.5 * (systematic + systematic.T)
    idio = np.diag(fit.sigma2)
    return CovarianceDecomposition(
        CovarianceEstimate(systematic, "factor-model"),
        CovarianceEstimate(idio, "factor-model"),
        CovarianceEstimate(systematic + idio, "factor-model"),
    )
