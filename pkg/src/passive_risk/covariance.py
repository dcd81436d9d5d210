"""Covariance estimation when the number of assets can exceed the sample size.

The posterior uses the convention ``mode(IW(nu, Psi)) = Psi / (nu + P + 1)``
and ``mean(IW(nu, Psi)) = Psi / (nu - P - 1)``. Under this convention the
sample enters the posterior scale through its scatter matrix
``(n - 1) * S``, where ``S`` is the usual unbiased sample covariance.
"""
from dataclasses import dataclass
import math

import numpy as np
from scipy.linalg import cholesky, solve_triangular

from . import _rng
from .errors import (
    ImproperPosterior,
    InsufficientData,
    InvalidPrior,
    ShapeError,
    ValidationError,
)
from .timeseries import ReturnPanel

PROVENANCES = ("sample", "posterior-mode", "posterior-draw", "factor-model")


@dataclass(frozen=True)
class CovarianceEstimate:
    matrix: np.ndarray
    provenance: str = "sample"
    rank: int = None
    nobs: int = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim == 0:
            m = m.reshape(1, 1)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ShapeError("covariance must be a square matrix")
        if not np.allclose(m, m.T, rtol=0, atol=1e-12 * max(1.0, np.abs(m).max())):
            raise ValidationError("covariance must be symmetric")
        if self.provenance not in PROVENANCES:
            raise ValidationError(f"unknown provenance {self.provenance!r}")
        m = 0.5 * (m + m.T)
        object.__setattr__(self, "matrix", m)
        if self.rank is None:
            object.__setattr__(self, "rank", int(np.linalg.matrix_rank(m, hermitian=True)))

    @property
    def P(self):
        return self.matrix.shape[0]

    def is_positive_definite(self):
        try:
            np.linalg.cholesky(self.matrix)
        except np.linalg.LinAlgError:
            return False
        return True


def _as_matrix(x):
    if isinstance(x, CovarianceEstimate):
        return x.matrix
    if isinstance(x, ReturnPanel):
        return x.matrix
    return np.asarray(x, dtype=float)


def sample_covariance(panel):
    """Unbiased sample covariance of the rows of an n x P panel."""
    r = _as_matrix(panel)
    if r.ndim == 1:
        r = r[:, None]
    n = r.shape[0]
    if n < 2:
        raise InsufficientData("sample covariance needs n >= 2")
    d = r - r.mean(axis=0)
    s = d.T @ d / (n - 1)
    return CovarianceEstimate(s, "sample", nobs=n)


@dataclass(frozen=True)
class InverseWishartPosterior:
    """Conjugate posterior ``IW(prior_df + n - 1, prior_scale + (n - 1) S)``."""

    prior_df: float
    prior_scale: np.ndarray
    sample: np.ndarray
    n: int

    @property
    def P(self):
        return self.prior_scale.shape[0]

    @property
    def df(self):
        return self.prior_df + self.n - 1

    @property
    def scatter(self):
        return (self.n - 1) * self.sample

    @property
    def scale(self):
        return self.prior_scale + self.scatter

    def mean(self):
        if self.df <= self.P + 1:
            raise ImproperPosterior("posterior mean needs df > P + 1")
        return self.scale / (self.df - self.P - 1)


def prior_df_rule(P, n, c):
    """Prior degrees of freedom ``max(P - n, 0) + c``."""
    return max(P - n, 0) + c


def build_posterior(sample, n=None, prior_scale=None, c=3.0):
    """Inverse-Wishart posterior for the covariance given a sample covariance.

    Parameters
    ----------
    sample : CovarianceEstimate or ndarray
        Unbiased sample covariance ``S``.
    n : int, optional
        Number of observations behind ``S``; read from ``sample.nobs`` if omitted.
    prior_scale : ndarray, optional
        Positive definite prior scale. Defaults to ``tau * I`` with ``tau`` the
        average sample variance.
    c : float
        Positive offset in the prior degrees of freedom.
    """
    s = _as_matrix(sample)
    if n is None:
        n = getattr(sample, "nobs", None)
        if n is None:
            raise ValidationError("number of observations is required")
    n = int(n)
    if n < 2:
        raise InsufficientData("need at least two observations")
    if c <= 0:
        raise InvalidPrior("c must be positive")
    P = s.shape[0]
    if prior_scale is None:
        tau = float(np.trace(s)) / P
        if tau <= 0:
            raise InvalidPrior("default prior scale needs positive average variance")
        prior_scale = tau * np.eye(P)
    prior_scale = np.asarray(prior_scale, dtype=float)
    if prior_scale.shape != s.shape:
        raise ShapeError("prior scale does not match the sample covariance")
    try:
        np.linalg.cholesky(prior_scale)
    except np.linalg.LinAlgError:
        raise InvalidPrior("prior scale must be positive definite") from None
    if not np.allclose(prior_scale, prior_scale.T):
        raise InvalidPrior("prior scale must be symmetric")
    return InverseWishartPosterior(prior_df_rule(P, n, c), prior_scale, s, n)


def shrinkage_weight(prior_df, n, P):
    """Weight ``q`` on the prior mode in the posterior mode."""
    return (prior_df + P + 1) / (prior_df + n + P)


def posterior_mode(post):
    """Posterior mode as a shrinkage of the prior mode towards ``S``.

    ``q * Psi / (n0 + P + 1) + (1 - q) * S`` with ``q = (n0 + P + 1) / (n0 + n + P)``;
    algebraically equal to ``(Psi + (n - 1) S) / (n0 + n + P)``.
    """
    P, n, n0 = post.P, post.n, post.prior_df
    q = shrinkage_weight(n0, n, P)
    m = q * post.prior_scale / (n0 + P + 1) + (1 - q) * post.sample
    return CovarianceEstimate(m, "posterior-mode", rank=P, nobs=n)


def posterior_mode_direct(post):
    return post.scale / (post.prior_df + post.n + post.P)


def _check_proper(post):
    if post.df <= post.P - 1:
        raise ImproperPosterior(f"df={post.df} must exceed P-1={post.P - 1}")


def _draw(chol, df, rng):
    # Bartlett factor of W(df, Psi^{-1}) is C^{-T} A with Psi = C C^T; the
    # inverse-Wishart draw is (C A^{-T})(C A^{-T})^T, computed by triangular solves
    P = chol.shape[0]
    A = np.tril(rng.standard_normal((P, P)), -1)
    A[np.diag_indices(P)] = np.sqrt(rng.chisquare(df - np.arange(P)))
    X = solve_triangular(A, chol.T, lower=True, check_finite=False)
    sigma = X.T @ X
    return 0.5 * (sigma + sigma.T)


def sample_posterior(post, seed, index=0):
    """One inverse-Wishart draw from the posterior, keyed by ``(seed, index)``."""
    _check_proper(post)
    chol = cholesky(post.scale, lower=True)
    m = _draw(chol, post.df, _rng.stream(seed, index))
    return CovarianceEstimate(m, "posterior-draw", rank=post.P, nobs=post.n)


def sample_posterior_many(post, n_draws, seed, workers=1):
    """``n_draws`` posterior draws stacked as an array of shape (n_draws, P, P).

    Draw ``i`` depends only on ``(seed, i)``.
    """
    _check_proper(post)
    chol = cholesky(post.scale, lower=True)
    draws = _rng.indexed_map(lambda i: _draw(chol, post.df, _rng.stream(seed, i)),
                             int(n_draws), workers)
    return np.stack(draws)


def inverse_wishart_draws(df, scale, n_draws, seed):
    """Draws from ``IW(df, scale)`` without a posterior wrapper."""
    scale = np.atleast_2d(np.asarray(scale, dtype=float))
    if df <= scale.shape[0] - 1:
        raise ImproperPosterior("df must exceed P - 1")
    chol = cholesky(scale, lower=True)
    return np.stack([_draw(chol, df, _rng.stream(seed, i)) for i in range(int(n_draws))])


def frobenius(a, b):
    return math.sqrt(float(np.sum((np.asarray(a) - np.asarray(b)) ** 2)))
