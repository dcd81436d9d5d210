"""Portfolio construction and volatility-risk decomposition."""
from dataclasses import dataclass, field
import math
import warnings

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from . import _rng
from .covariance import CovarianceEstimate, InverseWishartPosterior, _check_proper, _draw
from .errors import (
    ConvergenceError,
    DegeneratePortfolio,
    InfeasibleTarget,
    InvalidInput,
    ShapeError,
    SingularCovariance,
    ValidationError,
)

SCHEMES = ("index-cap", "equal", "markowitz", "custom")
LONG_ONLY_SCHEMES = ("index-cap", "equal")
_SUM_TOL = 1e-10


@dataclass(frozen=True)
class Portfolio:
    assets: tuple
    weights: np.ndarray
    scheme: str = "custom"
    long_only: bool = None
    info: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        assets = tuple(str(a) for a in self.assets)
        if len(assets) != len(w):
            raise ShapeError(f"{len(assets)} assets for {len(w)} weights")
        if self.scheme not in SCHEMES:
            raise ValidationError(f"unknown scheme {self.scheme!r}")
        if abs(w.sum() - 1.0) > _SUM_TOL:
            raise ValidationError(f"weights sum to {w.sum():.12g}, not 1")
        long_only = self.long_only
        if long_only is None:
            long_only = self.scheme in LONG_ONLY_SCHEMES
        if long_only and np.any(w < 0):
            raise ValidationError(f"{self.scheme} portfolio must be long-only")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "assets", assets)
        object.__setattr__(self, "long_only", bool(long_only))

    @property
    def P(self):
        return len(self.weights)

    @property
    def max_weight(self):
        return float(self.weights.max())

    @classmethod
    def from_mapping(cls, weights, assets=None, scheme="custom", normalize=False):
        """Build from an ``{asset: weight}`` mapping, optionally reordered to ``assets``."""
        assets = tuple(weights) if assets is None else tuple(assets)
        missing = [a for a in assets if a not in weights]
        if missing:
            raise ValidationError(f"no weight for {missing}")
        w = np.array([float(weights[a]) for a in assets])
        if normalize:
            w = w / w.sum()
        return cls(assets, w, scheme)


def _cov(cov, P=None):
    m = cov.matrix if isinstance(cov, CovarianceEstimate) else np.atleast_2d(
        np.asarray(cov, dtype=float))
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError("covariance must be square")
    if P is not None and m.shape[0] != P:
        raise ShapeError(f"covariance is {m.shape[0]}x{m.shape[0]}, portfolio has {P} assets")
    return m


def equal_weight(assets):
    """Portfolio with weight 1/P on each asset."""
    assets = tuple(assets)
    if not assets:
        raise ValidationError("need at least one asset")
    P = len(assets)
    return Portfolio(assets, np.full(P, 1.0 / P), "equal")


def portfolio_volatility(port, cov):
    """``sqrt(w' Sigma w)``."""
    s = _cov(cov, port.P)
    w = port.weights
    return math.sqrt(max(float(w @ s @ w), 0.0))


def idiosyncratic_bound(port, idio):
    """Idiosyncratic variance ``w' D w`` and its bound ``max(D) * max(w)``.

    Holds for long-only weights summing to one.
    """
    d = _cov(idio, port.P)
    if np.any(d != np.diag(np.diag(d))):
        raise InvalidInput("idiosyncratic covariance must be diagonal")
    if np.any(port.weights < 0):
        raise InvalidInput("the bound applies to long-only portfolios")
    var = np.diag(d)
    risk = float(np.sum(port.weights ** 2 * var))
    bound = float(var.max() * port.max_weight)
    assert risk <= bound * (1 + 1e-12) + 1e-300
    return risk, bound


def _factor(s):
    ev = np.linalg.eigvalsh(s)
    if ev[0] <= 1e-12 * max(ev[-1], 0.0) or ev[-1] <= 0:
        raise SingularCovariance("covariance is singular; use the posterior mode when n < P")
    try:
        return cho_factor(s, lower=True)
    except np.linalg.LinAlgError:
        raise SingularCovariance("covariance is not positive definite") from None


def global_minimum_variance(cov, assets=None):
    s = _cov(cov)
    a = cho_solve(_factor(s), np.ones(len(s)))
    w = a / a.sum()
    assets = tuple(assets) if assets is not None else tuple(f"asset{i}" for i in range(len(s)))
    return Portfolio(assets, w, "markowitz", long_only=False)


def _kkt_solve(s, mu, target, free):
    # equality-constrained minimum of w' S w on the free set; lstsq tolerates
    # a redundant return constraint when mu is constant on the free set
    f = np.flatnonzero(free)
    m = len(f)
    K = np.zeros((m + 2, m + 2))
    K[:m, :m] = 2.0 * s[np.ix_(f, f)]
    K[:m, m] = -1.0
    K[:m, m + 1] = -mu[f]
    K[m, :m] = 1.0
    K[m + 1, :m] = mu[f]
    rhs = np.zeros(m + 2)
    rhs[m] = 1.0
    rhs[m + 1] = target
    sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    w = np.zeros(len(mu))
    w[f] = sol[:m]
    return w, sol[m], sol[m + 1]


def _active_set(s, mu, target, tol=1e-12, max_iter=None):
    P = len(mu)
    max_iter = max_iter or max(50, 10 * P)
    lo, hi = int(np.argmin(mu)), int(np.argmax(mu))
    # feasible start on the segment between the lowest- and highest-mean assets
    theta = (target - mu[lo]) / (mu[hi] - mu[lo]) if mu[hi] > mu[lo] else 0.0
    w = np.zeros(P)
    w[lo] += 1.0 - theta
    w[hi] += theta
    free = np.zeros(P, dtype=bool)
    free[[lo, hi]] = True
    for it in range(1, max_iter + 1):
        w_eq, l1, l2 = _kkt_solve(s, mu, target, free)
        p = w_eq - w
        if np.max(np.abs(p)) <= 1e-14:
            nu = 2.0 * s @ w - l1 - l2 * mu
            nu[free] = np.inf
            j = int(np.argmin(nu))
            if nu[j] >= -tol * max(1.0, np.abs(2.0 * s @ w).max()):
                return w_eq, l1, l2, it
            free[j] = True
            continue
        shrinking = free & (p < 0)
        steps = np.full(P, np.inf)
        steps[shrinking] = -w[shrinking] / p[shrinking]
        j = int(np.argmin(steps))
        if steps[j] >= 1.0:
            w = w_eq
        else:
            w = w + steps[j] * p
            w[j] = 0.0
            free[j] = False
    raise ConvergenceError(f"long-only active set did not converge in {max_iter} iterations")


def markowitz_optimize(mean, cov, target_mu, long_only=False, assets=None):
    """Minimum-variance weights with budget and target-return constraints.

    Minimizes ``w' Sigma w`` subject to ``sum(w) = 1`` and ``w' mu = target_mu``.
    The sign-unconstrained problem is solved in closed form from the
    two-multiplier Lagrangian. With ``long_only`` the closed form is kept when
    it has no negative weight; otherwise a primal active-set method over the
    non-negativity constraints finds the exact optimum.

    The returned portfolio's ``info`` holds the multipliers of both equality
    constraints, the KKT residual and the iteration count.
    """
    mu = np.asarray(mean, dtype=float).ravel()
    s = _cov(cov, len(mu))
    P = len(mu)
    assets = tuple(assets) if assets is not None else tuple(f"asset{i}" for i in range(P))
    chol = _factor(s)
    a = cho_solve(chol, np.ones(P))
    b = cho_solve(chol, mu)
    A, B, C = a.sum(), b.sum(), mu @ b
    D = A * C - B * B
    lo, hi = float(mu.min()), float(mu.max())
    spread = hi - lo

    if spread <= 1e-14 * max(abs(hi), 1.0):
        if abs(target_mu - hi) > 1e-12 * max(abs(hi), 1.0):
            raise InfeasibleTarget(f"every asset has mean {hi:.6g}; target {target_mu:.6g} is unattainable")
        warnings.warn("all expected returns are equal; returning the global minimum-variance portfolio",
                      stacklevel=2)
        w, iterations = a / A, 0
        if long_only and np.any(w < 0):
            w, _, _, iterations = _active_set(s, mu, hi)
            w = np.clip(w, 0.0, None)
            w = w / w.sum()
        return Portfolio(assets, w, "markowitz", long_only=long_only,
                         info={"degenerate": True, "iterations": iterations})

    if long_only and not lo - 1e-15 <= target_mu <= hi + 1e-15:
        raise InfeasibleTarget(
            f"target {target_mu:.6g} outside attainable long-only range [{lo:.6g}, {hi:.6g}]")

    # minimiser of w'Sw: 2 S w = l1 1 + l2 mu
    lam = (C - B * target_mu) / D
    gam = (A * target_mu - B) / D
    w = lam * a + gam * b
    l1, l2, iterations = 2.0 * lam, 2.0 * gam, 0
    if long_only and np.any(w < 0):
        w, l1, l2, iterations = _active_set(s, mu, target_mu)
        w = np.clip(w, 0.0, None)
        w = w / w.sum()

    grad = 2.0 * s @ w - l1 - l2 * mu
    support = w > 0 if long_only else np.ones(P, dtype=bool)
    kkt = max(
        float(np.abs(grad[support]).max()) if support.any() else 0.0,
        abs(w.sum() - 1.0),
        abs(w @ mu - target_mu),
    )
    info = {"multipliers": (float(l1), float(l2)), "kkt_residual": kkt,
            "iterations": iterations, "degenerate": False}
    return Portfolio(assets, w, "markowitz", long_only=long_only, info=info)


@dataclass
class RiskDecomposition:
    """Portfolio volatility split into per-asset contributions.

    ``mctr`` is the gradient of volatility in the weights; ``cctr`` is the
    weight-scaled MCTR and sums to ``sigma_P``. Monte Carlo results carry
    posterior means, ``prob_positive`` and optionally the per-draw arrays.
    """

    assets: tuple
    sigma_P: float
    mctr: np.ndarray
    cctr: np.ndarray
    prob_positive: np.ndarray = None
    draws_used: int = 0
    sigma_draws: np.ndarray = field(default=None, repr=False)
    mctr_draws: np.ndarray = field(default=None, repr=False)
    cctr_draws: np.ndarray = field(default=None, repr=False)

    def to_dict(self):
        out = {
            "sigma_P": self.sigma_P,
            "draws_used": self.draws_used,
            "assets": {},
        }
        for j, a in enumerate(self.assets):
            row = {"mctr": float(self.mctr[j]), "cctr": float(self.cctr[j])}
            if self.prob_positive is not None:
                row["prob_cctr_positive"] = float(self.prob_positive[j])
            out["assets"][a] = row
        return out


def _contributions(w, s):
    sw = s @ w
    var = float(w @ sw)
    if var <= 0:
        raise DegeneratePortfolio("portfolio has zero variance")
    sigma = math.sqrt(var)
    mctr = sw / sigma
    return sigma, mctr, w * mctr


def risk_decomposition(port, cov):
    """MCTR ``Sigma w / sigma_P`` and CCTR ``w * MCTR`` for a fixed covariance."""
    s = _cov(cov, port.P)
    sigma, mctr, cctr = _contributions(port.weights, s)
    return RiskDecomposition(port.assets, sigma, mctr, cctr)


def bayes_mc_risk(port, post, N, seed, workers=1, keep_draws=False):
    """Monte Carlo risk contributions under the inverse-Wishart posterior.

    Draw ``i`` uses a stream keyed by ``(seed, i)``: adding draws or workers
    leaves earlier draws unchanged. ``prob_positive[j]`` is the fraction of
    draws with ``cctr_j > 0`` (exact zeros count as not positive).
    """
    if not isinstance(post, InverseWishartPosterior):
        raise ValidationError("post must be an InverseWishartPosterior")
    if post.P != port.P:
        raise ShapeError("posterior dimension does not match the portfolio")
    N = int(N)
    if N < 1:
        raise ValidationError("N must be at least 1")
    _check_proper(post)
    chol = np.linalg.cholesky(post.scale)
    w = port.weights

    def one(i):
        return _contributions(w, _draw(chol, post.df, _rng.stream(seed, i)))

    results = _rng.indexed_map(one, N, workers)
    sigma = np.array([r[0] for r in results])
    mctr = np.vstack([r[1] for r in results])
    cctr = np.vstack([r[2] for r in results])
    out = RiskDecomposition(
        port.assets,
        float(sigma.mean()),
        mctr.mean(axis=0),
        cctr.mean(axis=0),
        prob_positive=(cctr > 0).mean(axis=0),
        draws_used=N,
    )
    if keep_draws:
        out.sigma_draws, out.mctr_draws, out.cctr_draws = sigma, mctr, cctr
    return out
