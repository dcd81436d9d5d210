"""Binomial lattice under the risk-neutral measure and exact GBM sampling."""
from dataclasses import dataclass
import math

import numpy as np

from . import _rng
from .errors import ArbitrageError, DomainError, ValidationError
from .special import norm_cdf

MEASURES = ("real-world", "risk-neutral")
GBM_BLOCK = 65536


@dataclass(frozen=True)
class BinomialModel:
    """Recombining lattice with ``n`` steps per unit time over horizon ``t``.

    The per-step rate is ``r / n``; ``n * t`` must be a whole number of steps.
    """

    p0: float
    u: float
    d: float
    r: float = 0.0
    n: int = 1
    t: float = 1.0

    def __post_init__(self):
        if not self.p0 > 0:
            raise DomainError("initial price must be positive")
        if not 0 < self.d < self.u:
            raise ValidationError("need 0 < d < u")
        if int(self.n) < 1:
            raise ValidationError("n must be a positive integer")
        steps = self.n * self.t
        if steps < 1 or abs(steps - round(steps)) > 1e-9:
            raise ValidationError(f"n * t = {steps} is not a positive integer")

    @property
    def steps(self):
        return int(round(self.n * self.t))

    @property
    def growth(self):
        return 1.0 + self.r / self.n

    @classmethod
    def from_volatility(cls, p0, sigma, r, n, t=1.0):
        """Lattice with ``u = exp(sigma / sqrt(n))`` and ``d = 1 / u``."""
        if not sigma > 0:
            raise DomainError("sigma must be positive")
        h = sigma / math.sqrt(n)
        return cls(p0, math.exp(h), math.exp(-h), r, n, t)


def risk_neutral_prob(model):
    """Up-move probability ``((1 + r/n) - d) / (u - d)`` that makes discounted prices a martingale."""
    g = model.growth
    if not model.d < g < model.u:
        raise ArbitrageError(
            f"1 + r/n = {g:.12g} is outside (d, u) = ({model.d:.12g}, {model.u:.12g}); "
            "one asset dominates the other")
    return (g - model.d) / (model.u - model.d)


def _step_masses(p, k):
    # forward induction keeps every term positive, so the masses stay accurate
    masses = np.array([1.0])
    out = [masses]
    for _ in range(k):
        nxt = np.zeros(len(masses) + 1)
        nxt[:-1] += masses * (1.0 - p)
        nxt[1:] += masses * p
        masses = nxt
        out.append(masses)
    return out


@dataclass
class LatticeDistribution:
    """Terminal lattice law: ``prices[j]`` has ``j`` up-moves and mass ``probs[j]``."""

    model: BinomialModel
    p_hat: float
    up_moves: np.ndarray
    prices: np.ndarray
    probs: np.ndarray
    paths: np.ndarray = None

    def expectation(self):
        return float(self.probs @ self.prices)

    def discounted_expectation(self):
        return self.expectation() / self.model.growth ** self.model.steps

    def log_price_cdf(self):
        """Support of the terminal log-price and its CDF."""
        return np.log(self.prices), np.cumsum(self.probs)


def lattice_prices(model, k):
    j = np.arange(k + 1)
    return model.p0 * model.u ** j * model.d ** (k - j)


def binomial_lattice(model, seed=0, paths=0, workers=1):
    """Exact terminal distribution of the lattice under the risk-neutral measure.

    With ``paths > 0`` the result also carries simulated price paths of shape
    ``(paths, steps + 1)``; path ``i`` uses a stream keyed by ``(seed, i)``.
    """
    p = risk_neutral_prob(model)
    k = model.steps
    probs = _step_masses(p, k)[-1]
    out = LatticeDistribution(model, p, np.arange(k + 1), lattice_prices(model, k), probs)
    if paths:
        def one(i):
            up = _rng.stream(seed, i).random(k) < p
            factors = np.where(up, model.u, model.d)
            return model.p0 * np.concatenate([[1.0], np.cumprod(factors)])
        out.paths = np.vstack(_rng.indexed_map(one, int(paths), workers))
    return out


def discounted_expectations(model):
    """``E[P_k (1 + r/n)^-k]`` under the risk-neutral measure for ``k = 0..steps``."""
    p = risk_neutral_prob(model)
    masses = _step_masses(p, model.steps)
    return np.array([
        float(m @ lattice_prices(model, k)) / model.growth ** k for k, m in enumerate(masses)
    ])


def lattice_ks_distance(model):
    """Kolmogorov-Smirnov distance between the lattice terminal log-price and its normal limit.

    The limit is ``N(log p0 + (r - sigma^2 / 2) t, sigma^2 t)`` with
    ``sigma = log(u / d) sqrt(n) / 2``. Both one-sided gaps at every atom of
    the lattice CDF are checked, so the supremum is exact.
    """
    dist = binomial_lattice(model)
    x, cdf = dist.log_price_cdf()
    sigma = math.log(model.u / model.d) * math.sqrt(model.n) / 2
    t = model.t
    mean = math.log(model.p0) + (model.r - 0.5 * sigma ** 2) * t
    phi = norm_cdf((x - mean) / (sigma * math.sqrt(t)))
    before = np.concatenate([[0.0], cdf[:-1]])
    return float(max(np.abs(cdf - phi).max(), np.abs(phi - before).max()))


@dataclass(frozen=True)
class GbmParams:
    """Geometric Brownian motion; under ``risk-neutral`` the drift is ``r``."""

    p0: float
    mu: float = 0.0
    sigma: float = 0.0
    measure: str = "real-world"
    r: float = 0.0

    def __post_init__(self):
        if not self.p0 > 0:
            raise DomainError("initial price must be positive")
        if self.sigma < 0:
            raise DomainError("sigma must be non-negative")
        if self.measure not in MEASURES:
            raise ValidationError(f"unknown measure {self.measure!r}")

    @property
    def drift(self):
        return self.r if self.measure == "risk-neutral" else self.mu


@dataclass
class GbmSample:
    params: GbmParams
    t: float
    seed: int
    terminal: np.ndarray

    def summary(self):
        x = self.terminal
        m = len(x)
        disc = x * math.exp(-self.params.r * self.t)
        logs = np.log(x)
        sd = float(x.std(ddof=1)) if m > 1 else 0.0
        return {
            "paths": m,
            "t": self.t,
            "seed": self.seed,
            "measure": self.params.measure,
            "drift": self.params.drift,
            "mean": float(x.mean()),
            "std": sd,
            "mc_se": sd / math.sqrt(m),
            "discounted_mean": float(disc.mean()),
            "discounted_mc_se": (float(disc.std(ddof=1)) / math.sqrt(m)) if m > 1 else 0.0,
            "log_mean": float(logs.mean()),
            "log_var": float(logs.var(ddof=1)) if m > 1 else 0.0,
            "theoretical_log_mean": math.log(self.params.p0)
            + (self.params.drift - 0.5 * self.params.sigma ** 2) * self.t,
            "theoretical_log_var": self.params.sigma ** 2 * self.t,
        }


def simulate_gbm(params, t, paths, seed, workers=1):
    """Terminal prices ``p0 exp((drift - sigma^2/2) t + sigma sqrt(t) Z)``.

    Sampled exactly, one normal per path. Paths are generated in fixed blocks
    of 65536, block ``b`` from a stream keyed by ``(seed, b)``, so results do
    not depend on ``workers``.
    """
    paths = int(paths)
    if paths < 1:
        raise ValidationError("paths must be at least 1")
    if t < 0:
        raise DomainError("t must be non-negative")
    a = (params.drift - 0.5 * params.sigma ** 2) * t
    s = params.sigma * math.sqrt(t)
    nblocks = -(-paths // GBM_BLOCK)

    def block(b):
        size = min(GBM_BLOCK, paths - b * GBM_BLOCK)
        z = _rng.stream(seed, b).standard_normal(size)
        return params.p0 * np.exp(a + s * z)

    terminal = np.concatenate(_rng.indexed_map(block, nblocks, workers))
    return GbmSample(params, float(t), int(seed), terminal)


def simulate_gbm_paths(params, t, steps, paths, seed):
    """Price paths on ``steps`` equal intervals, exact at every grid point.

    Returns an array of shape ``(paths, steps + 1)``; path ``i`` uses a stream
    keyed by ``(seed, i)``.
    """
    if int(steps) < 1:
        raise ValidationError("steps must be at least 1")
    dt = t / steps
    a = (params.drift - 0.5 * params.sigma ** 2) * dt
    s = params.sigma * math.sqrt(dt)
    out = np.empty((int(paths), int(steps) + 1))
    for i in range(int(paths)):
        z = _rng.stream(seed, i).standard_normal(int(steps))
        out[i, 0] = 0.0
        out[i, 1:] = np.cumsum(a + s * z)
    return params.p0 * np.exp(out)
