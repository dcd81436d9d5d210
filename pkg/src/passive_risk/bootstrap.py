"""Nonparametric bootstrap: plain statistic, residual and paired CAPM resampling.

Replicate ``b`` draws its indices from a stream keyed by ``(seed, b)``, so the
replicate matrix is identical whatever the number of workers.
"""
from dataclasses import dataclass, field

import numpy as np

from . import _rng
from .capm import _Factorization, fit_capm
from .errors import DegenerateResampling, EmptyInput, InvalidSpec, SingularDesign
from .special import norm_ppf
from .tailrisk import order_index
from .timeseries import ReturnPanel, ReturnSeries

SCHEMES = ("plain", "residual", "paired")
MAX_REDRAW_FRACTION = 0.10


@dataclass(frozen=True)
class BootstrapSpec:
    replications: int = 1000
    seed: int = 0
    scheme: str = "plain"
    level: float = 0.05
    workers: int = 1
    keep_replicates: bool = True

    def __post_init__(self):
        if int(self.replications) < 1:
            raise InvalidSpec("need at least one bootstrap replication")
        if self.scheme not in SCHEMES:
            raise InvalidSpec(f"unknown scheme {self.scheme!r}")
        if not 0 < self.level < 1:
            raise InvalidSpec("level must lie in (0, 1)")


@dataclass
class BootstrapSummary:
    """Per-statistic bootstrap summary.

    ``se`` uses the 1/B divisor. ``lo``/``hi`` are percentile order
    statistics of the replicates; ``normal_lo``/``normal_hi`` is the Gaussian
    pivot interval around the original estimate.
    """

    names: tuple
    estimate: np.ndarray
    mean: np.ndarray
    se: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    normal_lo: np.ndarray
    normal_hi: np.ndarray
    level: float
    replications: int
    scheme: str
    seed: int
    redraws: int = 0
    replicates: np.ndarray = field(default=None, repr=False)

    def __getitem__(self, name):
        i = self.names.index(name)
        return {
            "estimate": float(self.estimate[i]),
            "mean": float(self.mean[i]),
            "se": float(self.se[i]),
            "lo": float(self.lo[i]),
            "hi": float(self.hi[i]),
            "normal_lo": float(self.normal_lo[i]),
            "normal_hi": float(self.normal_hi[i]),
        }

    def to_dict(self):
        return {
            "scheme": self.scheme,
            "replications": self.replications,
            "seed": self.seed,
            "level": self.level,
            "redraws": self.redraws,
            "statistics": {name: self[name] for name in self.names},
        }


def percentile_interval(replicates, level):
    """Order-statistic interval ``(r_(ceil(B a/2)), r_(ceil(B (1 - a/2))))`` per column."""
    reps = np.sort(np.atleast_2d(np.asarray(replicates, dtype=float).T).T, axis=0)
    B = reps.shape[0]
    return reps[order_index(level / 2, B)], reps[order_index(1 - level / 2, B)]


def summarize(replicates, estimate, names, spec, redraws=0):
    reps = np.asarray(replicates, dtype=float)
    if reps.ndim == 1:
        reps = reps[:, None]
    estimate = np.atleast_1d(np.asarray(estimate, dtype=float))
    mean = reps.mean(axis=0)
    se = np.sqrt(np.mean((reps - mean) ** 2, axis=0))
    lo, hi = percentile_interval(reps, spec.level)
    z = float(norm_ppf(1 - spec.level / 2))
    return BootstrapSummary(
        names=tuple(names),
        estimate=estimate,
        mean=mean,
        se=se,
        lo=lo,
        hi=hi,
        normal_lo=estimate - z * se,
        normal_hi=estimate + z * se,
        level=spec.level,
        replications=int(spec.replications),
        scheme=spec.scheme,
        seed=int(spec.seed),
        redraws=redraws,
        replicates=reps if spec.keep_replicates else None,
    )


def resample_indices(n, seed, b, attempt=0):
    """SRSWR row indices for replicate ``b``."""
    return _rng.stream(seed, b, attempt).integers(0, n, size=n)


def bootstrap_statistic(sample, statistic, spec):
    """Bootstrap a statistic of a one-dimensional sample.

    ``statistic`` maps a 1-d array to a scalar or a 1-d array.
    """
    x = sample.values if isinstance(sample, ReturnSeries) else np.asarray(sample, dtype=float)
    if x.size == 0:
        raise EmptyInput("cannot bootstrap an empty sample")
    n = len(x)
    estimate = np.atleast_1d(statistic(x))
    reps = _rng.indexed_map(
        lambda b: np.atleast_1d(statistic(x[resample_indices(n, spec.seed, b)])),
        int(spec.replications), spec.workers)
    names = ("statistic",) if estimate.size == 1 else tuple(f"statistic[{i}]" for i in range(estimate.size))
    return summarize(np.vstack(reps), estimate, names, spec)


def _coef_names(design, assets):
    return tuple(f"{a}:{c}" for a in assets for c in design.coefficient_names)


def _panel(panel):
    if isinstance(panel, ReturnPanel):
        return panel.matrix, panel.assets
    Y = np.asarray(panel, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    return Y, tuple(f"asset{j}" for j in range(Y.shape[1]))


def residual_bootstrap_capm(design, panel, spec):
    """Residual bootstrap: refit on ``X b_hat + e*`` with ``e*`` resampled rows of residuals."""
    Y, assets = _panel(panel)
    fit = fit_capm(design, ReturnPanel(Y, assets))
    X = design.matrix
    fitted = X @ fit.coefficients
    fac = _Factorization(X)
    n = X.shape[0]

    def one(b):
        idx = resample_indices(n, spec.seed, b)
        return fac.solve(fitted + fit.residuals[idx]).T.ravel()

    reps = _rng.indexed_map(one, int(spec.replications), spec.workers)
    return summarize(np.vstack(reps), fit.coefficients.T.ravel(), _coef_names(design, assets), spec)


def paired_bootstrap_capm(design, panel, spec, max_attempts=100):
    """Paired bootstrap: resample ``(r_i, x_i)`` rows jointly and refit.

    Replicates whose resampled design is rank deficient are redrawn from a
    fresh sub-stream; more than 10% redraws raises DegenerateResampling.
    """
    Y, assets = _panel(panel)
    fit = fit_capm(design, ReturnPanel(Y, assets))
    X = design.matrix
    n = X.shape[0]
    if n < X.shape[1] + 1:
        raise DegenerateResampling("paired bootstrap needs n >= k + 2")

    def one(b):
        for attempt in range(max_attempts):
            idx = resample_indices(n, spec.seed, b, attempt)
            try:
                fac = _Factorization(X[idx])
            except SingularDesign:
                continue
            return fac.solve(Y[idx]).T.ravel(), attempt
        raise DegenerateResampling(f"replicate {b} stayed rank deficient after {max_attempts} draws")

    results = _rng.indexed_map(one, int(spec.replications), spec.workers)
    redraws = sum(r[1] for r in results)
    if redraws > MAX_REDRAW_FRACTION * spec.replications:
        raise DegenerateResampling(f"{redraws} redraws for {spec.replications} replicates")
    reps = np.vstack([r[0] for r in results])
    return summarize(reps, fit.coefficients.T.ravel(), _coef_names(design, assets), spec, redraws)


def capm_bootstrap(design, panel, spec):
    if spec.scheme == "residual":
        return residual_bootstrap_capm(design, panel, spec)
    if spec.scheme == "paired":
        return paired_bootstrap_capm(design, panel, spec)
    raise InvalidSpec("CAPM bootstrap scheme must be 'residual' or 'paired'")
