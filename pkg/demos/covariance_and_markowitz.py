"""Regularized covariance when assets outnumber days, then Markowitz weights.

    python3 demos/covariance_and_markowitz.py
"""
import numpy as np

from passive_risk.covariance import build_posterior, posterior_mode, sample_covariance
from passive_risk.dataio import ingest
from passive_risk.datasets import fixture_path
from passive_risk.errors import NumericalError
from passive_risk.portfolio import (
    bayes_mc_risk,
    equal_weight,
    markowitz_optimize,
    portfolio_volatility,
)

panel = ingest(fixture_path("constituents.csv"))
assets = tuple(a for a in panel.assets if a != "INDEX")
# one month of data for fifty stocks: the sample covariance is singular
window = panel.select(assets).rows(np.arange(panel.n) < 21)
S = sample_covariance(window)
print(f"P = {S.P}, n = {window.n}, sample covariance rank {S.rank}")

mu = window.matrix.mean(axis=0)
try:
    markowitz_optimize(mu, S, float(mu.mean()))
except NumericalError as exc:
    print("sample covariance:", exc)

post = build_posterior(S, c=3.0)
mode = posterior_mode(post)
print(f"prior df {post.prior_df:g}, posterior mode positive definite: {mode.is_positive_definite()}")

port = markowitz_optimize(mu, mode, float(mu.mean()), assets=assets)
eq = equal_weight(assets)
print(f"Markowitz vol {portfolio_volatility(port, mode):.4%}, "
      f"equal weight vol {portfolio_volatility(eq, mode):.4%}")
top = np.argsort(-np.abs(port.weights))[:5]
print("largest positions:", ", ".join(f"{assets[j]} {port.weights[j]:+.3f}" for j in top))

# with n < P the posterior df is P + c - 1, so the posterior mean is scale / (c - 2):
# draws sit far above the mode and Monte Carlo volatility is correspondingly larger
print(f"posterior mean / mode scale factor {(post.prior_df + post.n + post.P) / (post.df - post.P - 1):.0f}")
mc = bayes_mc_risk(eq, post, 2000, seed=0)
share = mc.cctr / mc.sigma_P
print(f"posterior mean vol of the equal-weight book {mc.sigma_P:.4%}; "
      f"largest contribution share {share.max():.1%} ({assets[int(share.argmax())]})")
