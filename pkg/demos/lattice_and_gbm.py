"""Binomial lattice under the risk-neutral measure and its lognormal limit.

    python3 demos/lattice_and_gbm.py
"""
import math

from passive_risk.pricing import (
    BinomialModel,
    GbmParams,
    binomial_lattice,
    discounted_expectations,
    lattice_ks_distance,
    risk_neutral_prob,
    simulate_gbm,
)

m = BinomialModel(100.0, u=1.1, d=0.9, r=0.05, n=1, t=3)
dist = binomial_lattice(m)
print(f"p_hat = {risk_neutral_prob(m):.4f}")
for j, (price, mass) in enumerate(zip(dist.prices, dist.probs)):
    print(f"  {j} up-moves: price {price:8.3f}  mass {mass:.4f}")
print("discounted expectations by step:", discounted_expectations(m).round(12))

for n in (16, 64, 256):
    ks = lattice_ks_distance(BinomialModel.from_volatility(100.0, 0.2, 0.05, n))
    print(f"n = {n:3d}: KS distance to the lognormal limit {ks:.4f}")

for measure in ("real-world", "risk-neutral"):
    s = simulate_gbm(GbmParams(100.0, mu=0.08, sigma=0.2, measure=measure, r=0.05), 1.0,
                     1_000_000, seed=7).summary()
    print(f"{measure:12s} mean P_1 {s['mean']:.3f} (theory {100 * math.exp(s['drift']):.3f}), "
          f"discounted {s['discounted_mean']:.3f} +/- {s['discounted_mc_se']:.3f}")
