"""Return algebra and the efficiency battery on the bundled index history.

    python3 demos/returns_and_efficiency.py
"""
import numpy as np

from passive_risk.dataio import read_prices
from passive_risk.datasets import fixture_path
from passive_risk.efficiency import efficiency_battery
from passive_risk.timeseries import gross_return_k, horizon_volatility, log_return, net_return

prices = [1000.0, 1040.0, 1035.0, 1050.0]
print("net returns      ", np.round(net_return(prices).values, 6))
print("3-period gross   ", gross_return_k(prices, 3))
r = log_return(prices).values
print("exp(sum log r)   ", np.exp(r.sum()))

index = read_prices(fixture_path("index_prices.csv")).series("INDEX")
daily = log_return(index).values
sd = daily.std(ddof=1)
print(f"\n{len(index)} daily closes, {index.dates[0]} to {index.dates[-1]}")
print(f"daily vol {sd:.4%}, sqrt(252) scaling gives {horizon_volatility(sd, 252):.2%} a year")

verdict = efficiency_battery(index, H=10)
for name, step in verdict.to_dict()["steps"].items():
    print(f"  {name:28s} {step['method']:14s} stat {step['statistic']:10.4f}  p {step['p_value']:.3g}")
print("verdict:", verdict.verdict)

# a pure random walk for contrast
rw = 2500 * np.exp(np.cumsum(np.random.default_rng(3).normal(0, 0.01, 3000)))
print("random walk verdict:", efficiency_battery(rw).verdict)
