"""CAPM fit of one stock with residual and paired bootstrap intervals.

    python3 demos/capm_and_bootstrap.py
"""
from passive_risk.bootstrap import BootstrapSpec, capm_bootstrap
from passive_risk.capm import fit_capm, market_design, risk_premium
from passive_risk.dataio import read_prices
from passive_risk.datasets import fixture_path

RF = 0.07  # annual, converted to a daily rate inside risk_premium

table = read_prices(fixture_path("single_stock.csv"))
premia = risk_premium(table.returns(), RF)
design, stock = market_design(premia, "INDEX", RF)
fit = fit_capm(design, stock)

print(f"n = {design.n} daily observations")
for asset, coef, est, se in fit.table():
    print(f"  {coef:6s} {est: .6f}  (SE {se:.6f})")
print(f"  R^2    {fit.r_squared[0]:.3f}")

for scheme in ("residual", "paired"):
    s = capm_bootstrap(design, stock, BootstrapSpec(1000, seed=6587, scheme=scheme))
    b = s["STOCK:beta"]
    print(f"{scheme:8s} bootstrap beta: mean {b['mean']:.4f}, SE {b['se']:.4f}, "
          f"95% percentile CI [{b['lo']:.4f}, {b['hi']:.4f}]")
