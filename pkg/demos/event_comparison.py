"""Before/during comparison of index-cap, equal and Markowitz portfolios.

    python3 demos/event_comparison.py
"""
from passive_risk.report import emit_report, load_config, run_comparison

config = load_config("builtin:compare.conf", mc_draws=500, bootstrap=500)
report = run_comparison(config)
print(emit_report(report, "markdown"))

for seg in ("before", "during"):
    vols = {s: report.row(s, seg)["volatility"] for s in ("index-cap", "equal", "markowitz")}
    print(seg, "highest volatility:", max(vols, key=vols.get))
print("dates dropped for missing quotes:", report.metadata["dropped_rows"])
