"""Regenerate the synthetic fixtures bundled in src/passive_risk/data.

    python3 scripts/generate_fixtures.py

Output is deterministic: every file comes from a fixed seed and is written
with fixed formatting, so rerunning leaves the files byte-identical.
"""
import os

import numpy as np

OUT = os.path.join(os.path.dirname(__file__), "..", "src", "passive_risk", "data")
P = 50


def business_days(start, end):
    days = np.arange(np.datetime64(start, "D"), np.datetime64(end, "D") + 1)
    return days[np.is_busday(days)]


def student_t(rng, df, size):
    # unit-variance t innovations
    return rng.standard_t(df, size) * np.sqrt((df - 2) / df)


def write_prices(name, dates, columns, prices, blanks=()):
    path = os.path.join(OUT, name)
    blanks = set(blanks)
    with open(path, "w", newline="") as fh:
        fh.write("date," + ",".join(columns) + "\n")
        for i, d in enumerate(dates):
            cells = ["" if (i, j) in blanks else f"{prices[i, j]:.2f}"
                     for j in range(len(columns))]
            fh.write(f"{d}," + ",".join(cells) + "\n")


def index_history():
    rng = np.random.default_rng(20080101)
    dates = business_days("2008-01-01", "2023-12-29")
    n = len(dates)
    eps = 0.011 * student_t(rng, 4, n)
    r = np.empty(n)
    r[0] = eps[0]
    for t in range(1, n):
        r[t] = 0.0004 + 0.1 * r[t - 1] + eps[t]
    logp = np.log(2500.0) + np.concatenate([[0.0], np.cumsum(r[1:])])
    write_prices("index_prices.csv", dates, ["INDEX"], np.exp(logp)[:, None])


def constituents():
    rng = np.random.default_rng(20220224)
    dates = business_days("2021-09-01", "2022-08-31")
    n = len(dates)
    during = dates >= np.datetime64("2022-02-24")

    rank = np.arange(P)
    cap = 1.0 / (rank + 1.0) ** 0.9
    cap /= cap.sum()
    beta = 1.4 - 0.6 * rank / (P - 1)
    idio = 0.036 - 0.024 * rank / (P - 1)

    market = np.where(during, 0.014, 0.009) * student_t(rng, 5, n)
    noise = idio * np.where(during, 1.3, 1.0)[:, None] * student_t(rng, 5, (n, P))
    r = 0.0003 + market[:, None] * beta + noise
    r[0] = 0.0
    start = np.exp(rng.uniform(np.log(100), np.log(4000), P))
    prices = start * np.exp(np.cumsum(r, axis=0))
    index_r = np.log(np.exp(r) @ cap)
    index = 17000.0 * np.exp(np.cumsum(index_r))

    names = [f"S{j + 1:02d}" for j in range(P)]
    table = np.column_stack([index, prices])
    # two stocks miss a quote on one day each; those dates drop out on ingest
    write_prices("constituents.csv", dates, ["INDEX"] + names, table,
                 blanks={(40, 12), (180, 33)})
    with open(os.path.join(OUT, "index_weights.csv"), "w", newline="") as fh:
        fh.write("asset,weight\n")
        for name, w in zip(names, cap):
            fh.write(f"{name},{w:.6f}\n")


def single_stock():
    rng = np.random.default_rng(20240101)
    dates = business_days("2024-01-01", "2024-06-28")
    n = len(dates)
    rf = 0.07 / 252
    m = 0.0004 + 0.008 * student_t(rng, 6, n)
    s = rf + 0.0 + 1.24 * (m - rf) + 0.009 * student_t(rng, 6, n)
    m[0] = s[0] = 0.0
    table = np.column_stack([21700.0 * np.exp(np.cumsum(m)), 2580.0 * np.exp(np.cumsum(s))])
    write_prices("single_stock.csv", dates, ["INDEX", "STOCK"], table)


if __name__ == "__main__":
    os.makedirs(OUT, exist_ok=True)
    index_history()
    constituents()
    single_stock()
