"""Command-line interface: ``passive-risk <subcommand> ...``.

Exit status is 0 on success, 2 for invalid input or configuration and 3 when
a computation fails on well-formed input.
"""
import argparse
import csv
import io
import json
import sys

import numpy as np

from . import datasets
from .bootstrap import BootstrapSpec, capm_bootstrap
from .capm import fit_capm, market_design, risk_premium
from .covariance import build_posterior, posterior_mode, sample_covariance
from .dataio import ingest, read_prices, read_weights, write_text
from .efficiency import efficiency_battery
from .errors import InvalidSpec, IoError, NumericalError, ValidationError
from .portfolio import (
    Portfolio,
    bayes_mc_risk,
    equal_weight,
    markowitz_optimize,
    portfolio_volatility,
    risk_decomposition,
)
from .pricing import GbmParams, simulate_gbm, simulate_gbm_paths
from .report import ExperimentConfig, emit_report, load_config, run_comparison
from .tailrisk import tail_risk

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3


def _path(args):
    path = args.input or args.path
    if path is None:
        raise InvalidSpec("no input file given")
    return datasets.resolve(path)


def _add_input(p):
    p.add_argument("path", nargs="?", help="price CSV, or builtin:<name> for a bundled fixture")
    p.add_argument("--input", "--prices", dest="input", help="same as the positional path")


def _split_list(text):
    return [s.strip() for s in text.split(",") if s.strip()] if text else None


def _floats(text):
    try:
        return [float(s) for s in _split_list(text)]
    except ValueError:
        raise InvalidSpec(f"not a list of numbers: {text!r}") from None


def _markdown_kv(title, d):
    lines = [f"## {title}", "", "| key | value |", "|---|---|"]
    for k, v in d.items():
        lines.append(f"| {k} | {v} |")
    return "\n".join(lines) + "\n"


def _csv_rows(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _out(args, payload, csv_text=None, md_text=None):
    if args.format == "json":
        text = json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"
    elif args.format == "csv":
        if csv_text is None:
            raise InvalidSpec(f"{args.command} has no CSV output")
        text = csv_text
    else:
        text = md_text if md_text is not None else _markdown_kv(args.command, payload)
    if args.output:
        write_text(args.output, text)
    else:
        sys.stdout.write(text)


def cmd_ingest(args):
    panel = ingest(_path(args), _split_list(args.columns))
    payload = {
        "assets": list(panel.assets),
        "n_returns": panel.n,
        "dropped_rows": panel.dropped_rows,
        "first_date": str(panel.dates[0]),
        "last_date": str(panel.dates[-1]),
    }
    rows = [[str(d)] + [repr(float(v)) for v in row] for d, row in zip(panel.dates, panel.matrix)]
    _out(args, payload, _csv_rows(["date"] + list(panel.assets), rows))


def cmd_efficiency(args):
    table = read_prices(_path(args), [args.column])
    lags = "auto" if args.adf_lags == "auto" else int(args.adf_lags)
    verdict = efficiency_battery(table.series(args.column), H=args.H, level=args.level,
                                 lag_order=lags)
    d = verdict.to_dict()
    rows = [[k, s["method"], repr(s["statistic"]), repr(s["p_value"]), s["lags_used"]]
            for k, s in d["steps"].items()]
    md = [f"## Efficiency battery: {args.column}", "", "| check | method | statistic | p-value |",
          "|---|---|---:|---:|"]
    md += [f"| {r[0]} | {r[1]} | {float(r[2]):.4f} | {float(r[3]):.4g} |" for r in rows]
    md += ["", f"verdict: **{verdict.verdict}** at level {args.level}", ""]
    _out(args, d, _csv_rows(["check", "method", "statistic", "p_value", "lags"], rows),
         "\n".join(md))


def cmd_capm(args):
    assets = _split_list(args.asset)
    columns = [args.market] + (assets or [])
    table = read_prices(_path(args), columns if assets else None)
    premia = risk_premium(table.returns(), args.rf)
    design, panel = market_design(premia, args.market, args.rf)
    fit = fit_capm(design, panel)
    payload = {
        "market": args.market,
        "risk_free": args.rf,
        "n": design.n,
        "assets": {a: {"alpha": float(fit.alpha[j]), "beta": float(fit.beta[j]),
                       "alpha_se": float(fit.stderr[0, j]), "beta_se": float(fit.stderr[1, j]),
                       "r_squared": float(fit.r_squared[j]), "sigma2": float(fit.sigma2[j])}
                   for j, a in enumerate(fit.assets)},
    }
    rows = [[a, c, repr(v), repr(se)] for a, c, v, se in fit.table()]
    header = ["asset", "coefficient", "estimate", "stderr"]
    if args.bootstrap:
        spec = BootstrapSpec(args.B, args.seed, args.bootstrap, workers=args.workers,
                             keep_replicates=False)
        summary = capm_bootstrap(design, panel, spec)
        payload["bootstrap"] = summary.to_dict()
        header += ["boot_mean", "boot_se", "boot_lo", "boot_hi"]
        for row in rows:
            s = summary[f"{row[0]}:{row[1]}"]
            row += [repr(s["mean"]), repr(s["se"]), repr(s["lo"]), repr(s["hi"])]
    md = ["## CAPM fit on " + args.market, "", "| " + " | ".join(header) + " |",
          "|" + "---|" * len(header)]
    md += ["| " + " | ".join(r[:2] + [f"{float(v):.6g}" for v in r[2:]]) + " |" for r in rows]
    _out(args, payload, _csv_rows(header, rows), "\n".join(md) + "\n")


def _covariance(returns, mode, c):
    sample = sample_covariance(returns)
    if mode == "sample":
        return sample, None
    post = build_posterior(sample, c=c)
    return posterior_mode(post), post


def _asset_table(args):
    table = read_prices(_path(args), _split_list(args.assets))
    if args.market and args.market in table.assets:
        keep = [a for a in table.assets if a != args.market]
        table = read_prices(_path(args), keep)
    return table.returns()


def _weights_rows(port):
    return [[a, repr(float(w))] for a, w in zip(port.assets, port.weights)]


def cmd_optimize(args):
    panel = _asset_table(args)
    mu = panel.matrix.mean(axis=0)
    cov, _ = _covariance(panel, args.cov, args.c)
    if args.target_mu.strip().lower() == "auto":
        target = float(mu.mean())
    else:
        try:
            target = float(args.target_mu)
        except ValueError:
            raise InvalidSpec(f"--target-mu must be a number or 'auto', not {args.target_mu!r}") from None
    port = markowitz_optimize(mu, cov, target, long_only=args.long_only, assets=panel.assets)
    payload = {
        "target_mu": target,
        "covariance": cov.provenance,
        "long_only": port.long_only,
        "volatility": portfolio_volatility(port, cov),
        "kkt_residual": port.info.get("kkt_residual"),
        "iterations": port.info.get("iterations"),
        "weights": {a: float(w) for a, w in zip(port.assets, port.weights)},
    }
    md = ["## Markowitz weights", "", "| asset | weight |", "|---|---:|"]
    md += [f"| {a} | {float(w):.6f} |" for a, w in zip(port.assets, port.weights)]
    _out(args, payload, _csv_rows(["asset", "weight"], _weights_rows(port)), "\n".join(md) + "\n")


def cmd_risk_report(args):
    panel = _asset_table(args)
    if args.weights == "equal":
        port = equal_weight(panel.assets)
    else:
        raw = read_weights(datasets.resolve(args.weights))
        port = Portfolio.from_mapping(raw, panel.assets, normalize=True)
    r = panel.matrix @ port.weights
    levels = _floats(args.var_levels)
    cov, post = _covariance(panel, args.cov, args.c)
    dec = risk_decomposition(port, cov)
    payload = {
        "n": panel.n,
        "volatility": float(r.std(ddof=1)),
        "volatility_annualized": float(r.std(ddof=1) * np.sqrt(252)),
        "tail": [tail_risk(r, a).to_dict() for a in levels],
        "decomposition": dec.to_dict(),
    }
    if args.mc_draws and post is not None:
        mc = bayes_mc_risk(port, post, args.mc_draws, args.seed, workers=args.workers)
        payload["posterior_decomposition"] = mc.to_dict()
    rows = [[a, repr(float(w)), repr(float(m)), repr(float(c))]
            for a, w, m, c in zip(port.assets, port.weights, dec.mctr, dec.cctr)]
    md = [f"## Risk report (n = {panel.n})", "", "| level | VaR | ES |", "|---:|---:|---:|"]
    md += [f"| {t['alpha']} | {t['var']:.6f} | {t['es']:.6f} |" for t in payload["tail"]]
    md += ["", f"volatility per period {payload['volatility']:.6f}", ""]
    _out(args, payload, _csv_rows(["asset", "weight", "mctr", "cctr"], rows), "\n".join(md))


def cmd_compare(args):
    overrides = {
        "prices": args.prices, "weights": args.weights, "market": args.market,
        "assets": args.assets, "event_date": args.event_date, "cov": args.cov, "c": args.c,
        "target_mu": args.target_mu, "var_levels": args.var_levels, "seed": args.seed,
        "bootstrap_seed": args.bootstrap_seed, "mc_draws": args.mc_draws,
        "bootstrap": args.B, "workers": args.workers,
        "long_only": True if args.long_only else None,
    }
    if args.config:
        config = load_config(args.config, **overrides)
    else:
        config = ExperimentConfig().replace(**overrides)
    report = run_comparison(config)
    text = emit_report(report, args.format, args.output)
    if not args.output:
        sys.stdout.write(text)


def cmd_simulate_gbm(args):
    params = GbmParams(args.p0, args.mu, args.sigma, args.measure, args.r)
    sample = simulate_gbm(params, args.t, args.paths, args.seed, workers=args.workers)
    summary = sample.summary()
    if args.paths_csv:
        grid = simulate_gbm_paths(params, args.t, args.steps, min(args.paths, args.max_csv_paths),
                                  args.seed)
        times = np.linspace(0.0, args.t, args.steps + 1)
        rows = [[repr(float(t))] + [f"{v:.6f}" for v in grid[:, k]] for k, t in enumerate(times)]
        write_text(args.paths_csv, _csv_rows(["t"] + [f"path{i}" for i in range(len(grid))], rows))
        summary["paths_csv"] = args.paths_csv
    qs = np.quantile(sample.terminal, [0.01, 0.05, 0.5, 0.95, 0.99])
    summary["quantiles"] = {q: float(v) for q, v in zip(("1%", "5%", "50%", "95%", "99%"), qs)}
    rows = [[k, repr(v)] for k, v in summary.items() if isinstance(v, (int, float))]
    _out(args, summary, _csv_rows(["statistic", "value"], rows))


def _common(p):
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--format", choices=("json", "csv", "markdown"), default="json")
    p.add_argument("--output", "-o", help="write to this file instead of stdout")
    p.add_argument("--workers", type=int, default=1, help="threads for resampling loops")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="passive-risk",
        description="Market efficiency tests, CAPM, regularized covariance and portfolio risk.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="read a price CSV and report the aligned return panel")
    _add_input(p)
    p.add_argument("--columns", help="comma-separated price columns (default: all)")
    _common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("efficiency-test", help="ADF, Ljung-Box and normality battery")
    _add_input(p)
    p.add_argument("--column", default="INDEX")
    p.add_argument("--lags", "--H", dest="H", type=int, default=10, help="Ljung-Box lags H")
    p.add_argument("--level", type=float, default=0.05)
    p.add_argument("--adf-lags", default="auto", help="ADF lag order or 'auto'")
    _common(p)
    p.set_defaults(func=cmd_efficiency)

    p = sub.add_parser("capm", help="CAPM regression of asset risk premia on the market")
    _add_input(p)
    p.add_argument("--market", default="INDEX")
    p.add_argument("--asset", help="comma-separated assets (default: all but the market)")
    p.add_argument("--rf", type=float, default=0.0, help="annual risk-free rate")
    p.add_argument("--bootstrap", choices=("paired", "residual"))
    p.add_argument("--B", type=int, default=1000, help="bootstrap replications")
    _common(p)
    p.set_defaults(func=cmd_capm)

    for name, func, helptext in (
            ("optimize", cmd_optimize, "Markowitz weights for a target mean return"),
            ("risk-report", cmd_risk_report, "volatility, VaR/ES and risk contributions")):
        p = sub.add_parser(name, help=helptext)
        _add_input(p)
        p.add_argument("--assets", help="comma-separated assets (default: all but the market)")
        p.add_argument("--market", default="INDEX", help="column excluded from the assets")
        p.add_argument("--cov", choices=("sample", "bayes"), default="bayes")
        p.add_argument("--c", type=float, default=3.0, help="prior degrees-of-freedom offset")
        if name == "optimize":
            p.add_argument("--target-mu", required=True,
                           help="target mean return per period, or 'auto' for the mean of "
                                "the asset means")
            p.add_argument("--long-only", action="store_true")
        else:
            p.add_argument("--weights", default="equal",
                           help="asset,weight CSV or 'equal' (default)")
            p.add_argument("--var-levels", default="0.01,0.05")
            p.add_argument("--mc-draws", type=int, default=0,
                           help="posterior draws for Monte Carlo risk contributions")
        _common(p)
        p.set_defaults(func=func)

    p = sub.add_parser("compare", help="before/during comparison of the three portfolio schemes")
    p.add_argument("--config", help="key = value config file (flags override it)")
    p.add_argument("--prices")
    p.add_argument("--weights", help="index weight file")
    p.add_argument("--market")
    p.add_argument("--assets")
    p.add_argument("--event-date")
    p.add_argument("--cov", choices=("sample", "bayes"))
    p.add_argument("--c", type=float)
    p.add_argument("--target-mu", type=float)
    p.add_argument("--long-only", action="store_true")
    p.add_argument("--var-levels")
    p.add_argument("--mc-draws", type=int)
    p.add_argument("--B", type=int, help="bootstrap replications for the VaR interval")
    p.add_argument("--bootstrap-seed", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=("json", "csv", "markdown"), default="json")
    p.add_argument("--output", "-o")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("simulate-gbm", help="exact terminal-price simulation of a GBM")
    p.add_argument("--p0", type=float, default=100.0)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=0.2)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--r", type=float, default=0.0)
    p.add_argument("--measure", choices=("real-world", "risk-neutral"), default="real-world")
    p.add_argument("--paths", type=int, default=100000)
    p.add_argument("--paths-csv", help="also write sampled price paths on a time grid")
    p.add_argument("--steps", type=int, default=252)
    p.add_argument("--max-csv-paths", type=int, default=100)
    _common(p)
    p.set_defaults(func=cmd_simulate_gbm)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ValidationError, IoError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
