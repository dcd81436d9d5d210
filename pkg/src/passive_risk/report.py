"""Before/during comparison of index-cap, equal and Markowitz portfolios.

Weights are fixed from data up to the day before the event date and then held
across both segments. Each scheme and segment gets volatility (per period and
annualized), empirical VaR/ES, and optionally posterior risk contributions
and a bootstrap interval for VaR.

Config files are plain text, one ``key = value`` per line; ``#`` starts a
comment and list values are comma separated. Paths may be written as
``builtin:<name>`` to point at a bundled fixture; other relative paths are
taken relative to the config file.
"""
import csv
from dataclasses import asdict, dataclass, fields
import io
import json
import math
import os

import numpy as np

from . import datasets
from ._version import __version__
from .bootstrap import BootstrapSpec, bootstrap_statistic
from .covariance import build_posterior, posterior_mode, sample_covariance
from .dataio import read_prices, read_weights, write_text
from .errors import InvalidSpec, IoError, SchemaError
from .portfolio import Portfolio, bayes_mc_risk, equal_weight, markowitz_optimize
from .tailrisk import empirical_var, tail_risk

SCHEMA_VERSION = 1
SCHEMES = ("index-cap", "equal", "markowitz")
SEGMENTS = ("before", "during")
FORMATS = ("json", "csv", "markdown")


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise InvalidSpec(f"not a boolean: {text!r}")


def _list(text, cast=str):
    if isinstance(text, (list, tuple)):
        return tuple(cast(v) for v in text)
    return tuple(cast(v.strip()) for v in str(text).split(",") if v.strip())


@dataclass(frozen=True)
class ExperimentConfig:
    prices: str = "builtin:constituents.csv"
    weights: str = "builtin:index_weights.csv"
    market: str = "INDEX"
    assets: tuple = ()
    event_date: str = datasets.EVENT_DATE
    risk_free: float = 0.0
    periods_per_year: int = 252
    var_levels: tuple = (0.05,)
    cov: str = "bayes"
    c: float = 3.0
    target_mu: float = None
    long_only: bool = False
    seed: int = 0
    bootstrap_seed: int = 1
    mc_draws: int = 1000
    bootstrap: int = 1000
    workers: int = 1

    def __post_init__(self):
        if self.cov not in ("sample", "bayes"):
            raise InvalidSpec(f"cov must be 'sample' or 'bayes', not {self.cov!r}")
        if not self.c > 0:
            raise InvalidSpec("c must be positive")
        if not self.var_levels or not all(0 < a < 1 for a in self.var_levels):
            raise InvalidSpec("VaR levels must lie in (0, 1)")
        if self.periods_per_year < 1:
            raise InvalidSpec("periods_per_year must be positive")
        if self.mc_draws < 0 or self.bootstrap < 0:
            raise InvalidSpec("draw counts must be non-negative")
        if self.assets and len(self.assets) < 2:
            raise InvalidSpec("need at least two assets")
        try:
            np.datetime64(self.event_date, "D")
        except ValueError:
            raise InvalidSpec(f"bad event date {self.event_date!r}") from None

    _CASTS = {
        "assets": lambda v: _list(v),
        "var_levels": lambda v: _list(v, float),
        "risk_free": float,
        "periods_per_year": int,
        "c": float,
        "target_mu": lambda v: None if v is None or str(v).strip().lower() in ("", "auto", "none")
        else float(v),
        "long_only": _bool,
        "seed": int,
        "bootstrap_seed": int,
        "mc_draws": int,
        "bootstrap": int,
        "workers": int,
    }

    @classmethod
    def from_mapping(cls, values, base=None):
        """Build from string or typed values; unknown keys are an error."""
        names = {f.name for f in fields(cls)}
        kw = {}
        for key, value in values.items():
            key = key.strip().replace("-", "_")
            if key not in names:
                raise InvalidSpec(f"unknown config key {key!r}")
            cast = cls._CASTS.get(key, str)
            try:
                kw[key] = cast(value) if value is not None else None
            except ValueError:
                raise InvalidSpec(f"bad value for {key}: {value!r}") from None
        if base is not None:
            for key in ("prices", "weights"):
                if key in kw and not kw[key].startswith(datasets.PREFIX) \
                        and not os.path.isabs(kw[key]):
                    kw[key] = os.path.normpath(os.path.join(base, kw[key]))
        return cls(**kw)

    def replace(self, **overrides):
        merged = self.to_dict()
        merged.update({k: v for k, v in overrides.items() if v is not None})
        return ExperimentConfig.from_mapping(merged)

    def to_dict(self):
        d = asdict(self)
        d["assets"] = list(self.assets)
        d["var_levels"] = list(self.var_levels)
        return d


def parse_config(text):
    """Parse ``key = value`` lines into a dict of strings."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidSpec(f"config line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in out:
            raise InvalidSpec(f"config line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def load_config(path, **overrides):
    path = datasets.resolve(path)
    try:
        with open(path) as fh:
            values = parse_config(fh.read())
    except OSError as exc:
        raise IoError(f"cannot read config {path}: {exc}") from None
    cfg = ExperimentConfig.from_mapping(values, base=os.path.dirname(os.path.abspath(path)))
    return cfg.replace(**overrides) if overrides else cfg


@dataclass
class ComparisonReport:
    config: dict
    metadata: dict
    weights: dict
    rows: list
    risk_contributions: dict
    schema_version: int = SCHEMA_VERSION

    def row(self, scheme, segment):
        for r in self.rows:
            if r["scheme"] == scheme and r["segment"] == segment:
                return r
        raise KeyError((scheme, segment))

    def to_dict(self):
        return {
            "schema_version": self.schema_version,
            "config": self.config,
            "metadata": self.metadata,
            "weights": self.weights,
            "rows": self.rows,
            "risk_contributions": self.risk_contributions,
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("schema_version") != SCHEMA_VERSION:
            raise SchemaError(f"unsupported report schema {d.get('schema_version')!r}")
        return cls(d["config"], d["metadata"], d["weights"], d["rows"],
                   d["risk_contributions"], d["schema_version"])

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _level_key(alpha):
    return f"{alpha:g}"


def _segment_stats(r, levels, periods_per_year):
    vol = float(r.std(ddof=1))
    out = {
        "n": int(len(r)),
        "volatility": vol,
        "volatility_annualized": vol * math.sqrt(periods_per_year),
        "var": {},
        "es": {},
    }
    for a in levels:
        tr = tail_risk(r, a)
        out["var"][_level_key(a)] = tr.var_alpha
        out["es"][_level_key(a)] = tr.es_alpha
    return out


def _index_weights(path, assets):
    raw = read_weights(datasets.resolve(path))
    missing = [a for a in assets if a not in raw]
    if missing:
        raise SchemaError(f"weight file has no weight for {missing}")
    w = np.array([raw[a] for a in assets])
    if np.any(w < 0) or w.sum() <= 0:
        raise InvalidSpec("index weights must be non-negative with a positive sum")
    # file weights are rounded and may cover assets outside the panel
    return Portfolio(assets, w / w.sum(), "index-cap")


def _split(panel, event_date):
    cut = np.datetime64(event_date, "D")
    before = panel.dates < cut
    if before.sum() < 2 or (~before).sum() < 2:
        raise InvalidSpec(
            f"event date {event_date} must leave at least two returns on each side "
            f"of the sample {panel.dates[0]}..{panel.dates[-1]}")
    return panel.rows(before), panel.rows(~before)


def run_comparison(config):
    """Run the before/during comparison described by ``config``."""
    table = read_prices(datasets.resolve(config.prices))
    assets = config.assets or tuple(a for a in table.assets if a != config.market)
    if len(assets) < 2:
        raise InvalidSpec("need at least two assets")
    columns = list(assets) + ([config.market] if config.market in table.assets else [])
    table = read_prices(datasets.resolve(config.prices), columns)
    panel = table.returns()
    before, during = _split(panel, config.event_date)
    R = {"before": before.select(assets), "during": during.select(assets)}

    # every weight vector below sees the before segment only
    mu = R["before"].matrix.mean(axis=0)
    sample = sample_covariance(R["before"])
    post = build_posterior(sample, c=config.c)
    cov = posterior_mode(post) if config.cov == "bayes" else sample
    target = float(mu.mean()) if config.target_mu is None else config.target_mu
    ports = {
        "index-cap": _index_weights(config.weights, assets),
        "equal": equal_weight(assets),
        "markowitz": markowitz_optimize(mu, cov, target, long_only=config.long_only,
                                        assets=assets),
    }

    rows = []
    for scheme in SCHEMES:
        w = ports[scheme].weights
        for k, segment in enumerate(SEGMENTS):
            r = R[segment].matrix @ w
            row = {"scheme": scheme, "segment": segment,
                   "start": str(R[segment].dates[0]), "end": str(R[segment].dates[-1])}
            row.update(_segment_stats(r, config.var_levels, config.periods_per_year))
            if config.bootstrap:
                alpha = config.var_levels[0]
                spec = BootstrapSpec(config.bootstrap, config.bootstrap_seed + k,
                                     keep_replicates=False, workers=config.workers)
                s = bootstrap_statistic(r, lambda x: empirical_var(x, alpha), spec)["statistic"]
                row["var_bootstrap"] = {"level": alpha, "replications": config.bootstrap,
                                        "se": s["se"], "lo": s["lo"], "hi": s["hi"]}
            rows.append(row)

    contributions = {}
    if config.mc_draws:
        for scheme in SCHEMES:
            dec = bayes_mc_risk(ports[scheme], post, config.mc_draws, config.seed,
                                workers=config.workers)
            contributions[scheme] = {
                "sigma_P": dec.sigma_P,
                "draws": dec.draws_used,
                "assets": {a: {"cctr": float(dec.cctr[j]), "mctr": float(dec.mctr[j]),
                               "prob_cctr_positive": float(dec.prob_positive[j])}
                           for j, a in enumerate(assets)},
            }

    metadata = {
        "version": __version__,
        "P": len(assets),
        "n": {s: R[s].n for s in SEGMENTS},
        "dates": {s: [str(R[s].dates[0]), str(R[s].dates[-1])] for s in SEGMENTS},
        "dropped_rows": table.dropped_rows,
        "markowitz": {"target_mu": target, "covariance": cov.provenance,
                      "prior_df": float(post.prior_df),
                      "iterations": ports["markowitz"].info.get("iterations", 0)},
    }
    if config.market in table.assets:
        m = {"before": before.column(config.market), "during": during.column(config.market)}
        metadata["market_volatility"] = {s: float(m[s].std(ddof=1)) for s in SEGMENTS}
    weights = {s: {a: float(w) for a, w in zip(assets, ports[s].weights)} for s in SCHEMES}
    return ComparisonReport(config.to_dict(), metadata, weights, rows, contributions)


def _csv(report):
    levels = [_level_key(a) for a in report.config["var_levels"]]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["scheme", "segment", "start", "end", "n", "volatility", "volatility_annualized"]
               + [f"var_{a}" for a in levels] + [f"es_{a}" for a in levels])
    for r in report.rows:
        w.writerow([r["scheme"], r["segment"], r["start"], r["end"], r["n"],
                    repr(r["volatility"]), repr(r["volatility_annualized"])]
                   + [repr(r["var"][a]) for a in levels] + [repr(r["es"][a]) for a in levels])
    return buf.getvalue()


def _markdown(report):
    levels = [_level_key(a) for a in report.config["var_levels"]]
    head = "| | " + " | ".join(SCHEMES) + " |"
    rule = "|---|" + "---:|" * len(SCHEMES)
    label = {"before": "Before event", "during": "During event"}
    lines = ["## Portfolio volatility (%, annualized; per-period in brackets)", "", head, rule]
    for seg in SEGMENTS:
        cells = [f"{100 * report.row(s, seg)['volatility_annualized']:.2f} "
                 f"({100 * report.row(s, seg)['volatility']:.3f})" for s in SCHEMES]
        lines.append(f"| {label[seg]} | " + " | ".join(cells) + " |")
    for a in levels:
        lines += ["", f"## VaR (ES) at level {a}, % per period", "", head, rule]
        for seg in SEGMENTS:
            cells = [f"{100 * report.row(s, seg)['var'][a]:.2f} "
                     f"({100 * report.row(s, seg)['es'][a]:.2f})" for s in SCHEMES]
            lines.append(f"| {label[seg]} | " + " | ".join(cells) + " |")
    md = report.metadata
    lines += ["", f"P = {md['P']}; before {md['dates']['before'][0]}..{md['dates']['before'][1]} "
              f"(n = {md['n']['before']}); during {md['dates']['during'][0]}.."
              f"{md['dates']['during'][1]} (n = {md['n']['during']})", ""]
    return "\n".join(lines)


def render_report(report, fmt="json"):
    if fmt == "json":
        return report.to_json()
    if fmt == "csv":
        return _csv(report)
    if fmt == "markdown":
        return _markdown(report)
    raise InvalidSpec(f"unknown format {fmt!r}; choose from {FORMATS}")


def emit_report(report, fmt="json", path=None):
    """Render ``report`` and write it to ``path`` if given. Returns the text."""
    text = render_report(report, fmt)
    if path is not None:
        write_text(path, text)
    return text
