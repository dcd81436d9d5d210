import json

import numpy as np
import pytest

from passive_risk.errors import InfeasibleTarget, InvalidSpec, IoError
from passive_risk.report import (
    ComparisonReport,
    ExperimentConfig,
    emit_report,
    load_config,
    parse_config,
    run_comparison,
)

P = 10
EVENT = "2023-07-03"


def write_panel(path, seed=0, during_scale=2.5, permute_during=False):
    rng = np.random.default_rng(seed)
    dates = np.arange(np.datetime64("2023-01-02"), np.datetime64("2023-12-30"))
    dates = dates[np.is_busday(dates)]
    n = len(dates)
    during = dates >= np.datetime64(EVENT)
    scale = np.where(during, during_scale, 1.0)[:, None]
    r = 0.0005 + 0.01 * scale * (0.6 * rng.normal(size=(n, 1)) + 0.8 * rng.normal(size=(n, P)))
    r[0] = 0
    if permute_during:
        idx = np.flatnonzero(during)
        r[idx] = r[rng.permutation(idx)][:, ::-1] * 1.7
    prices = 100 * np.exp(np.cumsum(r, axis=0))
    names = [f"A{j}" for j in range(P)]
    with open(path, "w") as fh:
        fh.write("date," + ",".join(names) + "\n")
        for d, row in zip(dates, prices):
            fh.write(f"{d}," + ",".join(f"{v:.6f}" for v in row) + "\n")
    return names


def write_weights(path, names, weights):
    with open(path, "w") as fh:
        fh.write("asset,weight\n")
        for a, w in zip(names, weights):
            fh.write(f"{a},{float(w)!r}\n")


@pytest.fixture
def setup(tmp_path):
    prices = tmp_path / "prices.csv"
    names = write_panel(prices)
    weights = tmp_path / "weights.csv"
    cap = 1 / np.arange(1, P + 1)
    write_weights(weights, names, cap / cap.sum())
    cfg = ExperimentConfig(prices=str(prices), weights=str(weights), market="NONE",
                           event_date=EVENT, var_levels=(0.05, 0.01), mc_draws=50,
                           bootstrap=50)
    return tmp_path, cfg


def test_regime_shift_raises_volatility(setup):
    _, cfg = setup
    rep = run_comparison(cfg)
    assert len(rep.rows) == 6
    for scheme in ("index-cap", "equal", "markowitz"):
        before, during = rep.row(scheme, "before"), rep.row(scheme, "during")
        assert during["volatility"] > before["volatility"]
        assert before["volatility_annualized"] == pytest.approx(before["volatility"] * np.sqrt(252))
        assert before["es"]["0.05"] <= before["var"]["0.05"]
        assert before["end"] < EVENT <= during["start"]
    for w in rep.weights.values():
        assert sum(w.values()) == pytest.approx(1.0, abs=1e-12)
    assert set(rep.risk_contributions) == {"index-cap", "equal", "markowitz"}
    sigma = rep.risk_contributions["equal"]["sigma_P"]
    total = sum(v["cctr"] for v in rep.risk_contributions["equal"]["assets"].values())
    assert total == pytest.approx(sigma, rel=1e-10)


def test_equal_index_weights_match_equal_scheme(setup):
    tmp, cfg = setup
    path = tmp / "eq.csv"
    write_weights(path, [f"A{j}" for j in range(P)], [0.1] * P)
    rep = run_comparison(cfg.replace(weights=str(path), mc_draws=0, bootstrap=0))
    for seg in ("before", "during"):
        a, b = dict(rep.row("index-cap", seg)), dict(rep.row("equal", seg))
        a.pop("scheme"), b.pop("scheme")
        assert a == b


def test_json_round_trip_and_determinism(setup, tmp_path):
    _, cfg = setup
    rep = run_comparison(cfg)
    text = emit_report(rep, "json", str(tmp_path / "r.json"))
    back = ComparisonReport.from_json((tmp_path / "r.json").read_text())
    assert back == rep
    assert back.to_json() == text
    assert json.loads(text)["schema_version"] == 1
    assert emit_report(run_comparison(cfg), "json") == text
    # the embedded config reproduces the run
    again = run_comparison(ExperimentConfig.from_mapping(json.loads(text)["config"]))
    assert again.to_json() == text


def test_csv_and_markdown_layout(setup):
    _, cfg = setup
    rep = run_comparison(cfg.replace(mc_draws=0, bootstrap=0))
    lines = emit_report(rep, "csv").strip().splitlines()
    assert len(lines) == 1 + 3 * 2
    assert lines[0].startswith("scheme,segment")
    md = emit_report(rep, "markdown")
    tables = [ln for ln in md.splitlines() if ln.startswith("| |")]
    assert len(tables) == 3
    assert tables[0] == "| | index-cap | equal | markowitz |"
    body = [ln for ln in md.splitlines() if ln.startswith("| Before") or ln.startswith("| During")]
    assert len(body) == 6
    assert all(ln.count("|") == 5 for ln in body)
    with pytest.raises(InvalidSpec):
        emit_report(rep, "xml")


def test_no_look_ahead(tmp_path):
    names = write_panel(tmp_path / "a.csv")
    write_panel(tmp_path / "b.csv", permute_during=True)
    write_weights(tmp_path / "w.csv", names, np.full(P, 0.1))
    cfg = ExperimentConfig(prices=str(tmp_path / "a.csv"), weights=str(tmp_path / "w.csv"),
                           market="NONE", event_date=EVENT, mc_draws=0, bootstrap=0)
    a = run_comparison(cfg)
    b = run_comparison(cfg.replace(prices=str(tmp_path / "b.csv")))
    assert a.weights == b.weights
    assert a.row("markowitz", "before") == b.row("markowitz", "before")
    assert a.row("markowitz", "during") != b.row("markowitz", "during")


def test_infeasible_target_reports_range(setup):
    _, cfg = setup
    with pytest.raises(InfeasibleTarget, match="attainable"):
        run_comparison(cfg.replace(target_mu=0.5, long_only=True))


def test_bad_event_date(setup):
    _, cfg = setup
    with pytest.raises(InvalidSpec):
        run_comparison(cfg.replace(event_date="2030-01-01"))
    with pytest.raises(InvalidSpec):
        ExperimentConfig(event_date="soon")


def test_config_grammar(tmp_path):
    text = "# comment\nprices = data.csv\nvar_levels = 0.05, 0.01  # trailing\nlong_only = yes\n"
    assert parse_config(text) == {"prices": "data.csv", "var_levels": "0.05, 0.01",
                                  "long_only": "yes"}
    with pytest.raises(InvalidSpec):
        parse_config("a = 1\na = 2\n")
    with pytest.raises(InvalidSpec):
        parse_config("just words\n")
    (tmp_path / "x.conf").write_text(text)
    cfg = load_config(str(tmp_path / "x.conf"), seed=9)
    assert cfg.prices == str(tmp_path / "data.csv")
    assert cfg.var_levels == (0.05, 0.01)
    assert cfg.long_only is True
    assert cfg.seed == 9
    with pytest.raises(InvalidSpec):
        ExperimentConfig.from_mapping({"colour": "red"})
    with pytest.raises(IoError):
        load_config(str(tmp_path / "missing.conf"))


def test_unwritable_output(setup, tmp_path):
    _, cfg = setup
    rep = run_comparison(cfg.replace(mc_draws=0, bootstrap=0))
    with pytest.raises(IoError):
        emit_report(rep, "json", str(tmp_path / "no" / "dir" / "r.json"))
