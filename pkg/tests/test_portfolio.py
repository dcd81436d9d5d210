import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import feasible_grid, simplex_grid
from passive_risk.covariance import build_posterior, sample_covariance
from passive_risk.errors import (
    DegeneratePortfolio,
    InfeasibleTarget,
    InvalidInput,
    ShapeError,
    SingularCovariance,
    ValidationError,
)
from passive_risk.portfolio import (
    Portfolio,
    bayes_mc_risk,
    equal_weight,
    global_minimum_variance,
    idiosyncratic_bound,
    markowitz_optimize,
    portfolio_volatility,
    risk_decomposition,
)


def random_pd(rng, P):
    A = rng.normal(size=(P, P))
    return A @ A.T + 0.1 * np.eye(P)


def test_portfolio_invariants():
    with pytest.raises(ValidationError):
        Portfolio(("a", "b"), [0.5, 0.6])
    with pytest.raises(ValidationError):
        Portfolio(("a", "b"), [1.5, -0.5], "equal")
    with pytest.raises(ShapeError):
        Portfolio(("a",), [0.5, 0.5])
    assert Portfolio(("a", "b"), [1.5, -0.5]).long_only is False


def test_equal_weight():
    assert np.all(equal_weight("abcd").weights == 0.25)
    assert equal_weight(["x"]).weights[0] == 1.0


@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=30).filter(lambda v: sum(v) > 1e-6))
def test_max_weight_at_least_one_over_p(raw):
    w = np.array(raw) / sum(raw)
    w[-1] = 1.0 - w[:-1].sum()
    port = Portfolio(tuple(map(str, range(len(w)))), w)
    assert port.max_weight >= 1 / len(w) - 1e-15


def test_volatility_examples(rng):
    assert portfolio_volatility(equal_weight(["a"]), [[0.04]]) == pytest.approx(0.2)
    assert portfolio_volatility(equal_weight("ab"), 0.04 * np.eye(2)) == pytest.approx(0.2 / np.sqrt(2))
    s = random_pd(rng, 6)
    w = rng.dirichlet(np.ones(6))
    oracle = np.sqrt(sum(w[i] * w[j] * s[i, j] for i in range(6) for j in range(6)))
    assert portfolio_volatility(Portfolio(tuple("abcdef"), w), s) == pytest.approx(oracle, rel=1e-12)
    with pytest.raises(ShapeError):
        portfolio_volatility(equal_weight("ab"), np.eye(3))


def test_markowitz_symmetric_example():
    p = markowitz_optimize([0.1, 0.2], np.eye(2), 0.15)
    np.testing.assert_allclose(p.weights, [0.5, 0.5], atol=1e-14)


@pytest.mark.parametrize("seed", range(10))
def test_markowitz_long_only_matches_grid(seed):
    rng = np.random.default_rng(seed)
    s = random_pd(rng, 3)
    mu = rng.normal(0.0, 0.01, size=3)
    target = float(rng.uniform(mu.min(), mu.max()))
    p = markowitz_optimize(mu, s, target, long_only=True)
    W = feasible_grid(mu, target)
    obj = np.einsum("ij,jk,ik->i", W, s, W)
    best = W[obj.argmin()]
    assert np.abs(best - p.weights).max() <= 2e-3
    assert abs(p.weights @ s @ p.weights - obj.min()) <= 1e-5
    assert p.weights @ s @ p.weights <= obj.min() + 1e-12
    assert abs(p.weights.sum() - 1) <= 1e-8 and abs(p.weights @ mu - target) <= 1e-8
    assert p.info["kkt_residual"] <= 1e-8


@pytest.mark.parametrize("seed", range(5))
def test_markowitz_beats_random_feasible_portfolios(seed):
    rng = np.random.default_rng(100 + seed)
    P = 6
    s = random_pd(rng, P)
    mu = rng.normal(size=P)
    target = 0.3
    p = markowitz_optimize(mu, s, target)
    best = p.weights @ s @ p.weights
    for _ in range(200):
        # random point on the affine constraint set
        w = p.weights + rng.normal(size=P) * 0.3
        A = np.vstack([np.ones(P), mu])
        w -= A.T @ np.linalg.solve(A @ A.T, A @ w - [1.0, target])
        assert w @ s @ w >= best - 1e-12


def test_gmv_closed_form(rng):
    s = random_pd(rng, 5)
    mu = rng.normal(size=5)
    gmv = global_minimum_variance(s)
    a = np.linalg.solve(s, np.ones(5))
    np.testing.assert_allclose(gmv.weights, a / a.sum(), rtol=0, atol=1e-12)
    p = markowitz_optimize(mu, s, float(gmv.weights @ mu))
    np.testing.assert_allclose(p.weights, gmv.weights, rtol=0, atol=1e-10)


def test_equal_means_fall_back_to_gmv(rng):
    s = random_pd(rng, 4)
    with pytest.warns(UserWarning):
        p = markowitz_optimize(np.full(4, 0.01), s, 0.01)
    np.testing.assert_allclose(p.weights, global_minimum_variance(s).weights, atol=1e-12)
    with pytest.raises(InfeasibleTarget):
        markowitz_optimize(np.full(4, 0.01), s, 0.02)


def test_infeasible_and_singular(rng):
    with pytest.raises(InfeasibleTarget, match="range"):
        markowitz_optimize([0.1, 0.2], np.eye(2), 0.5, long_only=True)
    r = rng.normal(size=(3, 6))
    with pytest.raises(SingularCovariance):
        markowitz_optimize(r.mean(axis=0), sample_covariance(r), 0.0)


def test_idiosyncratic_bound_examples():
    risk, bound = idiosyncratic_bound(equal_weight("abcd"), 0.09 * np.eye(4))
    assert risk == pytest.approx(0.09 / 4) and bound == pytest.approx(0.09 / 4)
    risk, bound = idiosyncratic_bound(equal_weight("a"), [[0.3]])
    assert risk == bound == 0.3
    with pytest.raises(InvalidInput):
        idiosyncratic_bound(equal_weight("ab"), [[1.0, 0.1], [0.1, 1.0]])


def test_idiosyncratic_bound_sweep(rng):
    P = 50
    for _ in range(2000):
        w = rng.dirichlet(np.full(P, rng.uniform(0.05, 5)))
        w[-1] = 1.0 - w[:-1].sum()
        if w[-1] < 0:
            continue
        risk, bound = idiosyncratic_bound(Portfolio(tuple(map(str, range(P))), w),
                                          np.diag(rng.uniform(0.01, 1, size=P)))
        assert risk <= bound


def test_equal_weight_minimizes_idiosyncratic_risk_on_grid():
    W = simplex_grid(1e-2)
    risk = (W ** 2).sum(axis=1)
    best = W[risk.argmin()]
    np.testing.assert_allclose(best, [0.33, 0.33, 0.34], atol=1e-12)
    eq = idiosyncratic_bound(equal_weight("abc"), np.eye(3))[0]
    assert eq <= risk.min()


def test_risk_decomposition_examples(rng):
    d = risk_decomposition(equal_weight("a"), [[0.04]])
    assert d.mctr[0] == pytest.approx(0.2) and d.cctr[0] == pytest.approx(0.2)
    d = risk_decomposition(equal_weight("ab"), 0.04 * np.eye(2))
    np.testing.assert_allclose(d.cctr, [d.sigma_P / 2] * 2, rtol=1e-15)
    s = random_pd(rng, 8)
    w = rng.normal(size=8)
    w /= w.sum()
    d = risk_decomposition(Portfolio(tuple("abcdefgh"), w), s)
    assert d.cctr.sum() == pytest.approx(d.sigma_P, rel=1e-12)
    np.testing.assert_array_equal(d.cctr, w * d.mctr)
    with pytest.raises(DegeneratePortfolio):
        risk_decomposition(equal_weight("ab"), np.zeros((2, 2)))


def test_bayes_mc_per_draw_identity_and_prefix_stability():
    rng = np.random.default_rng(8)
    r = rng.normal(size=(10, 15)) * 0.01
    post = build_posterior(sample_covariance(r))
    port = equal_weight([f"a{i}" for i in range(15)])
    small = bayes_mc_risk(port, post, 200, seed=4, keep_draws=True)
    big = bayes_mc_risk(port, post, 400, seed=4, keep_draws=True)
    np.testing.assert_allclose(small.cctr_draws.sum(axis=1), small.sigma_draws, rtol=1e-12)
    np.testing.assert_array_equal(big.cctr_draws[:200], small.cctr_draws)
    assert np.all((small.prob_positive >= 0) & (small.prob_positive <= 1))
    assert small.draws_used == 200


def test_bayes_mc_scalar_oracle():
    # P = 1: sigma^2 ~ IW(df, scale) is inverse gamma, so E[sigma] is known in closed form
    from math import lgamma, exp, sqrt
    post = build_posterior(np.array([[0.0004]]), n=30, c=3)
    df, scale = post.df, post.scale[0, 0]
    d = bayes_mc_risk(equal_weight(["x"]), post, 20_000, seed=2, keep_draws=True)
    a, b = df / 2, scale / 2
    mean = sqrt(b) * exp(lgamma(a - 0.5) - lgamma(a))
    se = d.sigma_draws.std() / sqrt(len(d.sigma_draws))
    assert abs(d.sigma_P - mean) <= 3 * se
    assert d.prob_positive[0] == 1.0
