import mpmath
import numpy as np
import pytest
from scipy import stats

from passive_risk.special import chi2_sf, gammainc_lower, gammainc_upper, norm_cdf, norm_ppf, norm_sf

mpmath.mp.dps = 40


@pytest.mark.parametrize("a", [0.5, 1.0, 2.5, 5.0, 10.0, 50.0])
@pytest.mark.parametrize("x", [1e-3, 0.3, 1.0, 4.0, 12.0, 60.0, 200.0])
def test_incomplete_gamma_against_high_precision(a, x):
    lower = float(mpmath.gammainc(a, 0, x, regularized=True))
    upper = float(mpmath.gammainc(a, x, mpmath.inf, regularized=True))
    assert gammainc_lower(a, x) == pytest.approx(lower, rel=1e-10, abs=1e-300)
    assert gammainc_upper(a, x) == pytest.approx(upper, rel=1e-10, abs=1e-300)


@pytest.mark.parametrize("df", [1, 2, 5, 10, 20, 40])
def test_chi2_tail(df):
    for x in [0.1, 1.0, df, 2.0 * df, 5.0 * df + 10]:
        exact = float(mpmath.gammainc(df / 2, x / 2, mpmath.inf, regularized=True))
        assert chi2_sf(x, df) == pytest.approx(exact, rel=1e-10)


def test_normal_tails():
    for x in [-8.0, -3.0, -1.0, 0.0, 0.5, 2.0, 6.0, 10.0]:
        exact = float(mpmath.ncdf(x))
        assert norm_cdf(x) == pytest.approx(exact, rel=1e-12)
        assert norm_sf(x) == pytest.approx(float(mpmath.ncdf(-x)), rel=1e-12)
    xs = np.array([-1.0, 0.0, 1.0])
    np.testing.assert_allclose(norm_cdf(xs), stats.norm.cdf(xs), rtol=1e-14)


def test_norm_ppf():
    p = np.concatenate([np.logspace(-15, -1, 30), np.linspace(0.1, 0.9, 17),
                        1 - np.logspace(-1, -12, 20)])
    np.testing.assert_allclose(norm_ppf(p), stats.norm.ppf(p), rtol=1e-13, atol=1e-14)
    assert norm_ppf(0.975) == pytest.approx(1.959963984540054, abs=1e-14)
    for bad in (0.0, 1.0, -0.1):
        with pytest.raises(ValueError):
            norm_ppf(bad)
