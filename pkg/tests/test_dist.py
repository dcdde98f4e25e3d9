"""Special-function checks against independent oracles."""

import mpmath
import numpy as np
import pytest
from scipy import stats

from pcfilter.dist import chi2_cdf_even, chi2_sf_even, normal_cdf, normal_sf


def test_normal_cdf_matches_mpmath():
    mpmath.mp.dps = 30
    xs = np.concatenate([np.linspace(-8, 8, 161), [-12.0, 12.0, 0.0]])
    for x in xs:
        assert normal_cdf(x) == pytest.approx(float(mpmath.ncdf(x)), abs=1e-10)
        assert normal_sf(x) == pytest.approx(float(1 - mpmath.ncdf(x)), abs=1e-10)


def test_normal_tail_value():
    # frozen from mpmath.ncdf at 30 digits
    assert normal_sf(4.0) == pytest.approx(3.16712418331199e-05, rel=1e-10)
    assert normal_cdf(0.0) == 0.5


def test_chi2_even_matches_generic_incomplete_gamma():
    rng = np.random.default_rng(7)
    x = rng.uniform(0.0, 100.0, 1000)
    nus = rng.integers(1, 21, 1000)
    for xi, nu in zip(x, nus):
        ours = chi2_sf_even(xi, int(nu))
        ref = stats.chi2.sf(xi, 2 * int(nu))
        assert ours == pytest.approx(ref, abs=1e-10)


def test_chi2_even_vectorized_and_edges():
    xs = np.array([0.0, 1.0, 10.0, np.inf])
    out = chi2_sf_even(xs, 2)
    assert out[0] == 1.0
    assert out[-1] == 0.0
    assert np.all((out >= 0.0) & (out <= 1.0))
    assert chi2_cdf_even(0.0, 3) == 0.0
    with pytest.raises(ValueError):
        chi2_sf_even(1.0, 0)
    with pytest.raises(ValueError):
        chi2_sf_even(-1.0, 1)


def test_chi2_half_df_one_is_exponential():
    xs = np.linspace(0.0, 50.0, 101)
    assert np.allclose(chi2_sf_even(xs, 1), np.exp(-xs / 2.0), atol=1e-14)
