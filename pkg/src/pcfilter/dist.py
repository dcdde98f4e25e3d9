"""Distribution helpers: normal cdf/sf and even-df chi-squared cdf/sf.

The chi-squared functions only cover even degrees of freedom, which admit an
exact closed form (a truncated Poisson sum).  That is all the combining
functions ever need, and it avoids the generic incomplete-gamma machinery.
"""

import numpy as np
from scipy import special

_SQRT2 = float(np.sqrt(2.0))


def normal_cdf(x):
    """Standard normal cdf, erfc-based for full tail accuracy."""
    return 0.5 * special.erfc(-np.asarray(x, dtype=float) / _SQRT2)


def normal_sf(x):
    """Standard normal survival function 1 - cdf(x)."""
    return 0.5 * special.erfc(np.asarray(x, dtype=float) / _SQRT2)


def chi2_sf_even(x, half_df):
    """Prob(chisq >= x) for a chi-squared variable with 2 * half_df df.

    Uses the exact closed form exp(-x/2) * sum_{i < half_df} (x/2)^i / i!.
    `x` may be a scalar or array; `half_df` must be a positive integer.
    Non-finite x is mapped to 0 (an infinite statistic has no upper tail).
    """
    if half_df < 1 or half_df != int(half_df):
        raise ValueError(f"half_df must be a positive integer, got {half_df}")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("chi-squared statistic must be non-negative")
    half = np.where(np.isfinite(x), x, 0.0) / 2.0
    term = np.exp(-half)
    total = term.copy()
    for i in range(1, int(half_df)):
        term = term * half / i
        total = total + term
    # accumulated roundoff can spill a few ulp above 1 for tiny x
    total = np.clip(total, 0.0, 1.0)
    total = np.where(np.isfinite(x), total, 0.0)
    return float(total) if total.ndim == 0 else total


def chi2_cdf_even(x, half_df):
    """Prob(chisq <= x) for a chi-squared variable with 2 * half_df df."""
    return 1.0 - chi2_sf_even(x, half_df)
