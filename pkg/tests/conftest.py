"""Shared instance generators and dense-grid oracles.

The oracles deliberately know nothing about the closed-form threshold
algorithms: they scan an equally spaced grid and take the largest passing
point.  They are slow and exist only to check the exact implementations.
"""

import numpy as np
import pytest


def random_paired_instance(rng, max_m=200):
    """Random (s, f) with f <= s, atoms at 0 and 1 and continuous parts."""
    m = int(rng.integers(1, max_m + 1))
    a = rng.uniform(0.0, 1.0, m)
    b = rng.uniform(0.0, 1.0, m)
    s = np.maximum(a, b)
    f = np.minimum(a, b)
    if rng.random() < 0.35:
        # concentrate mass near the interesting threshold range
        scale = rng.uniform(0.02, 0.3)
        s = s * scale
        f = f * scale
    z = rng.random(m)
    f[z < 0.06] = 0.0
    s[z > 0.94] = 1.0
    both_one = rng.random(m) > 0.97
    s[both_one] = 1.0
    f[both_one] = 1.0
    zero_pair = (z < 0.06) & (rng.random(m) < 0.3)
    s[zero_pair] = 0.0
    f = np.minimum(f, s)
    return s, f


def dense_sup_bon(f, k_alpha, step=1e-6):
    """Grid approximation of sup{ t in [0, k*alpha] : t * #{f_i < t} <= k*alpha }."""
    end = min(1.0, k_alpha)
    t = np.linspace(0.0, end, int(np.ceil(end / step)) + 1)  # actual step <= step
    fs = np.sort(np.asarray(f, dtype=float))
    count = np.searchsorted(fs, t, side="left")
    ok = t * count <= k_alpha
    return float(t[ok].max())


def dense_sup_adabon(s, f, theta, k_alpha, step=1e-6):
    """Grid approximation of the adaptive threshold supremum on [0, 1]."""
    t = np.linspace(0.0, 1.0, int(np.ceil(1.0 / step)) + 1)
    fs = np.sort(np.asarray(f, dtype=float))
    ss = np.sort(np.asarray(s, dtype=float) / theta)
    count = np.searchsorted(fs, t, side="left") - np.searchsorted(ss, t, side="left")
    ok = t * count <= k_alpha * (1.0 - theta * t)
    return float(t[ok].max())


def dense_sup_fdx(s, t_theta, k, gamma, step=1e-6):
    """Grid approximation of the augmentation supremum.

    Returns (tau_oracle, rejected_mask).  The passing set is right-open at
    its supremum, so when the last passing grid point is interior the
    supremum lies within one step above it; rejection uses the non-strict
    comparison against that bracket end.
    """
    s = np.asarray(s, dtype=float)
    t = np.linspace(0.0, 1.0, int(np.ceil(1.0 / step)) + 1)
    ssort = np.sort(s)
    band = np.sort(s[s >= t_theta])
    above = np.searchsorted(band, t, side="right")
    total = np.searchsorted(ssort, t, side="right")
    ok = (above + k) / np.maximum(total, 1) <= gamma
    if not ok.any():
        return 0.0, s == 0.0
    t_last = float(t[ok].max())
    tau = 1.0 if t_last >= 1.0 else t_last + step
    return tau, s <= tau


@pytest.fixture(scope="session")
def battery_rng():
    return np.random.default_rng(20260810)
